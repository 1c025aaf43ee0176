"""Single-photon scattering off the qubit-cavity system.

Eliminating the waveguide field from the 12-state problem (step function
taken as 1/2 at its jump) leaves a closed 11x11 system for the localized
amplitudes ``u``::

    (H_loc - omega + Sigma(omega)) u = s(omega)

    Sigma = -i (g^2 / v_g) [[1, e^{i phi}], [e^{i phi}, 1]]   on (|eg00>, |ge00>)
    s     = -g (1, e^{i phi})                                  on (|eg00>, |ge00>)

with ``phi = omega * tau_d``. The field amplitudes follow as

    t = 1 + (g / i v_g) (u_eg00 + u_ge00 e^{-i phi})
    r =     (g / i v_g) (u_eg00 + u_ge00 e^{+i phi})
    a = 1 + (g / i v_g)  u_eg00
    b =     (g / i v_g)  u_ge00 e^{+i phi}
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, SingularSystem, ZeroNorm
from .hamiltonian import build_scattering_blocks
from .model import SystemParams, localized_basis

COND_LIMIT = 1e14
DARK_POLE_TOL = 1e-13
MIN_NORM_RESIDUAL = 1e-12  # same contract as a regular solve

_BASIS = localized_basis()
STATE_KEYS = tuple(_BASIS.keys)          # ee10, ee00, ..., gg10, gg00
IDX_EG00 = _BASIS.index("eg00")
IDX_GE00 = _BASIS.index("ge00")
POPULATION_KEYS = STATE_KEYS + ("sym", "antisym")


def _localized_matrix(params, counter_rotating=True):
    return build_scattering_blocks(params, counter_rotating)[0].data


def assemble_effective_system(params: SystemParams, omega, counter_rotating: bool = True,
                              H_loc=None):
    """Return ``(M, s)`` for one frequency, or stacked arrays for an array of them."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise ParameterError("omega must be > 0")
    H = _localized_matrix(params, counter_rotating) if H_loc is None else np.asarray(H_loc)
    w = np.atleast_1d(omega)
    phase = np.exp(1j * w * params.tau_d)
    sigma = -1j * params.self_energy_rate
    M = np.broadcast_to(H.astype(complex), (w.size,) + H.shape).copy()
    M[:, np.arange(11), np.arange(11)] -= w[:, None]
    M[:, IDX_EG00, IDX_EG00] += sigma
    M[:, IDX_GE00, IDX_GE00] += sigma
    M[:, IDX_EG00, IDX_GE00] += sigma * phase
    M[:, IDX_GE00, IDX_EG00] += sigma * phase
    s = np.zeros((w.size, 11), dtype=complex)
    s[:, IDX_EG00] = -params.g
    s[:, IDX_GE00] = -params.g * phase
    if omega.ndim == 0:
        return M[0], s[0]
    return M, s


def _field_amplitudes(params, omega, u):
    phase = np.exp(1j * omega * params.tau_d)
    k = params.g / (1j * params.v_g)
    u1, u2 = u[..., IDX_EG00], u[..., IDX_GE00]
    t = 1.0 + k * (u1 + u2 / phase)
    r = k * (u1 + u2 * phase)
    a = 1.0 + k * u1
    b = k * u2 * phase
    return t, r, a, b


@dataclass
class AmplitudeSet:
    """Solution of one scattering problem.

    ``u`` holds physical amplitudes of the 11 localized bare states in
    :func:`localized_basis` order. ``alpha``/``beta``/``gamma`` use the
    ansatz convention, where the two-photon amplitudes carry an extra
    1/sqrt(2) (``u_eg20 = sqrt(2) * alpha[0][2]``).
    """

    omega: float
    u: np.ndarray
    t: complex
    r: complex
    a: complex
    b: complex
    cond: float = float("nan")
    residual: float = float("nan")

    def _u(self, key):
        return self.u[STATE_KEYS.index(key)]

    @property
    def alpha(self):
        s2 = math.sqrt(2.0)
        return [[self._u("eg00"), self._u("eg10"), self._u("eg20") / s2],
                [self._u("ge00"), self._u("ge10"), self._u("ge20") / s2]]

    @property
    def beta(self):
        return [self._u("ee00"), self._u("ee10")]

    @property
    def gamma(self):
        return [self._u("gg00"), self._u("gg10"), self._u("gg20") / math.sqrt(2.0)]


def _solve_batch(params, omegas, H_loc):
    """Solve every frequency; returns ``(u, cond, singular, residual, dark)``.

    Numerically singular systems whose source is orthogonal to the null
    space (an exactly decoupled dark state) get the minimum-norm solution and
    ``dark = True``; the dark component cannot change ``t`` or ``r``. Other
    singular systems are left as NaN.
    """
    M, s = assemble_effective_system(params, omegas, H_loc=H_loc)
    sv = np.linalg.svd(M, compute_uv=False)
    with np.errstate(divide="ignore"):
        cond = sv[:, 0] / sv[:, -1]
    singular = ~(cond < COND_LIMIT)
    u = np.full(s.shape, np.nan, dtype=complex)
    ok = ~singular
    if ok.any():
        u[ok] = np.linalg.solve(M[ok], s[ok][..., None])[..., 0]
    dark = np.zeros(len(omegas), dtype=bool)
    if singular.any():
        idx = np.nonzero(singular)[0]
        mn = np.einsum("nij,nj->ni", np.linalg.pinv(M[idx], rcond=1e-12), s[idx])
        res = np.linalg.norm(np.einsum("nij,nj->ni", M[idx], mn) - s[idx], axis=1)
        consistent = res <= MIN_NORM_RESIDUAL * np.linalg.norm(s[idx], axis=1)
        u[idx[consistent]] = mn[consistent]
        dark[idx[consistent]] = True
    solved = ok | dark
    resid = np.full(len(omegas), np.nan)
    if solved.any():
        r = np.einsum("nij,nj->ni", M[solved], u[solved]) - s[solved]
        resid[solved] = np.linalg.norm(r, axis=1) / np.linalg.norm(s[solved], axis=1)
    return u, cond, singular & ~dark, resid, dark


def solve_amplitudes(params: SystemParams, omega: float, counter_rotating: bool = True,
                     H_loc=None, min_norm: bool = False) -> AmplitudeSet:
    """Solve the effective system at one incident frequency.

    A singular system raises :class:`SingularSystem` unless ``min_norm`` is
    set and the source does not drive the null space.
    """
    if omega <= 0:
        raise ParameterError("omega must be > 0")
    H = _localized_matrix(params, counter_rotating) if H_loc is None else H_loc
    u, cond, singular, resid, dark = _solve_batch(params, np.array([float(omega)]), H)
    if singular[0] or (dark[0] and not min_norm):
        raise SingularSystem(omega, float(cond[0]))
    t, r, a, b = _field_amplitudes(params, omega, u[0])
    return AmplitudeSet(float(omega), u[0], complex(t), complex(r), complex(a), complex(b),
                        float(cond[0]), float(resid[0]))


def reflection_transmission(amps: AmplitudeSet):
    return abs(amps.r) ** 2, abs(amps.t) ** 2


@dataclass
class PopulationRow:
    omega: float
    bare: dict
    sym: float
    antisym: float
    dressed: dict = field(default=None)

    def as_dict(self) -> dict:
        out = {f"pop_{k}": v for k, v in self.bare.items()}
        out["pop_sym"] = self.sym
        out["pop_antisym"] = self.antisym
        return out


def _population_arrays(u):
    """Normalized bare, symmetric and antisymmetric populations for stacked ``u``."""
    w = np.abs(u) ** 2
    norm = w.sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        bare = w / norm[..., None]
        sym = np.abs(u[..., IDX_EG00] + u[..., IDX_GE00]) ** 2 / 2.0 / norm
        anti = np.abs(u[..., IDX_GE00] - u[..., IDX_EG00]) ** 2 / 2.0 / norm
    return bare, sym, anti, norm


def dressed_population_arrays(u, H_loc):
    """Weights of stacked ``u`` on the eigenvectors of ``H_loc``.

    Returns ``(keys, weights)`` with keys ``"<index>:<dominant bare state>"``
    in ascending energy order; same normalization as the bare populations.
    """
    _, vecs = np.linalg.eigh(np.asarray(H_loc))
    u = np.asarray(u)
    norm = (np.abs(u) ** 2).sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        proj = np.abs(u @ vecs.conj()) ** 2 / norm[..., None]
    dom = np.argmax(np.abs(vecs) ** 2, axis=0)
    keys = [f"{k}:{STATE_KEYS[dom[k]]}" for k in range(vecs.shape[1])]
    return keys, proj


def populations(amps: AmplitudeSet, mode: str = "bare", H_loc=None) -> PopulationRow:
    """Populations of the localized states, normalized over the 11 amplitudes.

    ``mode="dressed"`` additionally projects onto eigenvectors of ``H_loc``;
    keys are ``"<index>:<dominant bare state>"``.
    """
    bare, sym, anti, norm = _population_arrays(amps.u)
    if not norm > 0:
        raise ZeroNorm(f"localized amplitudes vanish at omega={amps.omega}")
    row = PopulationRow(amps.omega, dict(zip(STATE_KEYS, map(float, bare))),
                        float(sym), float(anti))
    if mode == "dressed":
        if H_loc is None:
            raise ParameterError("dressed mode needs H_loc")
        keys, proj = dressed_population_arrays(amps.u, H_loc)
        row.dressed = dict(zip(keys, map(float, proj)))
    elif mode != "bare":
        raise ParameterError(f"unknown population mode {mode!r}")
    return row


def resonance_poles(params: SystemParams, counter_rotating: bool = True, H_loc=None,
                    iterations: int = 8) -> np.ndarray:
    """Complex eigenvalues of ``H_loc + Sigma``, sorted by real part.

    For ``tau_d > 0`` the self-energy is frequency dependent and each pole is
    iterated to self-consistency at its own real part.
    """
    H = _localized_matrix(params, counter_rotating) if H_loc is None else np.asarray(H_loc)

    def heff(w):
        M, _ = assemble_effective_system(params, max(w, 1e-12), H_loc=H)
        return M + w * np.eye(11)

    z = np.linalg.eigvals(heff(1.0))
    if params.tau_d > 0:
        for _ in range(iterations):
            z = np.array([
                min(np.linalg.eigvals(heff(zk.real)), key=lambda e: abs(e - zk)) for zk in z
            ])
    return z[np.argsort(z.real)]


def pole_samples(poles, lo, hi, step, dark_tol=DARK_POLE_TOL, factor=2.0):
    """Extra frequencies resolving resonances narrower than the uniform grid.

    Each non-dark pole in ``(lo, hi)`` gets its centre plus points at
    +-|Im z| * factor**k up to the grid step.
    """
    pts = []
    for z in poles:
        width = abs(z.imag)
        if not lo < z.real < hi or width < dark_tol:
            continue
        pts.append(z.real)
        off = 0.5 * width
        while off < step:
            pts.extend((z.real - off, z.real + off))
            off *= factor
    pts = np.array(pts)
    return pts[(pts > lo) & (pts < hi)]


@dataclass
class SpectrumTable:
    """Rows of (omega, R, T, populations, flags)."""

    omega: np.ndarray
    R: np.ndarray
    T: np.ndarray
    pops: dict                   # key in POPULATION_KEYS -> array
    flags: list
    t: np.ndarray = None
    r: np.ndarray = None
    u: np.ndarray = None
    cond: np.ndarray = None
    residual: np.ndarray = None
    params: SystemParams = None

    def __len__(self):
        return len(self.omega)

    @property
    def valid(self) -> np.ndarray:
        return np.array(["singular" not in f for f in self.flags])

    def population(self, key: str) -> np.ndarray:
        return self.pops[key]

    def to_csv(self, path, header_comment: str | None = None):
        with open(path, "w", newline="") as fh:
            if header_comment:
                for line in header_comment.splitlines():
                    fh.write(f"# {line}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["omega", "R", "T"] + [f"pop_{k}" for k in POPULATION_KEYS] + ["flags"])
            for i in range(len(self.omega)):
                w.writerow([format_float(self.omega[i]), format_float(self.R[i]), format_float(self.T[i])]
                           + [format_float(self.pops[k][i]) for k in POPULATION_KEYS]
                           + [";".join(self.flags[i])])


def format_float(x) -> str:
    return "nan" if not np.isfinite(x) else f"{x:.12g}"


def _spectrum_at(params, omegas, H_loc, extra_flags=None):
    u, cond, singular, resid, dark = _solve_batch(params, omegas, H_loc)
    t, r, _, _ = _field_amplitudes(params, omegas, u)
    bare, sym, anti, _ = _population_arrays(u)
    pops = {k: bare[:, i] for i, k in enumerate(STATE_KEYS)}
    pops["sym"], pops["antisym"] = sym, anti
    flags = []
    for i in range(len(omegas)):
        f = []
        if singular[i]:
            f.append("singular")
        if dark[i]:
            f.append("dark")
        if extra_flags is not None and extra_flags[i]:
            f.append(extra_flags[i])
        flags.append(f)
    return SpectrumTable(omegas, np.abs(r) ** 2, np.abs(t) ** 2, pops, flags,
                         t, r, u, cond, resid, params)


def spectrum_at(params: SystemParams, omegas, counter_rotating: bool = True) -> SpectrumTable:
    """Spectrum rows at arbitrary frequencies (flagged like a sweep)."""
    omegas = np.asarray(omegas, dtype=float)
    if omegas.ndim != 1 or np.any(omegas <= 0):
        raise ParameterError("omegas must be a 1-d array of positive values")
    return _spectrum_at(params, omegas, _localized_matrix(params, counter_rotating))


def sweep_spectrum(params: SystemParams, omega_range=(0.9, 2.1), n_points: int = 2400,
                   refine_poles: bool = False, counter_rotating: bool = True,
                   jobs: int = 1) -> SpectrumTable:
    """Scattering spectrum on a uniform grid, optionally augmented near poles.

    Singular frequencies are flagged, not raised: ``"dark"`` rows carry the
    minimum-norm solution, ``"singular"`` rows are NaN. With
    ``refine_poles`` the grid gains samples around each radiating pole whose
    width is below the grid step; those rows are flagged ``"pole"``.
    """
    if n_points < 2:
        raise ParameterError("n_points must be >= 2")
    lo, hi = map(float, omega_range)
    if not 0 < lo < hi:
        raise ParameterError(f"invalid omega_range {omega_range}")
    H = _localized_matrix(params, counter_rotating)
    grid = np.linspace(lo, hi, n_points)
    extra = [""] * n_points
    if refine_poles:
        poles = resonance_poles(params, counter_rotating, H)
        pts = pole_samples(poles, lo, hi, (hi - lo) / (n_points - 1))
        grid = np.concatenate([grid, pts])
        extra += ["pole"] * len(pts)
        order = np.argsort(grid, kind="stable")
        grid = grid[order]
        extra = [extra[i] for i in order]
    if jobs <= 1 or len(grid) < 2 * jobs:
        return _spectrum_at(params, grid, H, extra)
    # independent chunks, reassembled in grid order
    bounds = np.linspace(0, len(grid), jobs + 1).astype(int)
    with ThreadPoolExecutor(jobs) as ex:
        parts = list(ex.map(lambda ab: _spectrum_at(params, grid[ab[0]:ab[1]], H,
                                                     extra[ab[0]:ab[1]]),
                            zip(bounds[:-1], bounds[1:])))
    return SpectrumTable(
        grid,
        np.concatenate([p.R for p in parts]),
        np.concatenate([p.T for p in parts]),
        {k: np.concatenate([p.pops[k] for p in parts]) for k in POPULATION_KEYS},
        [f for p in parts for f in p.flags],
        np.concatenate([p.t for p in parts]),
        np.concatenate([p.r for p in parts]),
        np.concatenate([p.u for p in parts]),
        np.concatenate([p.cond for p in parts]),
        np.concatenate([p.residual for p in parts]),
        params,
    )


@dataclass
class DensityMap:
    """Reflection on an outer-product grid; ``R[i_delta, i_omega]``.

    CSV rows run delta-major: all omegas for the first delta, then the next.
    """

    omega: np.ndarray
    delta: np.ndarray
    R: np.ndarray
    singular: np.ndarray

    def to_csv(self, path, header_comment: str | None = None):
        with open(path, "w", newline="") as fh:
            if header_comment:
                for line in header_comment.splitlines():
                    fh.write(f"# {line}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["omega", "delta", "R"])
            for j, d in enumerate(self.delta):
                for i, om in enumerate(self.omega):
                    w.writerow([format_float(om), format_float(d), format_float(self.R[j, i])])


def density_map(params: SystemParams, omega_range=(0.9, 2.1), delta_range=(1.5, 2.5),
                n_omega: int = 241, n_delta: int = 101, counter_rotating: bool = True,
                jobs: int = 1) -> DensityMap:
    """Reflection over (omega, delta); ``params.delta`` is overridden per row."""
    if n_omega < 2 or n_delta < 2:
        raise ParameterError("grid sizes must be >= 2")
    for rng in (omega_range, delta_range):
        if not 0 < rng[0] < rng[1]:
            raise ParameterError(f"invalid range {rng}")
    omegas = np.linspace(*map(float, omega_range), n_omega)
    deltas = np.linspace(*map(float, delta_range), n_delta)

    def row(d):
        p = params.replace(delta=float(d))
        u, _, singular, _, _ = _solve_batch(p, omegas, _localized_matrix(p, counter_rotating))
        _, r, _, _ = _field_amplitudes(p, omegas, u)
        return np.abs(r) ** 2, singular

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as ex:
            rows = list(ex.map(row, deltas))
    else:
        rows = [row(d) for d in deltas]
    return DensityMap(omegas, deltas, np.array([r[0] for r in rows]),
                      np.array([r[1] for r in rows]))


def narrowest_resonance(params: SystemParams, window=(0.9, 1.1), counter_rotating: bool = True,
                        dark_tol: float = DARK_POLE_TOL) -> complex:
    """The radiating pole in ``window`` with the smallest width.

    Truly dark poles (``|Im z| < dark_tol``) are ignored. Used to zoom fit
    windows onto features much narrower than a coarse sweep can resolve.
    """
    lo, hi = window
    poles = [z for z in resonance_poles(params, counter_rotating)
             if lo < z.real < hi and abs(z.imag) >= dark_tol]
    if not poles:
        raise ParameterError(f"no radiating resonance in {window}")
    return min(poles, key=lambda z: abs(z.imag))


def zoom_window(pole: complex, n_widths: float = 20.0):
    """Frequency interval of +-n_widths half-widths around ``pole``."""
    hw = abs(pole.imag)
    return (pole.real - n_widths * hw, pole.real + n_widths * hw)
