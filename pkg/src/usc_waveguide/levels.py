"""Energy levels of the Rabi Hamiltonian versus cavity frequency."""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment, minimize_scalar

from .errors import LabelsNotFound, NoSwapDetected, NonHermitianInput, NotConverged, ParameterError
from .hamiltonian import HERMITIAN_TOL, HermitianMatrix, build_rabi_matrix, hermiticity_error
from .model import BasisState, SystemParams, fock_basis

CUTOFF_SCHEDULE = (2, 4, 8, 16, 32, 64)
GAP_ZERO_TOL = 1e-9


def eigendecompose(H):
    """Ascending eigenvalues and orthonormal eigenvectors (as columns)."""
    data = H.data if isinstance(H, HermitianMatrix) else np.asarray(H)
    err = hermiticity_error(data)
    if err > HERMITIAN_TOL:
        raise NonHermitianInput(f"|H - H^dag| = {err:.3g}")
    return np.linalg.eigh(data)


def dominant_labels(vectors, basis):
    """Bare state with the largest weight in each eigenvector column."""
    weights = np.abs(vectors) ** 2
    idx = np.argmax(weights, axis=0)
    return [basis[i] for i in idx], weights[idx, np.arange(weights.shape[1])]


@dataclass
class LevelCurves:
    delta_grid: np.ndarray
    energies: np.ndarray          # (n_points, n_levels), ascending per row
    labels: list                  # n_points lists of BasisState
    weights: np.ndarray           # weight of the dominant bare state
    n_max: int
    params: SystemParams
    counter_rotating: bool = True
    tracks: np.ndarray = field(default=None)  # permutation continuing each curve
    antisym_weight: np.ndarray = field(default=None)  # |<(ge0 - eg0)/sqrt2|v>|^2

    @property
    def n_levels(self) -> int:
        return self.energies.shape[1]

    def level_of(self, label: BasisState) -> np.ndarray:
        """Level index carrying ``label`` at each grid point (-1 if absent)."""
        out = np.full(len(self.delta_grid), -1)
        for i, row in enumerate(self.labels):
            for k, lab in enumerate(row):
                if lab == label:
                    out[i] = k
                    break
        return out

    def to_csv(self, path, header_comment: str | None = None):
        with open(path, "w", newline="") as fh:
            if header_comment:
                for line in header_comment.splitlines():
                    fh.write(f"# {line}\n")
            w = csv.writer(fh, lineterminator="\n")
            n = self.n_levels
            w.writerow(["delta"] + [f"E_{k}" for k in range(n)] + [f"label_{k}" for k in range(n)])
            for d, row, labs in zip(self.delta_grid, self.energies, self.labels):
                w.writerow([f"{d:.12g}"] + [f"{e:.12g}" for e in row] + [s.key for s in labs])


@dataclass
class Anticrossing:
    delta_star: float
    gap: float
    levels: tuple
    labels: tuple

    def as_dict(self) -> dict:
        return {
            "delta_star": self.delta_star,
            "gap": self.gap,
            "levels": list(self.levels),
            "labels": [s.key for s in self.labels],
        }


def _lowest(params, delta, n_max, n_levels, counter_rotating):
    H = build_rabi_matrix(params.replace(delta=float(delta)), n_max, counter_rotating)
    vals, vecs = eigendecompose(H)
    return vals[:n_levels], vecs[:, :n_levels], H.basis


def converge_cutoff(params: SystemParams, delta: float | None = None, n_levels: int = 6,
                    tol: float = 1e-8, counter_rotating: bool = True):
    """Smallest cutoff in 2, 4, ..., 64 whose lowest levels move < ``tol`` on doubling.

    Returns ``(n_max, per_level_change)``.
    """
    if not tol > 0:
        raise ParameterError("tol must be > 0")
    delta = params.delta if delta is None else delta
    if n_levels > len(fock_basis(CUTOFF_SCHEDULE[0])):
        raise ParameterError("n_levels exceeds the smallest basis in the schedule")
    prev = None
    for n_max in CUTOFF_SCHEDULE:
        vals = _lowest(params, delta, n_max, n_levels, counter_rotating)[0]
        if prev is not None:
            change = np.abs(vals - prev[1])
            if change.max() < tol:
                return prev[0], change
        prev = (n_max, vals)
    raise NotConverged(f"lowest {n_levels} levels not converged to {tol:g} at n_max={CUTOFF_SCHEDULE[-1]}")


def _track(prev_vals, prev_vecs, vals, vecs, overlap_weight=1e-9):
    """Assignment of current levels to previous ones.

    Nearest-value matching; exact ties are broken by eigenvector overlap.
    """
    cost = np.abs(prev_vals[:, None] - vals[None, :])
    cost -= overlap_weight * np.abs(prev_vecs.conj().T @ vecs) ** 2
    _, cols = linear_sum_assignment(cost)
    return cols


def sweep_levels(params: SystemParams, delta_range=(1.2, 2.8), n_points: int = 401,
                 n_levels: int = 8, n_max: int | None = None, counter_rotating: bool = True,
                 jobs: int = 1) -> LevelCurves:
    """Lowest ``n_levels`` eigenvalues on a uniform grid of cavity frequencies."""
    if n_points < 2:
        raise ParameterError("n_points must be >= 2")
    lo, hi = map(float, delta_range)
    if not 0 < lo < hi:
        raise ParameterError(f"invalid delta_range {delta_range}")
    if n_max is None:
        n_max = max(converge_cutoff(params, d, min(n_levels, 12), 1e-8, counter_rotating)[0]
                    for d in (lo, hi))
    if n_levels > len(fock_basis(n_max)):
        raise ParameterError(f"n_levels={n_levels} exceeds basis size {len(fock_basis(n_max))}")
    grid = np.linspace(lo, hi, n_points)

    def work(d):
        return _lowest(params, d, n_max, n_levels, counter_rotating)

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as ex:
            results = list(ex.map(work, grid))
    else:
        results = [work(d) for d in grid]

    energies = np.array([r[0] for r in results])
    labels, weights, antisym = [], [], []
    for vals, vecs, basis in results:
        lab, w = dominant_labels(vecs, basis)
        labels.append(lab)
        weights.append(w)
        ge, eg = basis.index("ge0"), basis.index("eg0")
        antisym.append(np.abs(vecs[ge] - vecs[eg]) ** 2 / 2.0)

    tracks = np.empty((n_points, n_levels), dtype=int)
    tracks[0] = np.arange(n_levels)
    for i in range(1, n_points):
        tracks[i] = _track(results[i - 1][0], results[i - 1][1], results[i][0], results[i][1])

    return LevelCurves(grid, energies, labels, np.array(weights), n_max, params,
                       counter_rotating, tracks, np.array(antisym))


def find_anticrossing(curves: LevelCurves, label_a, label_b, refine: bool = True) -> Anticrossing:
    """Locate where the levels dominated by ``label_a`` and ``label_b`` swap.

    The swap is detected on the grid; with ``refine`` the separation of the two
    sorted levels is then minimized inside the bracketing interval. A minimum
    below ``GAP_ZERO_TOL`` is a true crossing and is reported as gap 0.
    """
    a = BasisState.parse(label_a) if isinstance(label_a, str) else label_a
    b = BasisState.parse(label_b) if isinstance(label_b, str) else label_b
    ia, ib = curves.level_of(a), curves.level_of(b)
    if not (ia >= 0).any() or not (ib >= 0).any():
        raise LabelsNotFound(f"{a.label} or {b.label} never dominates a tracked level")

    both = np.nonzero((ia >= 0) & (ib >= 0))[0]
    order = np.sign(ia[both] - ib[both])
    swaps = np.nonzero(order[1:] != order[:-1])[0]
    if swaps.size == 0:
        raise NoSwapDetected(f"{a.label} and {b.label} do not exchange character in range")

    best = None
    for s in swaps:
        i0, i1 = both[s], both[s + 1]
        lo_level = int(min(ia[i0], ib[i0]))
        hi_level = int(max(ia[i0], ib[i0]))
        sep = curves.energies[i0:i1 + 1, hi_level] - curves.energies[i0:i1 + 1, lo_level]
        k = int(np.argmin(sep))
        cand = (float(sep[k]), float(curves.delta_grid[i0 + k]), lo_level, hi_level, i0, i1)
        if best is None or cand[0] < best[0]:
            best = cand
    gap, d_star, lo_level, hi_level, i0, i1 = best

    if refine:
        params, n_max, cr = curves.params, curves.n_max, curves.counter_rotating

        def separation(d):
            vals = _lowest(params, d, n_max, hi_level + 1, cr)[0]
            return vals[hi_level] - vals[lo_level]

        def a_below_b(d):
            vals, vecs, basis = _lowest(params, d, n_max, hi_level + 1, cr)
            labs = dominant_labels(vecs, basis)[0]
            return labs.index(a) < labs.index(b) if a in labs and b in labs else None

        left = curves.delta_grid[max(i0 - 1, 0)]
        right = curves.delta_grid[min(i1 + 1, len(curves.delta_grid) - 1)]
        res = minimize_scalar(separation, bounds=(left, right), method="bounded",
                              options={"xatol": 1e-12})
        if res.fun < gap:
            gap, d_star = float(res.fun), float(res.x)
        # bisection on the label order resolves kinks (true crossings)
        lo_d, hi_d = curves.delta_grid[i0], curves.delta_grid[i1]
        o_lo = a_below_b(lo_d)
        if o_lo is not None and a_below_b(hi_d) not in (None, o_lo):
            for _ in range(60):
                mid = 0.5 * (lo_d + hi_d)
                o_mid = a_below_b(mid)
                if o_mid is None:
                    break
                if o_mid == o_lo:
                    lo_d = mid
                else:
                    hi_d = mid
                if hi_d - lo_d < 1e-14:
                    break
            for d in (lo_d, hi_d):
                sep = separation(d)
                if sep < gap:
                    gap, d_star = float(sep), float(d)
    if gap < GAP_ZERO_TOL:
        gap = 0.0
    return Anticrossing(d_star, gap, (lo_level, hi_level), (a, b))
