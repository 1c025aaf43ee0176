"""Generalized two-qubit Rabi Hamiltonian and the localized scattering block.

The cavity part of the Hamiltonian is

    H = sum_j sigma_ee^(j) + delta a^dag a
        + sum_j lambda_j (a + a^dag)(cos(theta) sigma_x^(j) + sin(theta) sigma_z^(j)),

with sigma_z |e> = +|e>, sigma_z |g> = -|g>. Matrices are built by applying
this operator to bare kets, so the Fock-truncated matrix and the 11-state
scattering block come from the same code path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import CutoffTooSmall, NonHermitianInput
from .model import BasisSet, BasisState, SystemParams, fock_basis, localized_basis

HERMITIAN_TOL = 1e-13
SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class AppendixConstants:
    """Named matrix-element constants of the 12-state scattering matrix."""

    c1: complex
    c2: float
    c3: float
    c4: float
    c5: float
    c6: float
    c7: float
    c8: float
    c9: float
    c10: float

    @classmethod
    def from_params(cls, params: SystemParams) -> "AppendixConstants":
        d = params.delta
        cos_t, sin_t = math.cos(params.theta), math.sin(params.theta)
        return cls(
            c1=-1j * params.gamma_wg * params.v_g ** 2 / (4.0 * params.g ** 2),
            c2=1.0,
            c3=d,
            c4=2.0 + d,
            c5=1.0 + 2.0 * d,
            c6=1.0 + d,
            c7=params.lambda1 * cos_t,
            c8=params.lambda2 * cos_t,
            c9=(params.lambda1 + params.lambda2) * sin_t,
            c10=(params.lambda1 - params.lambda2) * sin_t,
        )


class HermitianMatrix:
    """Dense Hermitian matrix tied to the basis it is written in."""

    def __init__(self, data, basis: BasisSet, tol: float = HERMITIAN_TOL):
        data = np.asarray(data)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {data.shape}")
        if data.shape[0] != len(basis):
            raise ValueError(f"matrix dimension {data.shape[0]} != basis size {len(basis)}")
        err = hermiticity_error(data)
        if err > tol:
            raise NonHermitianInput(f"|H - H^dag| = {err:.3g} exceeds {tol:g}")
        data = data.copy()
        data.setflags(write=False)
        self.data = data
        self.basis = basis

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.data, dtype=dtype)

    def element(self, bra, ket):
        return self.data[self.basis.index(bra), self.basis.index(ket)]

    def restrict(self, basis: BasisSet) -> "HermitianMatrix":
        idx = [self.basis.index(s) for s in basis]
        return HermitianMatrix(self.data[np.ix_(idx, idx)], basis)

    def __repr__(self) -> str:
        return f"HermitianMatrix(dim={self.dim})"


def hermiticity_error(data) -> float:
    data = np.asarray(data)
    return float(np.max(np.abs(data - data.conj().T))) if data.size else 0.0


# --- operator action ----------------------------------------------------------

def _flip(q: str) -> str:
    return "e" if q == "g" else "g"


def apply_rabi(state: BasisState, params: SystemParams, counter_rotating: bool = True) -> dict:
    """Return H|state> as ``{BasisState: amplitude}`` with no truncation."""
    out: dict = {}

    def add(s, amp):
        if amp != 0.0:
            out[s] = out.get(s, 0.0) + amp

    n = state.n_cav
    add(state, (state.q1 == "e") + (state.q2 == "e") + params.delta * n)

    cos_t, sin_t = math.cos(params.theta), math.sin(params.theta)
    photon_moves = [(+1, math.sqrt(n + 1))]
    if n > 0:
        photon_moves.append((-1, math.sqrt(n)))

    for j, lam in ((1, params.lambda1), (2, params.lambda2)):
        if lam == 0.0:
            continue
        q = state.q1 if j == 1 else state.q2
        flipped = (BasisState(_flip(q), state.q2, 0, state.n_wg) if j == 1
                   else BasisState(state.q1, _flip(q), 0, state.n_wg))
        z = 1.0 if q == "e" else -1.0
        for dn, amp in photon_moves:
            n_new = n + dn
            if counter_rotating:
                add(BasisState(flipped.q1, flipped.q2, n_new, state.n_wg), lam * cos_t * amp)
                add(BasisState(state.q1, state.q2, n_new, state.n_wg), lam * sin_t * z * amp)
            else:
                # keep sigma_+ a and sigma_- a^dag only
                raising = q == "g"
                if (raising and dn == -1) or (not raising and dn == +1):
                    add(BasisState(flipped.q1, flipped.q2, n_new, state.n_wg), lam * cos_t * amp)
    return out


def project_rabi(params: SystemParams, basis: BasisSet, counter_rotating: bool = True) -> np.ndarray:
    """Matrix of the Rabi operator restricted to ``basis`` (real, dense)."""
    H = np.zeros((len(basis), len(basis)))
    for col, ket in enumerate(basis):
        for bra, amp in apply_rabi(ket, params, counter_rotating).items():
            if bra in basis:
                H[basis.index(bra), col] += amp
    return H


def build_rabi_matrix(params: SystemParams, n_max: int, counter_rotating: bool = True) -> HermitianMatrix:
    """Rabi Hamiltonian on ``fock_basis(n_max)``.

    With ``counter_rotating=False`` only cos(theta)(sigma_+ a + sigma_- a^dag)
    survives; all sigma_z (a + a^dag) terms are dropped.
    """
    if n_max < 0:
        raise CutoffTooSmall(f"n_max must be >= 0, got {n_max}")
    basis = fock_basis(n_max)
    return HermitianMatrix(project_rabi(params, basis, counter_rotating), basis)


class WaveguideCoupling(NamedTuple):
    index: int
    state: BasisState
    position: str  # "0" or "d"


def build_scattering_blocks(params: SystemParams, counter_rotating: bool = True):
    """Localized 11x11 block and the two waveguide-coupled states.

    Returns ``(H_loc, couplings)``. ``H_loc`` acts on physical amplitudes of
    the bare states in :func:`localized_basis` order. Qubit 1 (|eg00>) couples
    at x = 0, qubit 2 (|ge00>) at x = d.
    """
    basis = localized_basis()
    H = HermitianMatrix(project_rabi(params, basis, counter_rotating), basis)
    eg00, ge00 = BasisState("e", "g", 0), BasisState("g", "e", 0)
    couplings = [
        WaveguideCoupling(basis.index(eg00), eg00, "0"),
        WaveguideCoupling(basis.index(ge00), ge00, "d"),
    ]
    return H, couplings
