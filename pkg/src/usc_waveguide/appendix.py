"""Hand transcription of the printed 12-state scattering matrix.

Used only as an independent cross-check of :func:`build_scattering_blocks`.
Tokens: ``Cn`` a constant, ``2Cn`` twice it, ``r2Cn`` sqrt(2) times it, a
leading ``-`` negates, ``k2``/``k3``/``C1k1`` mark waveguide entries.
Row/column order is :func:`usc_waveguide.model.scattering_basis`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .hamiltonian import AppendixConstants, build_scattering_blocks
from .model import SystemParams, scattering_basis, localized_basis, WAVEGUIDE_STATE

# rightward-propagating block, as printed
TABLE_RIGHT = """
C4    C9     r2C8   0      C8    r2C7   0       C7    0      0      0     0
C9    2C2    0      C8     0     0      C7      0     0      0      0     0
r2C8  0      C5     r2C10  0     0      0       0     0      r2C7   0     0
0     C8     r2C10  C6     C10   0      0       0     r2C7   0      0     C7
C8    0      0      C10    C2    0      0       0     0      C7     k2    0
r2C7  0      0      0      0     C5     -r2C10  0     0      r2C8   0     0
0     C7     0      0      0     -r2C10 C6      -C10  r2C8   0      0     C8
C7    0      0      0      0     0      -C10    C2    0      C8     k2    0
0     0      0      r2C7   0     0      r2C8    0     2C3    -r2C9  0     0
0     0      r2C7   0      C7    r2C8   0       C8    -r2C9  C3     0     -C9
0     0      0      0      k2    0      0       k2    0      0      C1k1  0
0     0      0      C7     0     0      C8      0     0      -C9    0     0
"""

# leftward-propagating block: only the waveguide row/column is populated
TABLE_LEFT_WAVEGUIDE_COLUMN = {"eg00": "k2", "ge00": "k3"}


def _parse_table(text: str) -> list:
    rows = [line.split() for line in text.strip().splitlines()]
    if len(rows) != 12 or any(len(r) != 12 for r in rows):
        raise ValueError("transcribed table must be 12x12")
    return rows


def _token_value(token: str, c: AppendixConstants) -> float:
    if token == "0":
        return 0.0
    sign = -1.0 if token.startswith("-") else 1.0
    token = token.lstrip("-")
    factor = 1.0
    if token.startswith("r2"):
        factor, token = math.sqrt(2.0), token[2:]
    elif token.startswith("2"):
        factor, token = 2.0, token[1:]
    value = getattr(c, token.lower())
    return sign * factor * value


def transcribed_localized_block(params: SystemParams) -> np.ndarray:
    """The printed table's 11x11 block over the localized states.

    The printed entries already equal matrix elements between normalized Fock
    states; the sqrt(2) factors of the printed state vector only relate the
    amplitudes alpha_12, alpha_22, gamma_2 to physical ones, so no rescaling
    is needed here.
    """
    c = AppendixConstants.from_params(params)
    rows = _parse_table(TABLE_RIGHT)
    full = scattering_basis()
    keep = [i for i, s in enumerate(full) if s != WAVEGUIDE_STATE]
    out = np.zeros((11, 11))
    for a, i in enumerate(keep):
        for b, j in enumerate(keep):
            out[a, b] = _token_value(rows[i][j], c)
    return out


def transcribed_waveguide_couplings() -> dict:
    """Which localized states carry a waveguide entry in the printed table."""
    rows = _parse_table(TABLE_RIGHT)
    full = scattering_basis()
    w = full.index(WAVEGUIDE_STATE)
    right = {full[i].key: rows[i][w] for i in range(12) if i != w and rows[i][w] != "0"}
    return {"right": right, "left": dict(TABLE_LEFT_WAVEGUIDE_COLUMN)}


@dataclass
class AppendixReport:
    max_abs_diff: float
    mismatches: list = field(default_factory=list)  # (bra_key, ket_key, built, printed)

    @property
    def ok(self) -> bool:
        return not self.mismatches


def verify_against_appendix(params: SystemParams, tol: float = 1e-14) -> AppendixReport:
    """Entry-by-entry comparison of the programmatic block with the table."""
    built, _ = build_scattering_blocks(params)
    printed = transcribed_localized_block(params)
    diff = np.abs(built.data - printed)
    basis = localized_basis()
    mismatches = [
        (basis[i].key, basis[j].key, float(built.data[i, j]), float(printed[i, j]))
        for i, j in zip(*np.nonzero(diff > tol))
    ]
    return AppendixReport(float(diff.max()), mismatches)
