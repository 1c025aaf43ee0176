"""Physical parameters and bare-state bases.

All energies are in units of the qubit frequency (omega_q = 1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .errors import (
    NegativeCoupling,
    NegativeCutoff,
    NegativeDelay,
    NonPositiveFrequency,
    NonPositiveRate,
    ParameterError,
)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SystemParams:
    """Validated parameter record.

    ``v_g`` is derived from ``g`` and ``gamma_wg`` through
    ``gamma_wg = 4 g**2 / v_g**2`` and is not an independent input.
    """

    delta: float = 2.0
    lambda1: float = 0.1
    lambda2: float = 0.1
    theta: float = math.pi / 6
    g: float = 0.05
    gamma_wg: float = 0.005
    tau_d: float = 0.0
    omega_q: float = field(default=1.0, init=False)
    v_g: float = field(init=False)

    def __post_init__(self):
        for name in ("delta", "lambda1", "lambda2", "theta", "g", "gamma_wg", "tau_d"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ParameterError(f"{name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.delta <= 0:
            raise NonPositiveFrequency(f"delta must be > 0, got {self.delta}")
        if self.g <= 0:
            raise NonPositiveRate(f"g must be > 0, got {self.g}")
        if self.gamma_wg <= 0:
            raise NonPositiveRate(f"gamma_wg must be > 0, got {self.gamma_wg}")
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise NegativeCoupling(
                f"couplings must be >= 0, got lambda1={self.lambda1}, lambda2={self.lambda2}")
        if self.tau_d < 0:
            raise NegativeDelay(f"tau_d must be >= 0, got {self.tau_d}")
        theta = math.fmod(self.theta, TWO_PI) % TWO_PI
        object.__setattr__(self, "theta", 0.0 if theta >= TWO_PI else theta)
        object.__setattr__(self, "v_g", 2.0 * self.g / math.sqrt(self.gamma_wg))

    @property
    def self_energy_rate(self) -> float:
        """g**2 / v_g, the magnitude of the per-qubit retarded self-energy."""
        return self.g * self.g / self.v_g

    def replace(self, **changes) -> "SystemParams":
        current = self.as_dict()
        current.update(changes)
        return validate_params(current)

    def as_dict(self) -> dict:
        return {
            "delta": self.delta,
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "theta": self.theta,
            "g": self.g,
            "gamma_wg": self.gamma_wg,
            "tau_d": self.tau_d,
        }


_REQUIRED = ("delta", "lambda1", "lambda2", "g", "gamma_wg")
_OPTIONAL = {"theta": math.pi / 6, "tau_d": 0.0}


def validate_params(raw: Mapping) -> SystemParams:
    """Build a :class:`SystemParams` from a plain mapping.

    ``theta`` defaults to pi/6 and ``tau_d`` to 0. ``omega_q`` may be present
    but must equal 1. Unknown keys are rejected.
    """
    raw = dict(raw)
    omega_q = raw.pop("omega_q", 1.0)
    if omega_q != 1.0:
        raise ParameterError("omega_q is the unit of energy and must be 1")
    missing = [k for k in _REQUIRED if k not in raw]
    if missing:
        raise ParameterError(f"missing parameters: {', '.join(missing)}")
    unknown = set(raw) - set(_REQUIRED) - set(_OPTIONAL)
    if unknown:
        raise ParameterError(f"unknown parameters: {', '.join(sorted(unknown))}")
    kwargs = {**_OPTIONAL, **raw}
    return SystemParams(**kwargs)


# --- bases -------------------------------------------------------------------

_QUBIT = ("g", "e")


@dataclass(frozen=True, order=True)
class BasisState:
    """Bare state |q1 q2, n_cav, n_wg>."""

    q1: str
    q2: str
    n_cav: int
    n_wg: int = 0

    def __post_init__(self):
        if self.q1 not in _QUBIT or self.q2 not in _QUBIT:
            raise ParameterError(f"qubit states must be 'g' or 'e': {self.q1!r}, {self.q2!r}")
        if self.n_cav < 0:
            raise ParameterError("n_cav must be >= 0")
        if self.n_wg not in (0, 1):
            raise ParameterError("n_wg must be 0 or 1")

    @classmethod
    def parse(cls, text: str) -> "BasisState":
        """Parse the shorthand ``'gg10'`` (also accepts ``'|gg10>'`` / ``'|gg10⟩'``)."""
        s = text.strip().lstrip("|").rstrip(">⟩")
        if len(s) < 3:
            raise ParameterError(f"cannot parse basis state {text!r}")
        q1, q2, rest = s[0], s[1], s[2:]
        if len(rest) == 1:
            return cls(q1, q2, int(rest), 0)
        return cls(q1, q2, int(rest[:-1]), int(rest[-1]))

    @property
    def excitations(self) -> int:
        return (self.q1 == "e") + (self.q2 == "e") + self.n_cav + self.n_wg

    @property
    def key(self) -> str:
        return f"{self.q1}{self.q2}{self.n_cav}{self.n_wg}"

    @property
    def label(self) -> str:
        return f"|{self.key}⟩"

    def __str__(self) -> str:
        return self.label


class BasisSet:
    """Ordered, duplicate-free collection of :class:`BasisState`."""

    def __init__(self, states: Iterable[BasisState]):
        self._states = tuple(states)
        self._index = {s: i for i, s in enumerate(self._states)}
        if len(self._index) != len(self._states):
            raise ParameterError("duplicate states in basis")

    def __len__(self) -> int:
        return len(self._states)

    def __iter__(self) -> Iterator[BasisState]:
        return iter(self._states)

    def __getitem__(self, i):
        return self._states[i]

    def __contains__(self, state) -> bool:
        return self._coerce(state) in self._index

    def __eq__(self, other) -> bool:
        return isinstance(other, BasisSet) and self._states == other._states

    def __hash__(self) -> int:
        return hash(self._states)

    def __repr__(self) -> str:
        return f"BasisSet([{', '.join(s.label for s in self._states)}])"

    @staticmethod
    def _coerce(state) -> BasisState:
        return BasisState.parse(state) if isinstance(state, str) else state

    def index(self, state) -> int:
        return self._index[self._coerce(state)]

    @property
    def states(self) -> tuple:
        return self._states

    @property
    def keys(self) -> list:
        return [s.key for s in self._states]


# Order of the 3-excitation scattering manifold.
_SCATTERING_ORDER = (
    "ee10", "ee00", "eg20", "eg10", "eg00", "ge20", "ge10", "ge00",
    "gg20", "gg10", "gg01", "gg00",
)
WAVEGUIDE_STATE = BasisState("g", "g", 0, 1)


def scattering_basis() -> BasisSet:
    """The 12 bare states spanning the single-photon scattering problem."""
    return BasisSet(BasisState.parse(k) for k in _SCATTERING_ORDER)


def localized_basis() -> BasisSet:
    """The 11 scattering states without the propagating photon |gg01>."""
    return BasisSet(s for s in scattering_basis() if s != WAVEGUIDE_STATE)


def fock_basis(n_max: int) -> BasisSet:
    """All {g,e} x {g,e} x {0..n_max} states, ordered by (n_cav, q1, q2)."""
    if n_max < 0:
        raise NegativeCutoff(f"n_max must be >= 0, got {n_max}")
    return BasisSet(
        BasisState(q1, q2, n)
        for n in range(n_max + 1)
        for q1 in _QUBIT
        for q2 in _QUBIT
    )
