import math

import pytest
from hypothesis import given, strategies as st

from usc_waveguide import (BasisSet, BasisState, SystemParams, fock_basis, localized_basis,
                           scattering_basis, validate_params)
from usc_waveguide.errors import (NegativeCoupling, NegativeCutoff, NegativeDelay,
                                  NonPositiveFrequency, NonPositiveRate, ParameterError)

DEFAULT_RAW = dict(delta=2.0, lambda1=0.1, lambda2=0.1, theta=math.pi / 6, g=0.05,
                   gamma_wg=0.005, tau_d=0.0)


def test_default_params_give_sqrt2_group_velocity():
    p = validate_params(DEFAULT_RAW)
    assert p.v_g == pytest.approx(math.sqrt(2.0), rel=1e-15)
    assert p.omega_q == 1.0
    assert p.self_energy_rate == pytest.approx(0.0025 / math.sqrt(2.0), rel=1e-14)


def test_uncoupled_cavity_is_valid():
    p = validate_params({**DEFAULT_RAW, "lambda1": 0.0, "lambda2": 0.0})
    assert p.lambda1 == p.lambda2 == 0.0


@pytest.mark.parametrize("key, value, exc", [
    ("delta", -1.0, NonPositiveFrequency),
    ("delta", 0.0, NonPositiveFrequency),
    ("g", 0.0, NonPositiveRate),
    ("gamma_wg", -0.1, NonPositiveRate),
    ("lambda1", -0.01, NegativeCoupling),
    ("lambda2", -0.01, NegativeCoupling),
    ("tau_d", -1.0, NegativeDelay),
])
def test_rejects_unphysical_values(key, value, exc):
    with pytest.raises(exc):
        validate_params({**DEFAULT_RAW, key: value})


def test_rejections_are_value_errors():
    with pytest.raises(ValueError):
        validate_params({**DEFAULT_RAW, "delta": -1.0})


def test_unknown_missing_and_omega_q():
    with pytest.raises(ParameterError, match="unknown"):
        validate_params({**DEFAULT_RAW, "omega_c": 2.0})
    with pytest.raises(ParameterError, match="missing"):
        validate_params({k: v for k, v in DEFAULT_RAW.items() if k != "g"})
    with pytest.raises(ParameterError):
        validate_params({**DEFAULT_RAW, "omega_q": 2.0})
    assert validate_params({**DEFAULT_RAW, "omega_q": 1.0}).omega_q == 1.0


def test_theta_and_tau_default():
    raw = {k: v for k, v in DEFAULT_RAW.items() if k not in ("theta", "tau_d")}
    p = validate_params(raw)
    assert p.theta == pytest.approx(math.pi / 6)
    assert p.tau_d == 0.0


def test_non_numeric_and_nan_rejected():
    with pytest.raises(ParameterError):
        SystemParams(delta="2")
    with pytest.raises(ParameterError):
        SystemParams(delta=float("nan"))
    with pytest.raises(ParameterError):
        SystemParams(lambda1=True)


def test_params_are_immutable(usc):
    with pytest.raises(Exception):
        usc.delta = 3.0
    assert usc.replace(delta=3.0).delta == 3.0
    assert usc.delta == 2.0


@given(st.floats(-50.0, 50.0))
def test_theta_reduced_to_one_turn(theta):
    p = SystemParams(theta=theta)
    assert 0.0 <= p.theta < 2 * math.pi
    assert math.cos(p.theta) == pytest.approx(math.cos(theta), abs=1e-12)
    assert math.sin(p.theta) == pytest.approx(math.sin(theta), abs=1e-12)


@given(st.floats(1e-4, 10.0), st.floats(1e-6, 1.0))
def test_group_velocity_identity(g, gamma):
    p = SystemParams(g=g, gamma_wg=gamma)
    assert abs(4 * g * g - gamma * p.v_g ** 2) <= 1e-14 * 4 * g * g


# --- bases ---

def test_scattering_basis_order():
    b = scattering_basis()
    assert len(b) == 12
    assert b.keys == ["ee10", "ee00", "eg20", "eg10", "eg00", "ge20", "ge10", "ge00",
                      "gg20", "gg10", "gg01", "gg00"]
    assert b.index("gg10") == 9
    assert b.index("ee00") == 1
    assert b.index("gg01") == 10
    assert b.index("gg00") == 11
    assert scattering_basis() == b


def test_basis_lookup_is_bijection():
    b = scattering_basis()
    assert sorted(b.index(s) for s in b) == list(range(12))
    assert all(b[b.index(s)] == s for s in b)


def test_localized_basis_drops_waveguide_state():
    b = localized_basis()
    assert len(b) == 11
    assert "gg01" not in b
    assert all(s.excitations <= 3 for s in scattering_basis())


def test_basis_state_parsing_and_display():
    s = BasisState.parse("|gg10⟩")
    assert s == BasisState("g", "g", 1, 0)
    assert s.label == "|gg10⟩"
    assert BasisState.parse("ee0") == BasisState("e", "e", 0, 0)
    assert BasisState.parse("gg01").n_wg == 1
    with pytest.raises(ParameterError):
        BasisState("x", "g", 0)
    with pytest.raises(ParameterError):
        BasisState("g", "g", 0, 2)
    with pytest.raises(ParameterError):
        BasisState.parse("g")


def test_duplicate_basis_rejected():
    s = BasisState("g", "g", 0)
    with pytest.raises(ParameterError):
        BasisSet([s, s])


@pytest.mark.parametrize("n_max, size", [(0, 4), (2, 12), (10, 44)])
def test_fock_basis_size(n_max, size):
    assert len(fock_basis(n_max)) == size


def test_fock_basis_zero_photon_sector():
    assert fock_basis(0).keys == ["gg00", "ge00", "eg00", "ee00"]


def test_fock_basis_negative_cutoff():
    with pytest.raises(NegativeCutoff):
        fock_basis(-1)


@given(st.integers(0, 20))
def test_fock_basis_prefix(n):
    small, big = fock_basis(n).states, fock_basis(n + 1).states
    assert big[:len(small)] == small
