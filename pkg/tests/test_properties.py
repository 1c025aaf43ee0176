"""Randomized invariants of the Hamiltonian builders and the solver."""
import numpy as np
import pytest
from hypothesis import given, strategies as st

from usc_waveguide import build_rabi_matrix, build_scattering_blocks, spectrum_at
from usc_waveguide.errors import ParameterError

from conftest import params_strategy
from invariants import CHECKS, OMEGAS


@pytest.mark.parametrize("name", list(CHECKS))
@given(p=params_strategy())
def test_invariant(name, p):
    assert CHECKS[name](p) is None


@given(params_strategy())
def test_localized_block_is_fock_sub_block(p):
    H_loc = build_scattering_blocks(p)[0]
    full = build_rabi_matrix(p, 2)
    idx = [full.basis.index(f"{s.q1}{s.q2}{s.n_cav}") for s in H_loc.basis]
    assert np.max(np.abs(full.data[np.ix_(idx, idx)] - H_loc.data)) <= 1e-14


@given(params_strategy(), st.floats(0.0, 30.0))
def test_flux_with_delay(p, tau):
    t = spectrum_at(p.replace(tau_d=tau), OMEGAS)
    ok = t.valid
    assert np.all(np.abs(t.R[ok] + t.T[ok] - 1.0) <= 1e-10)


@given(params_strategy(), st.floats(0.1, 100.0))
def test_probabilities_bounded(p, w):
    t = spectrum_at(p, [w])
    if t.valid[0]:
        assert -1e-12 <= t.R[0] <= 1 + 1e-12
        for v in t.pops.values():
            assert -1e-12 <= v[0] <= 1 + 1e-12


def test_spectrum_at_validation(usc):
    with pytest.raises(ParameterError):
        spectrum_at(usc, [1.0, -1.0])
