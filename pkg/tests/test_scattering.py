import cmath
import csv
import math

import numpy as np
import pytest

from usc_waveguide import (AmplitudeSet, SystemParams, assemble_effective_system,
                           build_scattering_blocks, density_map, find_peaks, populations,
                           reflection_transmission, resonance_poles, solve_amplitudes,
                           sweep_spectrum)
from usc_waveguide.errors import ParameterError, SingularSystem, ZeroNorm
from usc_waveguide.scattering import (IDX_EG00, IDX_GE00, POPULATION_KEYS, STATE_KEYS,
                                      narrowest_resonance, pole_samples, zoom_window)

RATE = 0.0025 / math.sqrt(2.0)


def test_uncoupled_effective_block(uncoupled):
    w = 1.01
    M, s = assemble_effective_system(uncoupled, w)
    idx = [IDX_EG00, IDX_GE00]
    block = M[np.ix_(idx, idx)]
    expected = np.array([[1 - w - 1j * RATE, -1j * RATE], [-1j * RATE, 1 - w - 1j * RATE]])
    assert np.allclose(block, expected, atol=1e-15)
    assert np.allclose(s[idx], [-0.05, -0.05])
    assert np.count_nonzero(s) == 2
    # the rest is decoupled from the two qubit states
    rest = [i for i in range(11) if i not in idx]
    assert np.count_nonzero(M[np.ix_(idx, rest)]) == 0


def test_self_energy_phase_follows_delay():
    p = SystemParams(tau_d=1.0)
    M, s = assemble_effective_system(p, 2.0)
    H, _ = build_scattering_blocks(p)
    assert M[IDX_EG00, IDX_GE00] == pytest.approx(-1j * RATE * cmath.exp(2j), abs=1e-15)
    assert s[IDX_GE00] == pytest.approx(-0.05 * cmath.exp(2j), abs=1e-15)
    sigma = M + 2.0 * np.eye(11) - H.data
    sigma[np.ix_([IDX_EG00, IDX_GE00], [IDX_EG00, IDX_GE00])] = 0
    assert np.count_nonzero(sigma) == 0  # self-energy only on the qubit pair


def test_self_energy_magnitude(usc):
    assert usc.self_energy_rate == pytest.approx(1.7678e-3, rel=1e-4)


def test_batched_assembly_matches_scalar(usc):
    Mb, sb = assemble_effective_system(usc, np.array([0.95, 1.5]))
    M1, s1 = assemble_effective_system(usc, 1.5)
    assert np.array_equal(Mb[1], M1) and np.array_equal(sb[1], s1)


def test_resonant_mirror(uncoupled):
    with pytest.raises(SingularSystem) as info:
        solve_amplitudes(uncoupled, 1.0)
    assert info.value.omega == 1.0
    amps = solve_amplitudes(uncoupled, 1.0, min_norm=True)
    assert abs(amps.r) == pytest.approx(1.0, abs=1e-12)
    amps = solve_amplitudes(uncoupled, 1.0 + 1e-9)
    assert abs(amps.r) ** 2 > 0.999999


def test_far_detuned_transparency(usc):
    amps = solve_amplitudes(usc, 50.0)
    assert abs(abs(amps.t) - 1.0) < 1e-3


def test_omega_must_be_positive(usc):
    with pytest.raises(ParameterError):
        solve_amplitudes(usc, 0.0)


def test_amplitude_relations(usc):
    a = solve_amplitudes(usc, 0.97)
    k = usc.g / (1j * usc.v_g)
    u_eg, u_ge = a.u[IDX_EG00], a.u[IDX_GE00]
    assert a.t == pytest.approx(1 + k * (u_eg + u_ge), abs=1e-15)
    assert a.r == pytest.approx(k * (u_eg + u_ge), abs=1e-15)
    assert a.a == pytest.approx(1 + k * u_eg, abs=1e-15)
    assert a.b == pytest.approx(k * u_ge, abs=1e-15)
    assert abs(a.r) ** 2 + abs(a.t) ** 2 == pytest.approx(1.0, abs=1e-12)
    assert a.residual <= 1e-12
    assert a.alpha[0][0] == a.u[STATE_KEYS.index("eg00")]
    assert a.alpha[0][2] == pytest.approx(a.u[STATE_KEYS.index("eg20")] / math.sqrt(2))
    assert a.gamma[2] == pytest.approx(a.u[STATE_KEYS.index("gg20")] / math.sqrt(2))
    assert a.beta == [a.u[STATE_KEYS.index("ee00")], a.u[STATE_KEYS.index("ee10")]]


def test_reflection_transmission_trivial():
    amps = AmplitudeSet(1.0, np.zeros(11, complex), 1.0, 0.0, 1.0, 0.0)
    assert reflection_transmission(amps) == (0.0, 1.0)
    amps = AmplitudeSet(1.0, np.zeros(11, complex), 0.0, 1j, 0.0, 1j)
    assert reflection_transmission(amps) == (1.0, 0.0)


def test_flux_conservation_dense_sweep(usc):
    t = sweep_spectrum(usc, (0.9, 2.1), 2000)
    ok = t.valid
    assert ok.all()
    assert np.max(np.abs(t.R[ok] + t.T[ok] - 1.0)) < 1e-10
    assert np.all((t.R >= 0) & (t.R <= 1 + 1e-12))


def test_three_peaks_with_pole_refinement(usc):
    t = sweep_spectrum(usc, (0.9, 2.1), 2400, refine_poles=True)
    peaks = find_peaks(t.omega[t.valid], t.R[t.valid], 0.5)
    assert len(peaks) == 3
    for (om, _, _), target in zip(peaks, (0.98, 1.98, 2.004)):
        assert abs(om - target) <= 0.005
    assert any("pole" in f for f in t.flags)


def test_poles_of_symmetric_point(usc):
    z = resonance_poles(usc)
    near_one = z[np.abs(z.real - 1.0) < 1e-9]
    assert len(near_one) == 1 and abs(near_one[0].imag) < 1e-13  # exactly dark
    assert np.all(z.imag <= 1e-13)  # no gain


def test_pole_samples_resolve_narrow_line():
    pts = pole_samples([2.0 - 1e-6j, 1.0 + 0j], 0.9, 2.1, 5e-4)
    assert 2.0 in pts and 1.0 not in pts
    assert np.min(np.abs(pts - 2.0)[pts != 2.0]) == pytest.approx(5e-7)
    assert np.max(np.abs(pts - 2.0)) < 5e-4 * 2


def test_narrowest_resonance_skips_dark(asym, usc):
    z = narrowest_resonance(asym, (0.9, 1.1))
    assert 0.99 < z.real < 1.0 and abs(z.imag) > 0
    lo, hi = zoom_window(z, 10)
    assert hi - lo == pytest.approx(20 * abs(z.imag))
    z_sym = narrowest_resonance(usc, (0.9, 1.1))
    assert abs(z_sym.real - 1.0) > 1e-3


def test_sweep_two_points(usc):
    t = sweep_spectrum(usc, (0.95, 1.05), 2)
    assert len(t) == 2
    assert list(t.omega) == [0.95, 1.05]


def test_sweep_validation(usc):
    with pytest.raises(ParameterError):
        sweep_spectrum(usc, (1.0, 0.9), 10)
    with pytest.raises(ParameterError):
        sweep_spectrum(usc, (0.9, 1.0), 1)


def test_dark_point_is_flagged_not_dropped(usc):
    t = sweep_spectrum(usc, (0.9, 1.1), 401)
    i = int(np.argmin(np.abs(t.omega - 1.0)))
    assert t.omega[i] == pytest.approx(1.0, abs=1e-15)
    assert "dark" in t.flags[i] and t.valid[i]
    assert abs(t.R[i] + t.T[i] - 1) < 1e-10


def test_parallel_sweep_identical(usc):
    a = sweep_spectrum(usc, (0.9, 2.1), 300, True)
    b = sweep_spectrum(usc, (0.9, 2.1), 300, True, jobs=3)
    assert np.array_equal(a.omega, b.omega) and np.array_equal(a.R, b.R)
    assert a.flags == b.flags


def test_asymmetric_feature_near_one(asym, usc):
    a = sweep_spectrum(asym, (0.9, 1.1), 801, refine_poles=True)
    s = sweep_spectrum(usc, (0.9, 1.1), 801, refine_poles=True)
    win = (a.omega > 0.98) & (a.omega < 1.0)
    assert a.R[win].max() > 0.9
    assert s.R[(s.omega > 0.985) & (s.omega < 1.0)].max() < 0.5


def test_csv_columns(tmp_path, usc):
    t = sweep_spectrum(usc, (0.9, 1.1), 5)
    path = tmp_path / "s.csv"
    t.to_csv(path, "hello")
    lines = path.read_text().splitlines()
    assert lines[0] == "# hello"
    header = next(csv.reader([lines[1]]))
    assert header[:3] == ["omega", "R", "T"]
    assert "pop_gg10" in header and "pop_ee00" in header
    assert header[-3:] == ["pop_sym", "pop_antisym", "flags"]
    assert len(lines) == 7


# --- populations ---

def test_population_normalization(asym):
    for w in (0.95, 0.995, 1.98, 2.004):
        row = populations(solve_amplitudes(asym, w))
        assert sum(row.bare.values()) == pytest.approx(1.0, abs=1e-12)
        assert all(0 <= v <= 1 for v in row.bare.values())
        assert row.sym + row.antisym == pytest.approx(row.bare["eg00"] + row.bare["ge00"],
                                                      abs=1e-12)
        assert set(row.as_dict()) == {f"pop_{k}" for k in POPULATION_KEYS}


def test_gg10_takes_the_excitation(usc):
    row = populations(solve_amplitudes(usc, 2.004))
    assert max(row.bare, key=row.bare.get) == "gg10"
    assert row.bare["gg10"] > 0.9


def test_symmetric_couplings_never_excite_antisym(usc):
    t = sweep_spectrum(usc, (0.9, 2.1), 600, refine_poles=True)
    assert np.nanmax(t.pops["antisym"]) <= 1e-10
    assert np.allclose(t.u[:, IDX_EG00], t.u[:, IDX_GE00], atol=1e-12, rtol=0)


def test_population_crossing_near_198(usc):
    from usc_waveguide.analysis import find_crossings
    t = sweep_spectrum(usc, (1.95, 2.01), 1201, refine_poles=True)
    x = find_crossings(t.omega, t.pops["ee00"], t.pops["gg10"])
    assert any(1.97 <= c <= 1.99 for c in x)


def test_dressed_mode(usc):
    H, _ = build_scattering_blocks(usc)
    row = populations(solve_amplitudes(usc, 1.98), mode="dressed", H_loc=H)
    assert sum(row.dressed.values()) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ParameterError):
        populations(solve_amplitudes(usc, 1.98), mode="dressed")
    with pytest.raises(ParameterError):
        populations(solve_amplitudes(usc, 1.98), mode="other")


def test_zero_norm():
    amps = AmplitudeSet(1.0, np.zeros(11, complex), 1.0, 0.0, 1.0, 0.0)
    with pytest.raises(ZeroNorm):
        populations(amps)


# --- invariants ---

def test_reciprocity(asym):
    swapped = asym.replace(lambda1=asym.lambda2, lambda2=asym.lambda1)
    for w in (0.95, 0.99, 1.5, 1.98):
        assert solve_amplitudes(asym, w).t == pytest.approx(solve_amplitudes(swapped, w).t,
                                                            abs=1e-12)


def test_linearity_of_solution(asym):
    M, s = assemble_effective_system(asym, 1.3)
    u = np.linalg.solve(M, s)
    c = 0.3 - 2.0j
    uc = np.linalg.solve(M, c * s)
    assert np.allclose(uc, c * u, atol=1e-14)
    amps = solve_amplitudes(asym, 1.3)
    assert amps.residual <= 1e-12


def test_flux_with_delay():
    p = SystemParams(lambda2=0.2, tau_d=3.0)
    t = sweep_spectrum(p, (0.9, 2.1), 800, refine_poles=True)
    ok = t.valid
    assert np.max(np.abs(t.R[ok] + t.T[ok] - 1)) < 1e-10


def test_rwa_removes_two_qubit_peak(usc):
    full = sweep_spectrum(usc, (1.97, 1.99), 801, refine_poles=True)
    rwa = sweep_spectrum(usc, (1.97, 1.99), 801, refine_poles=True, counter_rotating=False)
    assert full.R.max() > 0.99
    assert rwa.R.max() < 0.01


# --- density map ---

def test_small_map(usc):
    dm = density_map(usc, (0.9, 2.1), (1.5, 2.5), 2, 2)
    assert dm.R.shape == (2, 2)
    assert np.all((dm.R >= 0) & (dm.R <= 1))


def test_map_csv_rows(tmp_path, usc):
    dm = density_map(usc, (0.9, 2.1), (1.5, 2.5), 10, 10)
    path = tmp_path / "m.csv"
    dm.to_csv(path)
    rows = path.read_text().splitlines()
    assert rows[0] == "omega,delta,R" and len(rows) == 101
    assert rows[1].split(",")[1] == rows[10].split(",")[1]  # delta-major


def _ridge_everywhere(p):
    """R > 0.5 somewhere near omega = 1 for every cavity frequency."""
    dm = density_map(p, (0.99, 1.01), (1.5, 2.5), 401, 11)
    return bool(np.all(np.nanmax(dm.R, axis=1) > 0.5))


def test_ridge_only_for_asymmetric_couplings(usc, asym):
    assert _ridge_everywhere(asym)
    assert not _ridge_everywhere(usc)


def test_parallel_map_identical(asym):
    a = density_map(asym, (0.9, 1.1), (1.5, 2.5), 21, 6)
    b = density_map(asym, (0.9, 1.1), (1.5, 2.5), 21, 6, jobs=3)
    assert np.array_equal(a.R, b.R)
