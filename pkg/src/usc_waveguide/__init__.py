"""Single-photon scattering off two qubits ultrastrongly coupled to a cavity
in a one-dimensional waveguide."""
from .errors import *  # noqa: F401,F403
from .model import (BasisSet, BasisState, SystemParams, fock_basis, localized_basis,
                    scattering_basis, validate_params)
from .hamiltonian import (AppendixConstants, HermitianMatrix, build_rabi_matrix,
                          build_scattering_blocks)
from .levels import (Anticrossing, LevelCurves, converge_cutoff, eigendecompose,
                     find_anticrossing, sweep_levels)
from .scattering import (AmplitudeSet, DensityMap, PopulationRow, SpectrumTable,
                         assemble_effective_system, density_map, populations,
                         reflection_transmission, resonance_poles, solve_amplitudes,
                         spectrum_at, sweep_spectrum)
from .analysis import FanoFit, LorentzianFit, find_peaks, fit_fano, fit_lorentzian
from .oracle import LatticeModel, OracleResult, build_lattice, emitter_decay_rate, oracle_scatter

__version__ = "0.1.0"
