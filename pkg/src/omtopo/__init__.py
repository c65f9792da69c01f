"""omtopo: driven-dissipative optomechanical lattice simulator.

Pipeline: nonlinear mean-field steady states -> effective SSH chain ->
spectra and edge-state localization -> decay-controlled phase classification
-> periodically driven zero-mode state transfer.
"""

__version__ = "0.1.0"

from .model import (CELL_CHAIN, ODD_CHAIN, DriveProtocol, EffectiveChain, LatticeSpec,
                    MeanFieldState, PhaseClass, SpecError, build_hamiltonian, classify_phase,
                    effective_chain, spec_from_json, spec_to_json, validate_spec)
from .meanfield import (CouplingEquality, Trajectory, SteadyStateReport, SteadyStateMethod,
                        SteadyStateError, DivergenceError, CalibrationError, calibrate_g,
                        find_steady_state_fixed_point, find_steady_state_ode, integrate, rhs)
from .spectral import SpectrumResult, edge_weight, eigh, gap_states, gauge_fix, ipr
from .dynamics import (PeriodicSteadyState, TransferResult, cosine_chain_schedule,
                       drive_amplitude, fitted_cosine_schedule, instantaneous_spectrum_series,
                       periodic_steady_state, pss_chain_schedule, schrodinger_propagate,
                       transfer_fidelity, zero_mode_trajectory)
from .scenarios import SCENARIOS, SweepSpec, load_config, run_scenario, run_sweep
