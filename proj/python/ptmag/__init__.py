"""PT-symmetric magnon-photon simulator (Python bindings to the C++ core).

Frequencies are in MHz (value / 2pi), times in microseconds; matrices returned
by the core are in rad/us.
"""

from ._core import (
    ConfigError,
    DomainError,
    ModelParams,
    NumericalError,
    analytic_eigenvalues,
    basis_states,
    canonical_params,
    classify_phase,
    collective_coherence,
    default_config,
    evolve,
    fidelity,
    find_exceptional_points,
    fock_state,
    gain_mode_state,
    hamiltonian,
    numeric_eigenvalues,
    run_scenario,
    scenario_names,
    single_excitation_matrix,
    target_state,
    validate_config,
    von_neumann_entropy,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
