"""Quantum stochastic walks on networks with an incoherent source and drain."""

__version__ = "0.1.0"

from .analytic import DimerParams, dimer_est_closed, dimer_est_limits, monomer_est, monomer_populations
from .dynamics import (
    SystemSpec,
    Superoperator,
    Trajectory,
    assemble_superoperator,
    classical_generator,
    effective_hamiltonian_evolve,
    evolve,
    evolve_classical,
)
from .ensemble import EnsembleSpec, ensemble_est_sweep, fit_exponential, fit_power_law, run_ensemble
from .est import ESTCurve, est_laplace, est_sweep, est_time_integral
from .fit import FitResult, fit_dimer_to_curve
from .network import (
    NodeConfiguration,
    build_dimer_hamiltonian,
    build_dipole_hamiltonian,
    build_graph_hamiltonian,
    coupling_rates_from_hamiltonian,
    sample_disordered_network,
)
