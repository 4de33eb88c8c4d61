"""Many-body Bell correlations of a fully connected qubit chain near its quantum phase transition."""

__version__ = "0.1.0"

from .errors import BellQPTError, ConvergenceError, DomainError, SizeError
from .model import ModelParams, SymmetricState, TridiagonalHamiltonian, build_hamiltonian
from .spectral import SpectralDecomposition, diagonalize, gaps, parity_project
from .bell import bell_scan, depth_bound, jplus_moment, q_m, q_mu_peak, select_mu
from .harmonic import bell_onset_gamma, f_gamma, q_mu_analytic, well_parameters
from .thermal import critical_temperature, kitten_q_mu, thermal_density, thermal_q_mu

__all__ = [
    "BellQPTError", "ConvergenceError", "DomainError", "SizeError",
    "ModelParams", "SymmetricState", "TridiagonalHamiltonian", "build_hamiltonian",
    "SpectralDecomposition", "diagonalize", "gaps", "parity_project",
    "bell_scan", "depth_bound", "jplus_moment", "q_m", "q_mu_peak", "select_mu",
    "bell_onset_gamma", "f_gamma", "q_mu_analytic", "well_parameters",
    "critical_temperature", "kitten_q_mu", "thermal_density", "thermal_q_mu",
]
