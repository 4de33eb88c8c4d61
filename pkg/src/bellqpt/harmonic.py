"""Effective double-well potential and its harmonic approximation.

For large N the Dicke-basis recursion becomes a Schrodinger-like equation in
the imbalance z with potential V(z) = -sqrt(1 - z^2) + gamma z^2 / 2 and an
effective Planck constant 2/N.  Past gamma = -1 the potential splits into
two wells at +-z0 that are locally harmonic with frequency omega.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import bisect

from .bell import LN2, log_binom, select_mu
from .errors import DomainError
from .model import ModelParams, SymmetricState
from .spectral import SpectralDecomposition, raw_energy

QPT_GAMMA = -1.0
ONSET_BRACKET = (-1.5, -1.1)


def _require_broken_phase(gamma: float) -> None:
    if not gamma < QPT_GAMMA:
        raise DomainError(f"no double well for gamma >= -1 (got gamma={gamma})")


@dataclass(frozen=True)
class WellParameters:
    gamma: float
    z0: float
    omega: float
    v0: float


def v_eff(z, gamma: float):
    """V(z) = -sqrt(1 - z^2) + z^2 gamma / 2 for |z| <= 1."""
    z_arr = np.asarray(z, dtype=float)
    if np.any(np.abs(z_arr) > 1.0):
        raise DomainError("v_eff is defined for |z| <= 1")
    out = -np.sqrt(1.0 - z_arr**2) + 0.5 * gamma * z_arr**2
    return float(out) if out.ndim == 0 else out


def well_parameters(gamma: float) -> WellParameters:
    """Minima +-z0, curvature omega^2 = V''(z0) and the well-bottom energy V(z0)."""
    _require_broken_phase(gamma)
    g = abs(gamma)
    z0 = math.sqrt(1.0 - 1.0 / gamma**2)
    omega = math.sqrt(gamma * (1.0 - gamma**2))
    v0 = -(gamma**2 + 1.0) / (2.0 * g)
    return WellParameters(gamma, z0, omega, v0)


def _twin_gaussians(N: int, gamma: float):
    w = well_parameters(gamma)
    mu = select_mu(gamma, N)
    n = np.arange(N + 1)
    n_minus, n_plus = (N - mu) / 2, (N + mu) / 2
    left = np.exp(-((n_minus - n) ** 2) * w.omega / N)
    right = np.exp(-((n_plus - n) ** 2) * w.omega / N)
    return left, right


def ha_ground_state(N: int, gamma: float) -> SymmetricState:
    """Symmetric twin Gaussian centred on n_+- = (N +- mu)/2, normalized on the lattice."""
    left, right = _twin_gaussians(N, gamma)
    return SymmetricState.normalized(left + right)


def ha_excited_state(N: int, gamma: float) -> SymmetricState:
    """Antisymmetric partner of :func:`ha_ground_state` (sign: positive at n_-)."""
    left, right = _twin_gaussians(N, gamma)
    return SymmetricState.normalized(left - right)


def ha_normalized_energies(N: int, gamma: float, k: int) -> np.ndarray:
    """Normalized energies of the lowest ``k`` levels, each oscillator level twice.

    E~_j = V(z0) + hbar_eff omega (j + 1/2) with hbar_eff = 2 / (N sqrt|gamma|):
    the kinetic prefactor sqrt(1 - z^2) is frozen at its well value 1/|gamma|.
    """
    w = well_parameters(gamma)
    hbar = 2.0 / (N * math.sqrt(abs(gamma)))
    j = np.arange(k) // 2
    return w.v0 + hbar * w.omega * (j + 0.5)


def ha_energies(N: int, gamma: float, k: int, field: float = 1.0) -> np.ndarray:
    """:func:`ha_normalized_energies` converted to Hamiltonian units."""
    params = ModelParams.from_gamma(N, gamma, field)
    return np.array([raw_energy(e, params) for e in ha_normalized_energies(N, gamma, k)])


def delta_e(i: int, exact: SpectralDecomposition, ha) -> float:
    """|E_i(exact) - E_i(HA)| / |E_i(exact)| in percent; nan when E_i(exact) = 0."""
    e_bh = float(exact.eigenvalues[i])
    if e_bh == 0:
        return math.nan
    return abs((e_bh - float(ha[i])) / e_bh) * 100.0


def fidelity(i: int, exact: SpectralDecomposition, ha_state: SymmetricState) -> float:
    """|<psi_i(exact)|psi(HA)>|^2 in percent."""
    if exact.n_qubits != ha_state.n_qubits:
        raise ValueError("states belong to different N")
    overlap = np.vdot(exact.vectors[:, i], ha_state.amplitudes)
    return float(abs(overlap) ** 2 * 100.0)


def f_gamma(gamma: float) -> float:
    """Extensive slope of the correlator, Q_mu ~ N f(gamma)."""
    if gamma > QPT_GAMMA:
        raise DomainError(f"f(gamma) is defined for gamma <= -1, got {gamma}")
    g = abs(gamma)
    r = math.sqrt(gamma**2 - 1.0)
    return r / g * (2.0 * math.log2(r + g) - 1.0) - 2.0 * math.log2(g)


def q_mu_analytic(N: int, gamma: float) -> float:
    _require_broken_phase(gamma)
    return N * f_gamma(gamma)


def find_bell_onset(bracket: tuple[float, float] = ONSET_BRACKET, xtol: float = 1e-10) -> float:
    """Root of f(gamma): past it the correlator becomes positive for every N."""
    lo, hi = bracket
    if np.sign(f_gamma(lo)) == np.sign(f_gamma(hi)):
        raise DomainError(f"f(gamma) does not change sign on {bracket}")
    return bisect(f_gamma, lo, hi, xtol=xtol)


@lru_cache(maxsize=None)
def bell_onset_gamma() -> float:
    return find_bell_onset()


def q_mu_binomial(N: int, gamma: float) -> float:
    """log2[2^mu C((N+mu)/2, mu)^2 C(N, mu)^-2 omega/(2 pi N)], in log space."""
    w = well_parameters(gamma)
    mu = select_mu(gamma, N)
    n_plus = (N + mu) // 2
    log_val = 2.0 * (log_binom(n_plus, mu) - log_binom(N, mu)) + math.log(w.omega / (2 * math.pi * N))
    return mu + float(log_val) / LN2
