"""Thermal states in the Dicke basis and their Bell correlator.

Boltzmann weights are referenced to the ground state, w_k ~ exp(-beta (E_k - E_0)),
so neither the weights nor the statistical sum underflow.  The density
matrix is never formed: the correlator reads a single band, which is
assembled from the kept eigenvectors on demand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bell import LN2, CorrelatorResult, jplus_moment, log_binom, q_m, select_mu
from .errors import DomainError
from .harmonic import bell_onset_gamma
from .model import ModelParams, build_hamiltonian
from .spectral import SpectralDecomposition, diagonalize, parity_project

CRITICAL_GAP_FRACTION = 0.1
# a level is dropped only if it is this small relative to the total ...
_DROP_LEVEL = 1e-16
# ... and the dropped tail together stays below this
_DROP_TAIL = 1e-15


@dataclass(frozen=True)
class ThermalDensity:
    """rho = sum_k weights[k] |psi_k><psi_k| over the kept levels.

    ``log_partition`` is log Z with Z = sum_n exp(-beta E_n) over all levels;
    ``truncation_weight`` is the normalized Boltzmann weight left out.
    """

    beta: float
    weights: np.ndarray
    vectors: np.ndarray
    log_partition: float
    n_levels_kept: int
    truncation_weight: float

    @property
    def n_qubits(self) -> int:
        return self.vectors.shape[0] - 1

    def band(self, m: int) -> np.ndarray:
        """rho[n, n+m] for n = 0..N-m."""
        V = self.vectors
        dim = V.shape[0]
        return np.einsum("k,nk,nk->n", self.weights, V[: dim - m, :], np.conj(V[m:, :]))

    def element(self, n: int, n_prime: int):
        return np.sum(self.weights * self.vectors[n, :] * np.conj(self.vectors[n_prime, :]))

    def dense(self) -> np.ndarray:
        V = self.vectors
        return (V * self.weights) @ np.conj(V).T

    def trace(self) -> float:
        return float(np.sum(self.weights))


def thermal_density(dec: SpectralDecomposition, beta: float, max_levels: int | None = None) -> ThermalDensity:
    """Boltzmann-weighted mixture of the eigenstates in ``dec``.

    ``beta = inf`` gives the ground-state projector.  ``max_levels`` restricts
    the mixture explicitly (e.g. to a two-level model); without it, levels
    are dropped only when negligible, and a decomposition too short for the
    requested temperature is rejected.
    """
    if not beta >= 0:
        raise DomainError(f"beta must be >= 0, got {beta}")
    exc = np.asarray(dec.excitations, dtype=float)
    K = len(exc)
    dim = dec.n_qubits + 1
    E0 = float(dec.eigenvalues[0])
    if math.isinf(beta):
        weights = np.array([1.0])
        log_z = math.inf if E0 < 0 else (-math.inf if E0 > 0 else math.nan)
        return ThermalDensity(beta, weights, dec.vectors[:, :1].copy(), log_z, 1, 0.0)

    rel = np.exp(-beta * exc)
    # levels absent from dec weigh at most as much as the highest computed one
    missing = (dim - K) * rel[-1]
    total = float(np.sum(rel) + missing)
    log_z = -beta * E0 + math.log(total)

    keep = K if max_levels is None else min(max_levels, K)
    explicit_cut = float(np.sum(rel[keep:]) + missing)
    if max_levels is None and missing > _DROP_TAIL * total:
        raise ValueError(
            f"decomposition holds {K} of {dim} levels, too few for beta={beta}; "
            "diagonalize the full spectrum"
        )
    # drop a negligible high-energy tail (weights decrease with level index)
    tail = np.cumsum(rel[:keep][::-1])[::-1]
    while keep > 1 and rel[keep - 1] < _DROP_LEVEL * total and tail[keep - 1] + explicit_cut <= _DROP_TAIL * total:
        keep -= 1
    dropped = float(np.sum(rel[keep:]) + missing)
    kept = rel[:keep]
    weights = kept / np.sum(kept)
    return ThermalDensity(beta, weights, dec.vectors[:, :keep].copy(), log_z, keep, dropped / total)


def _broken_phase_decomposition(params: ModelParams) -> SpectralDecomposition:
    if not params.gamma < -1:
        raise DomainError(f"Q_mu needs gamma < -1, got {params.gamma}")
    return parity_project(diagonalize(build_hamiltonian(params)))


def thermal_q_mu(
    params: ModelParams,
    beta: float,
    dec: SpectralDecomposition | None = None,
    max_levels: int | None = None,
) -> CorrelatorResult:
    """Q_mu of the thermal state at inverse temperature ``beta`` (units 1/Omega)."""
    if dec is None:
        dec = _broken_phase_decomposition(params)
    elif not params.gamma < -1:
        raise DomainError(f"Q_mu needs gamma < -1, got {params.gamma}")
    N = params.n_qubits
    mu = select_mu(params.gamma, N)
    rho = thermal_density(dec, beta, max_levels=max_levels)
    return q_m(jplus_moment(rho.band(mu), mu, N), mu, N)


def kitten_q_mu(N: int, mu: int, delta1: float, beta: float) -> float:
    """Closed-form Q_mu of the two-level mixture of kitten states.

    With p = e^{-delta1 beta}, the tanh factor is (1 - p)/(1 + p).
    """
    if (N - mu) % 2 or not 0 < mu <= N:
        raise DomainError(f"mu must satisfy 0 < mu <= N and mu = N mod 2 (N={N}, mu={mu})")
    if delta1 < 0 or beta < 0:
        raise DomainError("delta1 and beta must be non-negative")
    x = delta1 * beta / 2.0
    if x == 0:
        return -math.inf
    log_tanh = 0.0 if math.isinf(x) else math.log(math.tanh(x))
    n_plus = (N + mu) // 2
    log_amp = math.log(0.5) + float(log_binom(n_plus, mu) - log_binom(N, mu)) + log_tanh
    return mu + 2.0 * log_amp / LN2


@dataclass(frozen=True)
class CriticalTemperature:
    kT: float
    delta1: float
    reference_gamma: float
    fraction: float

    @property
    def beta(self) -> float:
        return math.inf if self.kT == 0 else 1.0 / self.kT


def first_gap(n_qubits: int, gamma: float, field: float = 1.0) -> float:
    """delta_1 = E_1 - E_0 from a two-level eigensolve."""
    dec = diagonalize(build_hamiltonian(ModelParams.from_gamma(n_qubits, gamma, field)), k=2)
    return float(dec.excitations[1])


def critical_temperature(params: ModelParams, fraction: float = CRITICAL_GAP_FRACTION) -> CriticalTemperature:
    """k_B T* = fraction * delta_1 evaluated at the Bell onset for this N."""
    onset = bell_onset_gamma()
    if not params.gamma < onset:
        raise DomainError(f"Bell correlations need gamma < {onset:.6f}, got {params.gamma}")
    d1 = first_gap(params.n_qubits, onset, params.field)
    return CriticalTemperature(fraction * d1, d1, onset, fraction)


def beta_from_gap_fraction(n_qubits: int, fraction: float, reference_gamma: float, field: float = 1.0) -> float:
    """beta = 1 / (fraction * delta_1(reference_gamma))."""
    if not 0 < fraction <= 1:
        raise DomainError(f"gap fraction must lie in (0, 1], got {fraction}")
    kT = fraction * first_gap(n_qubits, reference_gamma, field)
    return math.inf if kT == 0 else 1.0 / kT
