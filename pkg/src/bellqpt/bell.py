"""Many-body Bell correlator of symmetric N-qubit states.

For a state in the Dicke basis the m-th moment of the collective raising
operator is a weighted sum over the m-th band of the density matrix,

    <J_+^m> = sum_n conj(rho[n, n+m]) * j(n+m, m),
    j(n, m) = m! * sqrt(C(n, m) * C(N-n+m, m)),

and the correlator

    Q_m = m + 2 log2 |<J_+^m>| - 2 log2(N! / (N-m)!)

obeys Q_m <= 0 for every local-hidden-variable model.  For N in the
hundreds both j and N!/(N-m)! overflow doubles by thousands of orders of
magnitude, so everything is kept as natural logs until the final
conversion to bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Protocol, Sequence, Union

import numpy as np
from scipy.special import gammaln

from .errors import DomainError

LN2 = math.log(2.0)


@dataclass(frozen=True)
class SignedLogValue:
    """A number stored as ``sign * exp(log_magnitude)``.

    ``sign`` is -1, 0 or +1 for real data; for complex data it is the unit
    phase of the value.  Zero is ``sign == 0`` with ``log_magnitude = -inf``.
    """

    sign: Union[float, complex]
    log_magnitude: float

    def __post_init__(self):
        if (self.sign == 0) != (self.log_magnitude == -math.inf):
            raise ValueError("sign == 0 must go with log_magnitude == -inf")

    @classmethod
    def zero(cls) -> "SignedLogValue":
        return cls(0, -math.inf)

    @classmethod
    def from_value(cls, x) -> "SignedLogValue":
        if x == 0:
            return cls.zero()
        if isinstance(x, complex) or np.iscomplexobj(x):
            return cls(complex(x / abs(x)), math.log(abs(x)))
        return cls(math.copysign(1.0, x), math.log(abs(x)))

    @property
    def log2_magnitude(self) -> float:
        return self.log_magnitude / LN2

    def value(self):
        """Plain float/complex (overflows to inf for huge magnitudes)."""
        if self.sign == 0:
            return 0.0
        with np.errstate(over="ignore"):
            return self.sign * np.exp(self.log_magnitude)


@dataclass(frozen=True)
class CorrelatorResult:
    m: int
    moment: SignedLogValue
    q: float
    bound_violated: bool


def log_factorial(n):
    return gammaln(np.asarray(n, dtype=float) + 1.0)


def log_binom(n, k):
    return log_factorial(n) - log_factorial(k) - log_factorial(np.asarray(n) - np.asarray(k))


def log_falling_factorial(N: int, m: int) -> float:
    """log(N! / (N-m)!)."""
    return float(log_factorial(N) - log_factorial(N - m))


def log_j(n, m: int, N: int):
    """Natural log of j(n, m) = m! sqrt(C(n, m) C(N-n+m, m)); vectorized in ``n``."""
    n_arr = np.asarray(n)
    if m < 0 or np.any(n_arr < m) or np.any(n_arr > N):
        raise DomainError(f"log_j needs 0 <= m <= n <= N, got n={n!r}, m={m}, N={N}")
    out = log_factorial(m) + 0.5 * (log_binom(n_arr, m) + log_binom(N - n_arr + m, m))
    return float(out) if np.ndim(out) == 0 else out


def signed_log_sum(coeffs, log_weights) -> SignedLogValue:
    """sum_n coeffs[n] * exp(log_weights[n]) without overflow.

    Terms are shifted by the largest log-magnitude before summation; an exact
    cancellation returns :meth:`SignedLogValue.zero`.
    """
    c = np.asarray(coeffs)
    lw = np.asarray(log_weights, dtype=float)
    mag = np.abs(c)
    nz = mag > 0
    if not np.any(nz):
        return SignedLogValue.zero()
    c, lw, mag = c[nz], lw[nz], mag[nz]
    logs = np.log(mag) + lw
    shift = float(np.max(logs))
    # angle() rather than c/|c|: the quotient loses the phase for subnormal c
    phase = np.exp(1j * np.angle(c)) if np.iscomplexobj(c) else np.sign(c)
    total = np.sum(phase * np.exp(logs - shift))
    if total == 0:
        return SignedLogValue.zero()
    if np.iscomplexobj(total):
        return SignedLogValue(complex(total / abs(total)), shift + math.log(abs(total)))
    return SignedLogValue(math.copysign(1.0, float(total)), shift + math.log(abs(float(total))))


BandAccessor = Union[Sequence, np.ndarray, Callable[[int], complex]]


def jplus_moment(rho_band: BandAccessor, m: int, N: int) -> SignedLogValue:
    """<J_+^m> from the band rho[n, n+m], n = 0..N-m (array or callable)."""
    if not 0 <= m <= N:
        raise DomainError(f"moment order must lie in 0..N={N}, got {m}")
    count = N - m + 1
    if callable(rho_band):
        band = np.array([rho_band(n) for n in range(count)])
    else:
        band = np.asarray(rho_band)
    if band.shape != (count,):
        raise ValueError(f"band of order {m} for N={N} must have {count} entries, got {band.shape}")
    lj = log_j(np.arange(m, N + 1), m, N)
    return signed_log_sum(np.conj(band), lj)


def q_m(moment: SignedLogValue, m: int, N: int) -> CorrelatorResult:
    """Normalized correlator in bits; a vanishing moment gives q = -inf."""
    if not 1 <= m <= N:
        raise DomainError(f"correlator order must lie in 1..N={N}, got {m}")
    if moment.sign == 0:
        return CorrelatorResult(m, moment, -math.inf, False)
    q = m + 2.0 * (moment.log_magnitude - log_falling_factorial(N, m)) / LN2
    return CorrelatorResult(m, moment, q, q > 0)


def select_mu(gamma: float, N: int) -> int:
    """Correlation order matched to the twin-peak separation, mu >= N z0, mu = N mod 2.

    A relative slack of 1e-12 keeps exactly-integral N*z0 (e.g. gamma = -1.25,
    N = 100) from being bumped by rounding noise.
    """
    if not gamma < -1:
        raise DomainError(f"correlation order defined only past the critical point (gamma < -1), got {gamma}")
    z0 = math.sqrt(1.0 - 1.0 / gamma**2)
    target = N * z0
    mu = math.ceil(target - 1e-12 * max(1.0, target))
    if (mu - N) % 2:
        mu += 1
    return min(mu, N)


def _peak_indices(mu: int, N: int) -> tuple[int, int]:
    if (N + mu) % 2 or not 0 <= mu <= N:
        raise DomainError(f"n_+- = (N +- mu)/2 must be integers in 0..N (N={N}, mu={mu})")
    return (N - mu) // 2, (N + mu) // 2


def q_mu_peak(rho_element, mu: int, N: int) -> float:
    """Correlator from the single band element linking n_- and n_+.

    The weight j(n_+, mu) equals mu! * C((N+mu)/2, mu).
    """
    _, n_plus = _peak_indices(mu, N)
    mag = abs(rho_element)
    if mag == 0:
        return -math.inf
    lj = log_j(n_plus, mu, N)
    return mu + 2.0 * (math.log(mag) + lj - log_falling_factorial(N, mu)) / LN2


def depth_bound(q_mu: float, mu: int) -> int:
    """k_max = floor(mu - 2 - Q_mu).

    Read together with the bracket mu-2-(k+1) < Q_mu <= mu-2-k; at most
    ``k_max - 2`` qubits are then left without Bell correlation.
    """
    if not math.isfinite(q_mu):
        raise DomainError(f"depth needs a finite correlator, got {q_mu}")
    k = math.floor(mu - 2 - q_mu)
    # the subtraction may round across an integer; enforce the bracket itself
    if q_mu > mu - 2 - k:
        k -= 1
    elif q_mu <= mu - 2 - (k + 1):
        k += 1
    return k


class _HasBand(Protocol):
    n_qubits: int

    def band(self, m: int) -> np.ndarray: ...


def bell_scan(source: _HasBand, m_range: Iterable[int]) -> list[CorrelatorResult]:
    """q_m for every order in ``m_range`` (ordered by m) for a pure or thermal state."""
    N = source.n_qubits
    return [q_m(jplus_moment(source.band(m), m, N), m, N) for m in sorted(m_range)]
