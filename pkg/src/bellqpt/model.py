"""Fully-connected Ising chain and its two-mode Bose-Hubbard form.

The chain

    H = -Omega * sum_i sigma_x^(i) + U/2 * sum_{i != j} sigma_z^(i) sigma_z^(j)

conserves permutation symmetry, so its low-lying physics lives in the
(N+1)-dimensional Dicke subspace spanned by |N-n, n> (n spins down).  There
the collective Hamiltonian ``-Omega*Jx + U*Jz^2`` is a symmetric tridiagonal
matrix.  The dense constructions here are brute-force oracles for small N.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, SizeError

DENSE_MAX_N = 12
MOMENT_ORACLE_MAX_N = 10


@dataclass(frozen=True)
class ModelParams:
    """Physical configuration: N qubits, field Omega, interaction U.

    ``gamma = U*N/Omega`` is derived; use :meth:`from_gamma` to build from the
    dimensionless coupling instead of U.
    """

    n_qubits: int
    field: float = 1.0
    interaction: float = 0.0

    def __post_init__(self):
        if int(self.n_qubits) != self.n_qubits or self.n_qubits < 1:
            raise DomainError(f"n_qubits must be a positive integer, got {self.n_qubits!r}")
        if not self.field > 0:
            raise DomainError(f"field must be positive, got {self.field!r}")
        object.__setattr__(self, "n_qubits", int(self.n_qubits))
        object.__setattr__(self, "field", float(self.field))
        object.__setattr__(self, "interaction", float(self.interaction))

    @classmethod
    def from_gamma(cls, n_qubits: int, gamma: float, field: float = 1.0) -> "ModelParams":
        return cls(n_qubits, field, gamma * field / n_qubits)

    @property
    def gamma(self) -> float:
        return self.interaction * self.n_qubits / self.field


@dataclass(frozen=True)
class TridiagonalHamiltonian:
    """Symmetric-sector Hamiltonian: ``diag`` (N+1) and ``offdiag`` (N)."""

    diag: np.ndarray
    offdiag: np.ndarray

    @property
    def n_qubits(self) -> int:
        return len(self.diag) - 1

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def apply(self, v: np.ndarray) -> np.ndarray:
        """Matrix-vector product without forming the dense matrix."""
        out = self.diag * v
        out[:-1] += self.offdiag * v[1:]
        out[1:] += self.offdiag * v[:-1]
        return out


@dataclass(frozen=True)
class SymmetricState:
    """State in the Dicke basis, ``amplitudes[n]`` multiplying |N-n, n>."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes)
        if amps.ndim != 1 or amps.size < 2:
            raise ValueError("amplitudes must be a 1-D array of length N+1 >= 2")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state is not normalized: sum |psi_n|^2 = {norm!r}")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, amplitudes) -> "SymmetricState":
        amps = np.asarray(amplitudes)
        if not np.issubdtype(amps.dtype, np.complexfloating):
            amps = amps.astype(float)
        return cls(amps / np.linalg.norm(amps))

    @property
    def n_qubits(self) -> int:
        return len(self.amplitudes) - 1

    def band(self, m: int) -> np.ndarray:
        """Density-matrix band rho[n, n+m] = psi_n conj(psi_{n+m}), n = 0..N-m."""
        psi = self.amplitudes
        return psi[: len(psi) - m] * np.conj(psi[m:])


@dataclass(frozen=True)
class LatticeCoordinate:
    """Normalized population imbalance z_n = 1 - 2n/N on the Dicke lattice."""

    z_values: np.ndarray
    increment: float

    @classmethod
    def for_n(cls, n_qubits: int) -> "LatticeCoordinate":
        n = np.arange(n_qubits + 1)
        return cls(1.0 - 2.0 * n / n_qubits, 2.0 / n_qubits)


def build_hamiltonian(params: ModelParams) -> TridiagonalHamiltonian:
    """Project ``-Omega*Jx + U*Jz^2`` onto the Dicke basis (no large-N approximation)."""
    N = params.n_qubits
    n = np.arange(N + 1, dtype=float)
    diag = params.interaction / 4.0 * (N - 2.0 * n) ** 2
    k = n[:-1]
    offdiag = -params.field / 2.0 * np.sqrt((N - k) * (k + 1.0))
    return TridiagonalHamiltonian(diag, offdiag)


_SX = np.array([[0.0, 1.0], [1.0, 0.0]])
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]])
# basis order |up>, |down>; sigma_+ maps down -> up
_SP = np.array([[0.0, 1.0], [0.0, 0.0]])


def _site_operator(op: np.ndarray, site: int, N: int) -> np.ndarray:
    mats = [np.eye(2)] * N
    mats[site] = op
    return reduce(np.kron, mats)


def _check_dense_size(N: int, max_n: int) -> None:
    if N > max_n:
        raise SizeError(f"dense 2^N construction limited to N <= {max_n}, got N={N}")


def build_dense_ising(params: ModelParams, max_n: int = DENSE_MAX_N) -> np.ndarray:
    """Full 2^N matrix of the distinguishable-qubit chain in the sigma_z product basis.

    Bit k of a basis index (most significant first) is 1 when spin k is down.
    ``sum_{i != j}`` runs over ordered pairs.
    """
    N = params.n_qubits
    _check_dense_size(N, max_n)
    dim = 2**N
    idx = np.arange(dim)
    # sigma_z eigenvalues per site as a (N, dim) table
    bits = (idx[None, :] >> (N - 1 - np.arange(N))[:, None]) & 1
    sz = 1 - 2 * bits
    total = sz.sum(axis=0)
    zz_ordered = total**2 - N
    H = np.diag(params.interaction / 2.0 * zz_ordered.astype(float))
    for k in range(N):
        H -= params.field * _site_operator(_SX, k, N)
    return H


def dicke_isometry(N: int, max_n: int = DENSE_MAX_N) -> np.ndarray:
    """Columns are the normalized Dicke states |N-n, n> embedded in 2^N."""
    _check_dense_size(N, max_n)
    dim = 2**N
    popcount = np.array([bin(i).count("1") for i in range(dim)])
    P = np.zeros((dim, N + 1))
    for n in range(N + 1):
        mask = popcount == n
        P[mask, n] = 1.0 / np.sqrt(mask.sum())
    return P


@dataclass(frozen=True)
class AffineMapReport:
    """Fit of the symmetric-sector Ising spectrum against a * (tridiagonal spectrum) + b."""

    a: float
    b: float
    residual: float
    expected_a: float
    expected_b: float


def symmetric_sector_oracle(params: ModelParams, max_n: int = DENSE_MAX_N) -> AffineMapReport:
    """Measure the affine relation between the dense chain and the tridiagonal form.

    The operator identities sum_i sigma_x = 2 Jx and
    sum_{i != j} sigma_z sigma_z = 4 Jz^2 - N predict a = 2 and b = -U N / 2.
    """
    N = params.n_qubits
    P = dicke_isometry(N, max_n)
    H_sym = P.T @ build_dense_ising(params, max_n) @ P
    ising = np.linalg.eigvalsh(H_sym)
    bh = np.linalg.eigvalsh(build_hamiltonian(params).dense())
    A = np.column_stack([bh, np.ones_like(bh)])
    (a, b), *_ = np.linalg.lstsq(A, ising, rcond=None)
    residual = float(np.max(np.abs(a * bh + b - ising)))
    return AffineMapReport(float(a), float(b), residual, 2.0, -params.interaction * N / 2.0)


def dense_collective_raising(N: int, max_n: int = MOMENT_ORACLE_MAX_N) -> np.ndarray:
    """J_+ = sum_k sigma_+^(k) as a dense 2^N matrix."""
    _check_dense_size(N, max_n)
    return sum(_site_operator(_SP, k, N) for k in range(N))


def dense_moment_oracle(state: SymmetricState, m: int, max_n: int = MOMENT_ORACLE_MAX_N) -> complex:
    """<J_+^m> by embedding the state in 2^N and applying J_+ m times."""
    N = state.n_qubits
    _check_dense_size(N, max_n)
    psi = dicke_isometry(N, max_n) @ state.amplitudes
    jp = dense_collective_raising(N, max_n)
    phi = psi.astype(complex)
    for _ in range(m):
        phi = jp @ phi
    return complex(np.vdot(psi, phi))


# -- reference states ---------------------------------------------------------


def ghz_state(N: int) -> SymmetricState:
    """(|N,0> + |0,N>)/sqrt(2)."""
    psi = np.zeros(N + 1)
    psi[0] = psi[N] = 1.0 / np.sqrt(2.0)
    return SymmetricState(psi)


def dicke_state(N: int, n: int) -> SymmetricState:
    psi = np.zeros(N + 1)
    psi[n] = 1.0
    return SymmetricState(psi)


def coherent_state(N: int, theta: float, phi: float = 0.0) -> SymmetricState:
    """Product state with every spin along (theta, phi) on the Bloch sphere.

    theta = 0 is all spins up (n = 0); theta = pi/2, phi = 0 is all along +x.
    """
    n = np.arange(N + 1)
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    log_binom = 0.5 * (gammaln(N + 1) - gammaln(n + 1) - gammaln(N - n + 1))
    with np.errstate(divide="ignore", invalid="ignore"):
        up = np.where(n == N, 0.0, (N - n) * np.log(abs(c)))
        down = np.where(n == 0, 0.0, n * np.log(abs(s)))
    log_mag = log_binom + up + down
    sign = np.sign(c) ** (N - n) * np.sign(s) ** n
    amps = sign * np.exp(log_mag)
    if phi != 0.0:
        amps = amps * np.exp(1j * phi * n)
    return SymmetricState.normalized(amps)
