"""Deterministic eigensolver for the symmetric-sector Hamiltonian.

The Hamiltonian commutes with the reflection n -> N-n, so it splits into an
even and an odd tridiagonal block.  Each block is diagonalized with LAPACK
(via :func:`scipy.linalg.eigh_tridiagonal`) and the eigenvectors are mapped
back, which makes every returned eigenvector an exact parity eigenstate no
matter how close the two members of a tunneling doublet are.

The k-th eigenvector of an unreduced tridiagonal matrix with negative
off-diagonal has k sign changes, hence parity (-1)^k: the merged spectrum
simply interleaves the blocks, even first.

Past the critical point the doublet splitting drops far below the float
spacing of the energies.  It is recovered from a half-chain Wronskian
identity,

    E_odd - E_even = -(coupling across the centre) * x_c * y_c / <x|y>_half,

with the tiny centre amplitudes recomputed by a stable ratio recursion
through the classically forbidden region (see :func:`_polish_tails`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .errors import ConvergenceError
from .model import ModelParams, SymmetricState, TridiagonalHamiltonian

RESIDUAL_TOL = 1e-10
# amplitudes below this fraction of the peak are recomputed by recursion
_POLISH_FRACTION = 1e-3
# a block pair counts as a tunneling doublet when the even/odd half-chain
# overlap exceeds this (it tends to 1 for a deep doublet)
_DOUBLET_OVERLAP = 0.5


@dataclass(frozen=True)
class SpectralDecomposition:
    """Lowest eigenpairs of a symmetric-sector Hamiltonian.

    ``vectors[:, k]`` belongs to ``eigenvalues[k]``.  ``parity[k]`` is +1 for
    psi_n = psi_{N-n}, -1 for psi_n = -psi_{N-n} and 0 when undetermined.
    ``excitations[k] = E_k - E_0`` carries tunneling splittings that are too
    small to survive the subtraction of two eigenvalues.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray
    parity: np.ndarray
    excitations: np.ndarray
    n_converged: int

    @classmethod
    def from_arrays(cls, eigenvalues, vectors) -> "SpectralDecomposition":
        """Wrap raw eigenpairs (e.g. from a dense solver); parity is measured."""
        eigenvalues = np.asarray(eigenvalues, dtype=float)
        vectors = np.asarray(vectors)
        order = np.argsort(eigenvalues, kind="stable")
        eigenvalues, vectors = eigenvalues[order], vectors[:, order]
        vectors = np.column_stack([_fix_phase(v) for v in vectors.T])
        return cls(
            eigenvalues,
            vectors,
            _measure_parity(vectors),
            eigenvalues - eigenvalues[0],
            len(eigenvalues),
        )

    @property
    def n_qubits(self) -> int:
        return self.vectors.shape[0] - 1

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def state(self, k: int) -> SymmetricState:
        return SymmetricState(self.vectors[:, k])

    @property
    def eigenvectors(self) -> list[SymmetricState]:
        return [self.state(k) for k in range(len(self))]


@dataclass(frozen=True)
class GapTable:
    """Energy gaps delta_i = E_i - E_0 for i = 1..k."""

    deltas: np.ndarray

    def __getitem__(self, i: int) -> float:
        """1-based access, ``table[1]`` is delta_1."""
        if i < 1 or i > len(self.deltas):
            raise IndexError(f"gap index {i} outside 1..{len(self.deltas)}")
        return float(self.deltas[i - 1])


def _fix_phase(v: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(v)))
    return -v if v[i].real < 0 else v


def _measure_parity(vectors: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    overlap = np.real(np.einsum("nk,nk->k", np.conj(vectors), vectors[::-1, :]))
    parity = np.zeros(vectors.shape[1], dtype=int)
    parity[overlap > 1 - tol] = 1
    parity[overlap < -1 + tol] = -1
    return parity


def parity_blocks(h: TridiagonalHamiltonian):
    """Even and odd blocks as ((diag, offdiag), (diag, offdiag)).

    Block bases are (|n> +- |N-n>)/sqrt(2) for n < N/2, plus the centre |N/2>
    in the even block when N is even.  The odd block is empty for N = 0.
    """
    d, o = h.diag, h.offdiag
    N = h.n_qubits
    if N % 2 == 1:
        M = (N + 1) // 2
        de, do = d[:M].copy(), d[:M].copy()
        de[-1] += o[M - 1]
        do[-1] -= o[M - 1]
        return (de, o[: M - 1].copy()), (do, o[: M - 1].copy())
    M = N // 2
    de = d[: M + 1].copy()
    oe = o[:M].copy()
    if M > 0:
        oe[-1] *= math.sqrt(2.0)
    return (de, oe), (d[:M].copy(), o[: M - 1].copy())


def _polish_tails(d, e, lam, v):
    """Recompute the exponentially small ends of an eigenvector.

    Inside a classically forbidden end region the wanted solution grows
    towards the interior, so the ratio recursion run from the end inwards is
    stable, unlike LAPACK's absolute-accuracy components there.  Returns the
    polished vector and log|v| at both ends (finite even if v underflows).
    """
    v = v.copy()
    log_left = _polish_left(d, e, lam, v)
    log_right = _polish_left(d[::-1], e[::-1], lam, v[::-1])  # reversed view writes through
    return v, log_left, log_right


def _polish_left(d, e, lam, v):
    """In-place polish of the n = 0 end; returns log|v[0]|."""
    size = len(v)
    thr = _POLISH_FRACTION * np.max(np.abs(v))
    if size == 1 or abs(v[0]) >= thr:
        return math.log(abs(v[0])) if v[0] != 0 else -math.inf
    log_r = []
    prev = None
    q = 0
    while q < size - 1 and abs(v[q]) < thr:
        left = 0.0 if prev is None else e[q - 1] / prev
        r = -((d[q] - lam) + left) / e[q]
        if not r > 1.0:
            break
        log_r.append(math.log(r))
        prev = r
        q += 1
    if q == 0:
        return math.log(abs(v[0])) if v[0] != 0 else -math.inf
    # v[n] = v[q] / prod_{j=n}^{q-1} r_j
    suffix = np.cumsum(np.asarray(log_r)[::-1])[::-1]
    anchor = v[q]
    log_vals = math.log(abs(anchor)) - suffix
    v[:q] = math.copysign(1.0, anchor) * np.exp(log_vals)
    return float(log_vals[0])


def _solve_block(d, e, count, full):
    if count == 0:
        return np.empty(0), np.empty((len(d), 0))
    if len(d) == 1:
        return d.astype(float).copy(), np.ones((1, 1))
    try:
        if full:
            w, V = eigh_tridiagonal(d, e)
        else:
            w, V = eigh_tridiagonal(d, e, select="i", select_range=(0, count - 1))
    except LinAlgError as exc:
        raise ConvergenceError(f"tridiagonal eigensolver failed: {exc}") from exc
    return w, V


def _doublet_splitting(N, o, xe, ye, log_xc, log_yc):
    """Signed E_odd - E_even of an (even, odd) pair from the Wronskian, or None."""
    if N % 2 == 1:
        coupling = -2.0 * o[(N - 1) // 2]
        x_half, y_half = xe, ye
        sign = np.sign(xe[-1]) * np.sign(ye[-1])
    else:
        M = N // 2
        coupling = -math.sqrt(2.0) * o[M - 1]
        x_half, y_half = xe[:M], ye
        sign = np.sign(xe[M]) * np.sign(ye[M - 1])
    overlap = float(np.dot(x_half, y_half))
    if abs(overlap) < _DOUBLET_OVERLAP or not (math.isfinite(log_xc) and math.isfinite(log_yc)):
        return None
    log_mag = math.log(abs(coupling)) + log_xc + log_yc - math.log(abs(overlap))
    return float(sign * math.copysign(1.0, coupling) * np.sign(overlap) * math.exp(log_mag))


def diagonalize(h: TridiagonalHamiltonian, k: int | None = None) -> SpectralDecomposition:
    """Lowest ``k`` eigenpairs (all when ``k`` is None), ascending.

    Raises :class:`ConvergenceError` if LAPACK fails or any returned pair
    misses the residual bound ``|Hv - lam v| <= 1e-10 max(1, |lam|)``.
    """
    N = h.n_qubits
    dim = N + 1
    if k is None:
        k = dim
    if not 1 <= k <= dim:
        raise ValueError(f"k must lie in 1..{dim}, got {k}")
    full = k == dim
    (de, oe), (do, oo) = parity_blocks(h)
    n_even, n_odd = (k + 1) // 2, k // 2
    we, Ve = _solve_block(de, oe, n_even, full)
    wo, Vo = _solve_block(do, oo, n_odd, full)
    we, Ve = we[:n_even], Ve[:, :n_even]
    wo, Vo = wo[:n_odd], Vo[:, :n_odd]

    even_vecs, even_logs = [], []
    for i in range(n_even):
        x, _, log_c = _polish_tails(de, oe, we[i], Ve[:, i])
        nrm = np.linalg.norm(x)
        even_vecs.append(x / nrm)
        even_logs.append(log_c - math.log(nrm))
    odd_vecs, odd_logs = [], []
    for i in range(n_odd):
        y, _, log_c = _polish_tails(do, oo, wo[i], Vo[:, i])
        nrm = np.linalg.norm(y)
        odd_vecs.append(y / nrm)
        odd_logs.append(log_c - math.log(nrm))

    raw = np.empty(k)
    raw[0::2] = we
    raw[1::2] = wo
    vectors = np.empty((dim, k))
    parity = np.empty(k, dtype=int)
    s = 1.0 / math.sqrt(2.0)
    M = dim // 2
    for i, x in enumerate(even_vecs):
        col = np.empty(dim)
        col[:M] = x[:M] * s
        col[dim - M:] = (x[:M] * s)[::-1]
        if dim % 2 == 1:
            col[M] = x[M]
        vectors[:, 2 * i] = _fix_phase(col)
        parity[2 * i] = 1
    for i, y in enumerate(odd_vecs):
        col = np.zeros(dim)
        col[:M] = y * s
        col[dim - M:] = -(y * s)[::-1]
        vectors[:, 2 * i + 1] = _fix_phase(col)
        parity[2 * i + 1] = -1

    # float noise can invert a doublet whose splitting is below resolution
    eigenvalues = np.maximum.accumulate(raw)
    excitations = eigenvalues - eigenvalues[0]
    scale = max(1.0, float(np.max(np.abs(raw))))
    for i in range(n_odd):
        float_gap = raw[2 * i + 1] - raw[2 * i]
        if abs(float_gap) > 1e-3 * scale:
            continue
        split = _doublet_splitting(N, h.offdiag, even_vecs[i], odd_vecs[i], even_logs[i], odd_logs[i])
        if split is None or split < 0 or abs(split - float_gap) > 1e-9 * scale:
            continue
        excitations[2 * i + 1] = excitations[2 * i] + split
    excitations = np.maximum.accumulate(excitations)
    excitations[0] = 0.0

    for i in range(k):
        v = vectors[:, i]
        res = np.linalg.norm(h.apply(v) - eigenvalues[i] * v)
        if not res <= RESIDUAL_TOL * max(1.0, abs(eigenvalues[i])):
            raise ConvergenceError(
                f"eigenpair {i} failed verification: residual {res:.3e}", index=i
            )
    return SpectralDecomposition(eigenvalues, vectors, parity, excitations, k)


def default_degeneracy_tol(dec: SpectralDecomposition) -> float:
    return 1e-9 * max(1.0, abs(float(dec.eigenvalues[0])))


def parity_project(dec: SpectralDecomposition, tol_degeneracy: float | None = None) -> SpectralDecomposition:
    """Recombine near-degenerate eigenvectors into reflection eigenstates.

    Clusters are runs of eigenvalues spaced closer than ``tol_degeneracy``.
    Inside a cluster whose members are not already parity eigenstates, the
    reflection operator is diagonalized in the cluster span; symmetric
    states come first and inherit the lowest eigenvalues of the cluster.
    """
    if tol_degeneracy is None:
        tol_degeneracy = default_degeneracy_tol(dec)
    E = dec.eigenvalues
    V = dec.vectors.copy()
    parity = dec.parity.copy()
    changed = False
    start = 0
    K = len(E)
    while start < K:
        stop = start + 1
        while stop < K and E[stop] - E[stop - 1] < tol_degeneracy:
            stop += 1
        if stop - start > 1 and np.any(parity[start:stop] == 0):
            W = V[:, start:stop]
            R = np.conj(W).T @ W[::-1, :]
            R = 0.5 * (R + np.conj(R).T)
            w, Q = np.linalg.eigh(R)
            Q = Q[:, ::-1]
            W = W @ Q
            for j in range(stop - start):
                V[:, start + j] = _fix_phase(W[:, j])
            parity[start:stop] = _measure_parity(V[:, start:stop])
            changed = True
        start = stop
    if not changed:
        return dec
    return SpectralDecomposition(E.copy(), V, parity, dec.excitations.copy(), dec.n_converged)


def gaps(dec: SpectralDecomposition, k: int) -> GapTable:
    if len(dec) < k + 1:
        raise ValueError(f"need {k + 1} levels for {k} gaps, decomposition has {len(dec)}")
    return GapTable(dec.excitations[1 : k + 1].copy())


def normalized_energy(E: float, params: ModelParams) -> float:
    """E~ = 2E / (Omega N)."""
    return 2.0 * E / (params.field * params.n_qubits)


def raw_energy(E_tilde: float, params: ModelParams) -> float:
    """Inverse of :func:`normalized_energy`."""
    return E_tilde * params.field * params.n_qubits / 2.0
