"""Undirected weighted graphs, gain diagonals and their spectra.

All matrices are dense numpy arrays. The plant coupling ``L``, the
controller graph ``B`` and the estimator communication graph ``C`` are all
represented as :class:`UndirectedLaplacian`.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidSizeError, SymmetryError, ValidationError

logger = logging.getLogger(__name__)

__all__ = [
    "UndirectedLaplacian",
    "GainDiagonal",
    "SpectralDecomposition",
    "build_complete_R",
    "build_path_laplacian",
    "zero_laplacian",
    "laplacian_from_adjacency",
    "random_laplacian",
    "symmetric_eigendecompose",
    "symmetric_eigenvalues",
    "is_connected",
    "check_commutation",
]

ROW_SUM_RTOL = 1e-12
PSD_TOL = 1e-9
SYMMETRY_RTOL = 1e-12
CONNECTIVITY_RTOL = 1e-9

JACOBI_RTOL = 1e-12
JACOBI_MAX_SWEEPS = 100


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class UndirectedLaplacian:
    """Symmetric, zero-row-sum, positive semidefinite coupling matrix."""

    entries: np.ndarray

    def __post_init__(self):
        m = _frozen(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise InvalidSizeError(f"Laplacian must be a non-empty square matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValidationError("Laplacian has non-finite entries")
        if not np.array_equal(m, m.T):
            raise SymmetryError("Laplacian is not symmetric")
        scale = np.max(np.abs(m)) if m.size else 0.0
        row_sums = np.abs(m.sum(axis=1))
        if np.any(row_sums > ROW_SUM_RTOL * scale):
            bad = int(np.argmax(row_sums))
            raise ValidationError(f"Laplacian row {bad} sums to {m[bad].sum():.3e}, expected 0")
        off = m - np.diag(np.diag(m))
        if np.any(off > 0):
            # positive off-diagonal means a negative coupling weight a_ij
            warnings.warn("Laplacian has negative coupling weights", RuntimeWarning, stacklevel=3)
        lam_min = symmetric_eigenvalues(m)[0]
        if lam_min < -PSD_TOL * max(1.0, scale):
            raise ValidationError(f"Laplacian is not positive semidefinite (min eigenvalue {lam_min:.3e})")
        object.__setattr__(self, "entries", m)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    def __add__(self, other):
        if isinstance(other, UndirectedLaplacian):
            return UndirectedLaplacian(self.entries + other.entries)
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, UndirectedLaplacian):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.entries.tobytes())

    def eigenvalues(self) -> np.ndarray:
        return symmetric_eigenvalues(self.entries)


@dataclass(frozen=True, eq=False)
class GainDiagonal:
    """Nonnegative per-node feedback gains, used as ``diag(gains)``."""

    gains: np.ndarray

    def __post_init__(self):
        g = _frozen(self.gains)
        if g.ndim != 1:
            raise ValidationError("gains must be a vector")
        if not np.all(np.isfinite(g)):
            raise ValidationError("gains must be finite")
        if np.any(g < 0):
            raise ValidationError("gains must be nonnegative")
        object.__setattr__(self, "gains", g)

    @classmethod
    def from_pins(cls, n: int, pins, gain: float = 1.0) -> "GainDiagonal":
        """Gain ``gain`` on the 0-based node indices in ``pins``, zero elsewhere."""
        g = np.zeros(n)
        pins = list(pins)
        if any(p < 0 or p >= n for p in pins):
            raise ValidationError(f"pin index out of range for n={n}: {pins}")
        g[pins] = gain
        return cls(g)

    @property
    def n(self) -> int:
        return self.gains.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.gains)

    @property
    def pinned(self) -> np.ndarray:
        return np.flatnonzero(self.gains > 0)

    def __eq__(self, other):
        if not isinstance(other, GainDiagonal):
            return NotImplemented
        return np.array_equal(self.gains, other.gains)

    def __hash__(self):
        return hash(self.gains.tobytes())


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenvalues (ascending) and orthonormal eigenvectors stored as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        q = self.eigenvectors
        return (q * self.eigenvalues) @ q.T


def build_complete_R(n: int) -> UndirectedLaplacian:
    """Laplacian of the complete graph: ``n - 1`` on the diagonal, ``-1`` elsewhere."""
    if n < 2:
        raise InvalidSizeError(f"complete graph needs n >= 2, got {n}")
    return UndirectedLaplacian(n * np.eye(n) - np.ones((n, n)))


def build_path_laplacian(n: int) -> UndirectedLaplacian:
    if n < 2:
        raise InvalidSizeError(f"path graph needs n >= 2, got {n}")
    m = 2.0 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
    m[0, 0] = m[-1, -1] = 1.0
    return UndirectedLaplacian(m)


def zero_laplacian(n: int) -> UndirectedLaplacian:
    if n < 1:
        raise InvalidSizeError(f"need n >= 1, got {n}")
    return UndirectedLaplacian(np.zeros((n, n)))


def laplacian_from_adjacency(adjacency) -> UndirectedLaplacian:
    """``L = D - A`` for a symmetric weight matrix ``A`` (diagonal ignored)."""
    a = np.array(adjacency, dtype=float)
    a = a - np.diag(np.diag(a))
    return UndirectedLaplacian(np.diag(a.sum(axis=1)) - a)


def random_laplacian(n: int, rng: np.random.Generator, density: float = 0.5,
                     max_weight: float = 1.0, connected: bool = True) -> UndirectedLaplacian:
    """Random weighted undirected Laplacian.

    Edges are kept with probability ``density`` and weighted uniformly in
    ``(0, max_weight]``. With ``connected=True`` the edges of a random
    spanning path are forced in, so the graph is always connected.
    """
    w = rng.uniform(0.0, max_weight, size=(n, n))
    w = np.where(w == 0.0, max_weight, w)
    keep = rng.random((n, n)) < density
    a = np.triu(np.where(keep, w, 0.0), k=1)
    if connected and n > 1:
        order = rng.permutation(n)
        for u, v in zip(order[:-1], order[1:]):
            i, j = min(u, v), max(u, v)
            if a[i, j] == 0.0:
                a[i, j] = rng.uniform(0.5, 1.0) * max_weight
    a = a + a.T
    return laplacian_from_adjacency(a)


@lru_cache(maxsize=64)
def _round_robin_schedule(n: int):
    """Partition all index pairs of ``range(n)`` into rounds of disjoint pairs.

    Standard round-robin tournament ordering; each sweep visits every pair once.
    """
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for k in range(m // 2):
            a, b = players[k], players[m - 1 - k]
            if a < n and b < n:
                ps.append(min(a, b))
                qs.append(max(a, b))
        if ps:
            rounds.append((np.array(ps), np.array(qs)))
        players = [players[0], players[-1]] + players[1:-1]
    return tuple(rounds)


def _jacobi(a: np.ndarray, want_vectors: bool):
    n = a.shape[0]
    a = a.copy()
    v = np.eye(n) if want_vectors else None
    norm = np.linalg.norm(a)
    if n == 1 or norm == 0.0:
        return np.diag(a).copy(), v
    target = JACOBI_RTOL * norm
    schedule = _round_robin_schedule(n)
    for _ in range(JACOBI_MAX_SWEEPS):
        if np.linalg.norm(a - np.diag(np.diag(a))) <= target:
            break
        for p, q in schedule:
            apq = a[p, q]
            active = apq != 0.0
            if not np.any(active):
                continue
            app, aqq = a[p, p], a[q, q]
            safe = np.where(active, apq, 1.0)
            with np.errstate(over="ignore"):
                tau = (aqq - app) / (2.0 * safe)
                t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
            t = np.where(active, t, 0.0)
            c = 1.0 / np.hypot(1.0, t)
            s = t * c
            rp, rq = a[p, :].copy(), a[q, :].copy()
            a[p, :] = c[:, None] * rp - s[:, None] * rq
            a[q, :] = s[:, None] * rp + c[:, None] * rq
            cp, cq = a[:, p].copy(), a[:, q].copy()
            a[:, p] = cp * c - cq * s
            a[:, q] = cp * s + cq * c
            a[p, q] = a[q, p] = 0.0
            if want_vectors:
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = vp * c - vq * s
                v[:, q] = vp * s + vq * c
    else:
        logger.warning("Jacobi eigensolver hit %d sweeps without converging", JACOBI_MAX_SWEEPS)
    return np.diag(a).copy(), v


def _check_symmetric(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidSizeError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix has non-finite entries")
    scale = np.linalg.norm(m)
    if np.linalg.norm(m - m.T) > SYMMETRY_RTOL * scale:
        raise SymmetryError("matrix is not symmetric")
    return 0.5 * (m + m.T)


def symmetric_eigendecompose(m) -> SpectralDecomposition:
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Rotations are applied in round-robin order, one round of disjoint pairs
    at a time, until the off-diagonal Frobenius norm falls below
    ``1e-12 * ||m||_F``.

    Raises:
        SymmetryError: if ``m`` is not symmetric to 1e-12 relative tolerance.
    """
    m = _check_symmetric(m)
    lam, vec = _jacobi(m, want_vectors=True)
    order = np.argsort(lam, kind="stable")
    return SpectralDecomposition(_frozen(lam[order]), _frozen(vec[:, order]))


def symmetric_eigenvalues(m) -> np.ndarray:
    """Ascending eigenvalues only; same algorithm as :func:`symmetric_eigendecompose`."""
    m = _check_symmetric(m)
    lam, _ = _jacobi(m, want_vectors=False)
    return np.sort(lam)


def is_connected(laplacian: UndirectedLaplacian) -> bool:
    """True iff the Fiedler value is positive (relative tolerance 1e-9)."""
    if laplacian.n == 1:
        return True
    lam = laplacian.eigenvalues()
    return bool(lam[1] > CONNECTIVITY_RTOL * max(1.0, lam[-1]))


def check_commutation(p, n: int) -> bool:
    """Check ``R_n P = P R_n = n P`` for a symmetric Laplacian ``P``."""
    p = np.asarray(p, dtype=float)
    if p.shape != (n, n):
        raise InvalidSizeError(f"expected a {n}x{n} matrix, got {p.shape}")
    r = n * np.eye(n) - np.ones((n, n))
    tol = 1e-9 * np.linalg.norm(p)
    left = np.linalg.norm(r @ p - n * p)
    right = np.linalg.norm(p @ r - n * p)
    return bool(left <= tol and right <= tol)
