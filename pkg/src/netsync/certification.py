"""Spectral stability certificates for mismatched oscillator networks.

Every check reduces to the same quantity: for a coupling eigenvalue ``mu``,
``sym(F) - mu * sym(H)`` must be negative definite. A possibly asymmetric
matrix ``M`` is called negative definite here when the largest eigenvalue of
its symmetric part is negative, i.e. ``v^T M v < 0`` for all ``v != 0``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import QuadBound, UncertaintyBound
from .errors import CertificateFailedError, InvalidSizeError, ValidationError
from .graph import GainDiagonal, UndirectedLaplacian, symmetric_eigenvalues

__all__ = [
    "CertificateReport",
    "sym",
    "max_sym_eigenvalue",
    "lambda_star",
    "epsilon_bound",
    "check_open_loop",
    "check_decentralized",
    "check_distributed",
    "mu_threshold",
    "greedy_pin_selection",
]


@dataclass(frozen=True)
class CertificateReport:
    """Outcome of a spectral certificate.

    ``margin`` is the smallest ``-lambda_max(sym(F) - mu * H_s)`` over the
    checked eigenvalues; positive means the condition holds.
    ``binding_eigenvalue`` is the ``mu`` attaining it.
    """

    satisfied: bool
    margin: float
    binding_eigenvalue: float
    lambda_star: Optional[float] = None
    epsilon_bound: Optional[float] = None

    def as_dict(self) -> dict:
        return {
            "satisfied": self.satisfied,
            "margin": self.margin,
            "binding_eigenvalue": self.binding_eigenvalue,
            "lambda_star": self.lambda_star,
            "epsilon_bound": self.epsilon_bound,
        }


def sym(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    return 0.5 * (m + m.T)


def max_sym_eigenvalue(m) -> float:
    """Largest eigenvalue of the symmetric part of ``m``."""
    return float(symmetric_eigenvalues(sym(m))[-1])


def _as_F(F) -> np.ndarray:
    return F.F if isinstance(F, QuadBound) else np.asarray(F, dtype=float)


def _margin(F, H, mus):
    f = sym(_as_F(F))
    hs = sym(H)
    if f.shape != hs.shape:
        raise InvalidSizeError(f"F {f.shape} and H {hs.shape} differ in shape")
    mus = np.asarray(mus, dtype=float).ravel()
    if mus.size == 0:
        raise ValidationError("no eigenvalues to check")
    if not (np.all(np.isfinite(f)) and np.all(np.isfinite(hs)) and np.all(np.isfinite(mus))):
        raise ValidationError("non-finite input to certificate")
    # distinct eigenvalues only; complete graphs repeat one value N-1 times
    uniq = np.unique(mus)
    vals = np.array([-max_sym_eigenvalue(f - mu * hs) for mu in uniq])
    k = int(np.argmin(vals))
    return float(vals[k]), float(uniq[k])


def lambda_star(F, H, nonzero_mu) -> float:
    """Largest ``lam`` with ``F - mu_i * H_s + lam * I`` negative definite for every ``mu_i``.

    A non-positive result means the ultimate-boundedness condition fails.
    """
    return _margin(F, H, nonzero_mu)[0]


def epsilon_bound(n_nodes: int, bound: UncertaintyBound, lam_star: float) -> float:
    """Ultimate bound ``sqrt(N * gamma_c^T Gamma gamma_c) / lambda_star``."""
    if not lam_star > 0:
        raise CertificateFailedError(f"lambda_star = {lam_star:.6g} <= 0; no error bound is certified")
    return math.sqrt(n_nodes * bound.worst_case) / lam_star


def check_open_loop(F, H, L: UndirectedLaplacian, bound: UncertaintyBound) -> CertificateReport:
    """Ultimate-boundedness certificate for the uncontrolled network.

    Uses the ``N - 1`` largest eigenvalues of ``L`` (the zero eigenvalue of a
    connected graph is dropped).
    """
    mus = L.eigenvalues()[1:]
    if mus.size == 0:
        raise InvalidSizeError("need at least two nodes")
    lam, mu = _margin(F, H, mus)
    eps = epsilon_bound(L.n, bound, lam) if lam > 0 else None
    return CertificateReport(lam > 0, lam, mu, lambda_star=lam, epsilon_bound=eps)


def _report(F, H, m) -> CertificateReport:
    margin, mu = _margin(F, H, symmetric_eigenvalues(m))
    return CertificateReport(margin > 0, margin, mu)


def check_decentralized(F, H, L: UndirectedLaplacian, Z: GainDiagonal) -> CertificateReport:
    """Gain condition over all eigenvalues of ``L + Z``."""
    if Z.n != L.n:
        raise InvalidSizeError(f"Z has {Z.n} gains for {L.n} nodes")
    if not np.any(Z.gains > 0):
        warnings.warn("all gains are zero; L + Z is singular", RuntimeWarning, stacklevel=2)
    return _report(F, H, L.entries + Z.matrix)


def check_distributed(F, H, L: UndirectedLaplacian, B: UndirectedLaplacian,
                      Z: GainDiagonal) -> CertificateReport:
    """Gain condition over all eigenvalues of ``L + B + Z``."""
    if not (L.n == B.n == Z.n):
        raise InvalidSizeError(f"size mismatch: L {L.n}, B {B.n}, Z {Z.n}")
    return _report(F, H, L.entries + B.entries + Z.matrix)


def mu_threshold(F, H) -> float:
    """Smallest ``mu`` beyond which ``sym(F) - mu * sym(H)`` is negative definite.

    Equal to the largest generalized eigenvalue of ``(sym(F), sym(H))``;
    for ``H = h * I`` this is ``lambda_max(sym(F)) / h``.
    """
    f = sym(_as_F(F))
    hs = sym(H)
    if f.shape != hs.shape:
        raise InvalidSizeError(f"F {f.shape} and H {hs.shape} differ in shape")
    from .graph import symmetric_eigendecompose

    dec = symmetric_eigendecompose(hs)
    if dec.eigenvalues[0] <= 0:
        raise ValidationError("symmetric part of H is not positive definite")
    q = dec.eigenvectors
    w = (q / np.sqrt(dec.eigenvalues)) @ q.T
    return max_sym_eigenvalue(w @ f @ w)


def greedy_pin_selection(L: UndirectedLaplacian, k: int, gain: float) -> GainDiagonal:
    """Pick ``k`` pinned nodes one at a time, each maximising ``lambda_min(L + Z)``.

    Ties go to the lowest node index. The candidate scan needs O(k * n)
    spectra, so it uses LAPACK eigenvalues rather than the Jacobi solver.
    """
    n = L.n
    if not 1 <= k <= n:
        raise ValidationError(f"pin count must be in [1, {n}], got {k}")
    if not gain > 0:
        raise ValidationError("pin gain must be positive")
    base = L.entries
    gains = np.zeros(n)
    for _ in range(k):
        best, best_val = -1, -np.inf
        for node in np.flatnonzero(gains == 0):
            trial = gains.copy()
            trial[node] = gain
            val = np.linalg.eigvalsh(base + np.diag(trial))[0]
            # strict improvement beyond roundoff keeps the lowest index on ties
            if best < 0 or val > best_val + 1e-12 * max(1.0, abs(best_val)):
                best, best_val = node, val
        gains[best] = gain
    return GainDiagonal(gains)
