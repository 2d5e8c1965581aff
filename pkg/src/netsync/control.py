"""Compensation laws: open loop, decentralized adaptive and distributed adaptive.

Per-node functions mirror the control laws term by term and are what the
tests pin down. The ``network_*`` functions evaluate the same laws for all
nodes at once and are what the simulator calls.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import OscillatorModel
from .errors import ValidationError
from .graph import GainDiagonal, UndirectedLaplacian, is_connected

__all__ = [
    "REGIMES",
    "ControllerSpec",
    "decentralized_input",
    "decentralized_estimator_rate",
    "distributed_input",
    "distributed_estimator_rate",
    "network_inputs",
    "network_estimator_rates",
]

REGIMES = ("open_loop", "decentralized", "distributed")


@dataclass(frozen=True, eq=False)
class ControllerSpec:
    """Controller regime and gains.

    ``Z`` holds the pinning gains ``z_i`` (it also plays the role of ``g_i``
    in the distributed input), ``Zprime`` the estimator pinning gains
    ``z'_i``, ``k`` the estimator gains. ``gamma_hat0`` is the initial
    estimate, zero when omitted.
    """

    regime: str
    Z: Optional[GainDiagonal] = None
    Zprime: Optional[GainDiagonal] = None
    k: Optional[np.ndarray] = None
    B: Optional[UndirectedLaplacian] = None
    C: Optional[UndirectedLaplacian] = None
    gamma_hat0: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValidationError(f"unknown regime {self.regime!r}; expected one of {REGIMES}")
        if self.k is not None:
            k = np.array(self.k, dtype=float)
            k.setflags(write=False)
            object.__setattr__(self, "k", k)
        if self.regime == "open_loop":
            return
        if self.Z is None or self.k is None:
            raise ValidationError(f"{self.regime} controller needs Z and k")
        n = self.Z.n
        if self.k.shape != (n,):
            raise ValidationError(f"k must have {n} entries, got shape {self.k.shape}")
        if np.any(self.k <= 0):
            raise ValidationError("every estimator gain k_i must be positive")
        if self.regime == "decentralized":
            if np.any(self.Z.gains <= 0):
                raise ValidationError("decentralized control needs every z_i > 0")
            return
        if self.Zprime is None or self.B is None or self.C is None:
            raise ValidationError("distributed controller needs Zprime, B and C")
        if not (self.Zprime.n == self.B.n == self.C.n == n):
            raise ValidationError("Z, Zprime, B and C must all have one entry per node")
        if not np.any(self.Z.gains > 0):
            raise ValidationError("distributed control needs at least one z_i > 0")
        if not np.any(self.Zprime.gains > 0):
            raise ValidationError("distributed control needs at least one z'_i > 0")
        c = self.C.entries
        if np.any(c - np.diag(np.diag(c)) > 0):
            raise ValidationError("communication graph C must have nonpositive off-diagonal entries")
        if not is_connected(self.C):
            raise ValidationError("communication graph C must be connected")

    @property
    def n_nodes(self) -> Optional[int]:
        return None if self.Z is None else self.Z.n


def decentralized_input(x_i, s, z_i: float, gamma_hat_i, model: OscillatorModel, H):
    """``u_i = -z_i H (x_i - s) - G(x_i) gamma_hat_i``."""
    x_i = np.asarray(x_i, dtype=float)
    H = np.asarray(H, dtype=float)
    return -z_i * H @ (x_i - s) - model.apply_mismatch(x_i, np.asarray(gamma_hat_i, dtype=float))


def decentralized_estimator_rate(x_i, s, k_i: float, model: OscillatorModel):
    """``k_i G(x_i)^T (x_i - s)``."""
    x_i = np.asarray(x_i, dtype=float)
    return k_i * model.apply_mismatch_transpose(x_i, x_i - s)


def distributed_input(i: int, x, s, spec: ControllerSpec, model: OscillatorModel, H, gamma_hat_i):
    """``u_i = -sum_j b_ij H x_j - z_i H (x_i - s) - G(x_i) gamma_hat_i``."""
    x = np.asarray(x, dtype=float)
    H = np.asarray(H, dtype=float)
    coupling = H @ (spec.B.entries[i] @ x)
    return -coupling - spec.Z.gains[i] * H @ (x[i] - s) - model.apply_mismatch(
        x[i], np.asarray(gamma_hat_i, dtype=float))


def distributed_estimator_rate(i: int, x, s, spec: ControllerSpec, model: OscillatorModel):
    """``k_i G(x_i)^T (sum_j c_ij x_j + z'_i (x_i - s))``."""
    x = np.asarray(x, dtype=float)
    signal = spec.C.entries[i] @ x + spec.Zprime.gains[i] * (x[i] - s)
    return spec.k[i] * model.apply_mismatch_transpose(x[i], signal)


def network_inputs(x, s, gamma_hat, spec: ControllerSpec, model: OscillatorModel, H):
    """Inputs for all nodes, shape ``(N, n)``; zeros in open loop."""
    if spec.regime == "open_loop":
        return np.zeros_like(x)
    err = x - s
    u = -(spec.Z.gains[:, None] * err) @ H.T - model.apply_mismatch(x, gamma_hat)
    if spec.regime == "distributed":
        u -= (spec.B.entries @ x) @ H.T
    return u


def network_estimator_rates(x, s, spec: ControllerSpec, model: OscillatorModel):
    """Estimator derivatives for all nodes, shape ``(N, m)``."""
    if spec.regime == "open_loop":
        raise ValidationError("open-loop networks carry no estimator")
    err = x - s
    if spec.regime == "decentralized":
        signal = err
    else:
        signal = spec.C.entries @ x + spec.Zprime.gains[:, None] * err
    return spec.k[:, None] * model.apply_mismatch_transpose(x, signal)
