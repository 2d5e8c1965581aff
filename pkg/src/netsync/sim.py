"""Coupled network simulation: right-hand side, RK4 integration and error metrics.

The integrated state is the node states ``x`` (N x n), the mismatch
estimates ``gamma_hat`` (N x m, absent in open loop) and the reference
``s`` (n), packed into one flat vector for the integrator.
"""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .control import ControllerSpec, network_estimator_rates, network_inputs
from .dynamics import MismatchEnsemble, OscillatorModel
from .errors import DivergenceError, ValidationError
from .graph import UndirectedLaplacian

logger = logging.getLogger(__name__)

__all__ = [
    "DIVERGENCE_LIMIT",
    "NetworkSystem",
    "NetworkState",
    "IntegrationConfig",
    "Trajectory",
    "rk4_step",
    "integrate_fixed",
    "network_rhs",
    "initial_state",
    "integrate",
    "average_error",
    "reference_error",
    "settling_time",
]

DIVERGENCE_LIMIT = 1e9
CSV_FORMAT = "%.9g"


@dataclass(frozen=True, eq=False)
class NetworkSystem:
    """Everything the right-hand side needs: model, plant graph, H, mismatches, controller."""

    model: OscillatorModel
    L: UndirectedLaplacian
    H: np.ndarray
    mismatch: MismatchEnsemble
    controller: ControllerSpec

    def __post_init__(self):
        H = np.array(self.H, dtype=float)
        n, m, N = self.model.state_dim, self.model.mismatch_dim, self.L.n
        if H.shape != (n, n):
            raise ValidationError(f"H must be {n}x{n}, got {H.shape}")
        if self.mismatch.gammas.shape != (N, m):
            raise ValidationError(f"mismatches must be {N}x{m}, got {self.mismatch.gammas.shape}")
        if self.controller.regime != "open_loop" and self.controller.n_nodes != N:
            raise ValidationError(f"controller is sized for {self.controller.n_nodes} nodes, network has {N}")
        H.setflags(write=False)
        object.__setattr__(self, "H", H)

    @property
    def N(self) -> int:
        return self.L.n

    @property
    def n(self) -> int:
        return self.model.state_dim

    @property
    def m(self) -> int:
        return self.model.mismatch_dim

    @property
    def has_estimator(self) -> bool:
        return self.controller.regime != "open_loop"


@dataclass(frozen=True, eq=False)
class NetworkState:
    t: float
    x: np.ndarray
    gamma_hat: Optional[np.ndarray]
    s: np.ndarray


@dataclass(frozen=True)
class IntegrationConfig:
    dt: float = 1e-3
    t_end: float = 20.0
    method: str = "rk4"
    seed: int = 0
    x0_box: tuple = ((-10.0, 10.0), (-10.0, 10.0), (-10.0, 10.0))

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValidationError("dt must be positive")
        if not self.t_end > self.dt:
            raise ValidationError("t_end must exceed dt")
        if self.method != "rk4":
            raise ValidationError(f"only method 'rk4' is supported, got {self.method!r}")
        box = tuple((float(lo), float(hi)) for lo, hi in self.x0_box)
        if any(not lo <= hi for lo, hi in box):
            raise ValidationError("x0_box intervals must have lo <= hi")
        object.__setattr__(self, "x0_box", box)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass(eq=False)
class Trajectory:
    """Sampled error norms of one run.

    ``node_norms`` (optional) holds ``||x_i - xbar||`` in open loop and
    ``||x_i - s||`` under control.
    """

    t: np.ndarray
    e_avg: np.ndarray
    e_ref: np.ndarray
    gamma_err: np.ndarray
    stride: int
    node_norms: Optional[np.ndarray] = None
    diverged: bool = False
    divergence_time: Optional[float] = None
    final_state: Optional[NetworkState] = None
    mismatch_peak: float = 0.0

    @property
    def samples(self):
        return list(zip(self.t.tolist(), self.e_avg.tolist(), self.e_ref.tolist(), self.gamma_err.tolist()))

    def header(self) -> list[str]:
        cols = ["t", "e_avg", "e_ref", "gamma_err"]
        if self.node_norms is not None:
            cols += [f"e_node_{i + 1}" for i in range(self.node_norms.shape[1])]
        return cols

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header())
        cols = [self.t, self.e_avg, self.e_ref, self.gamma_err]
        table = np.column_stack(cols if self.node_norms is None else cols + [self.node_norms])
        for row in table:
            w.writerow([CSV_FORMAT % v for v in row])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text


def rk4_step(f: Callable, t: float, y: np.ndarray, dt: float) -> np.ndarray:
    """One classical fourth-order Runge-Kutta step of ``y' = f(t, y)``."""
    k1 = f(t, y)
    k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_fixed(f: Callable, y0, t0: float, t_end: float, dt: float) -> np.ndarray:
    """Fixed-step RK4 from ``t0`` to ``t_end``; returns the final state."""
    steps = int(round((t_end - t0) / dt))
    y = np.asarray(y0, dtype=float)
    for k in range(steps):
        y = rk4_step(f, t0 + k * dt, y, dt)
    return y


def average_error(x):
    """Deviations from the network mean and their total norm.

    Returns ``(e, ||e||)`` with ``e_i = x_i - mean(x)``; the norm equals
    ``||(R_N kron I_n) x|| / N``.
    """
    x = np.asarray(x, dtype=float)
    e = x - x.mean(axis=0)
    return e, float(np.linalg.norm(e))


def reference_error(x, s):
    """Per-node ``||x_i - s||`` and the total ``||x - 1 kron s||``."""
    d = np.linalg.norm(np.asarray(x, dtype=float) - s, axis=1)
    return d, float(np.linalg.norm(d))


def _split(system: NetworkSystem, y: np.ndarray):
    N, n, m = system.N, system.n, system.m
    x = y[: N * n].reshape(N, n)
    if system.has_estimator:
        gh = y[N * n: N * (n + m)].reshape(N, m)
        s = y[N * (n + m):]
    else:
        gh = None
        s = y[N * n:]
    return x, gh, s


def _pack(x, gh, s) -> np.ndarray:
    parts = [x.ravel()] + ([gh.ravel()] if gh is not None else []) + [s]
    return np.concatenate(parts)


def _derivatives(system: NetworkSystem, t: float, x, gh, s):
    model = system.model
    H = system.H
    gamma = system.mismatch.at(t)
    dx = model.drift(x) + model.apply_mismatch(x, gamma) - (system.L.entries @ x) @ H.T
    dgh = None
    if system.has_estimator:
        dx += network_inputs(x, s, gh, system.controller, model, H)
        dgh = network_estimator_rates(x, s, system.controller, model)
    ds = model.drift(s[None, :])[0]
    return dx, dgh, ds


def network_rhs(state: NetworkState, system: NetworkSystem) -> NetworkState:
    """Time derivative of the full network state.

    Raises:
        DivergenceError: if the state is not finite.
    """
    if not (np.all(np.isfinite(state.x)) and np.all(np.isfinite(state.s))
            and (state.gamma_hat is None or np.all(np.isfinite(state.gamma_hat)))):
        raise DivergenceError("non-finite network state", t=state.t)
    gh = state.gamma_hat
    if system.has_estimator and gh is None:
        gh = np.zeros((system.N, system.m))
    dx, dgh, ds = _derivatives(system, state.t, np.asarray(state.x, dtype=float), gh,
                               np.asarray(state.s, dtype=float))
    return NetworkState(state.t, dx, dgh, ds)


def initial_state(system: NetworkSystem, config: IntegrationConfig) -> NetworkState:
    """Node and reference states drawn uniformly from ``config.x0_box``."""
    box = np.asarray(config.x0_box, dtype=float)
    if box.shape != (system.n, 2):
        raise ValidationError(f"x0_box needs {system.n} intervals, got {box.shape[0]}")
    rng = np.random.default_rng(config.seed)
    x0 = rng.uniform(box[:, 0], box[:, 1], size=(system.N, system.n))
    s0 = rng.uniform(box[:, 0], box[:, 1])
    gh0 = None
    if system.has_estimator:
        g = system.controller.gamma_hat0
        gh0 = np.zeros((system.N, system.m)) if g is None else np.broadcast_to(g, (system.N, system.m)).copy()
    return NetworkState(0.0, x0, gh0, s0)


def integrate(system: NetworkSystem, config: IntegrationConfig, *, stride: int = 10,
              per_node: bool = False, initial: Optional[NetworkState] = None,
              observer: Optional[Callable[[NetworkState], None]] = None) -> Trajectory:
    """Integrate the network with fixed-step RK4 and record sampled error norms.

    Samples are taken at step 0, every ``stride`` steps and at the last step.
    ``observer`` is called with the full state at every sample. A state
    entry leaving ``[-1e9, 1e9]`` (or going non-finite) stops the run; the
    partial trajectory is returned with ``diverged=True``.
    """
    if stride < 1:
        raise ValidationError("stride must be >= 1")
    state = initial if initial is not None else initial_state(system, config)
    t0 = float(state.t)
    gh0 = state.gamma_hat
    if system.has_estimator and gh0 is None:
        gh0 = np.zeros((system.N, system.m))
    y = _pack(np.asarray(state.x, dtype=float), gh0 if system.has_estimator else None,
              np.asarray(state.s, dtype=float))
    dt = config.dt
    n_steps = config.n_steps

    def f(t, yy):
        dx, dgh, ds = _derivatives(system, t, *_split(system, yy))
        return _pack(dx, dgh, ds)

    ts, e_avg, e_ref, g_err, nodes = [], [], [], [], []
    peak = 0.0

    def record(t, yy):
        nonlocal peak
        x, gh, s = _split(system, yy)
        e, e_norm = average_error(x)
        per, ref_norm = reference_error(x, s)
        gamma = system.mismatch.at(t)
        ts.append(t)
        e_avg.append(e_norm)
        e_ref.append(ref_norm)
        g_err.append(float(np.linalg.norm(gh - gamma)) if gh is not None else math.nan)
        if per_node:
            nodes.append(per if system.has_estimator else np.linalg.norm(e, axis=1))
        drive = system.model.apply_mismatch(x, gamma)
        peak = max(peak, float(np.max(np.sum(drive * drive, axis=1))))
        if observer is not None:
            observer(NetworkState(t, x.copy(), None if gh is None else gh.copy(), s.copy()))

    diverged, t_div = False, None
    record(t0, y)
    for k in range(n_steps):
        t = t0 + k * dt
        y_next = rk4_step(f, t, y, dt)
        if not np.all(np.isfinite(y_next)) or np.max(np.abs(y_next)) > DIVERGENCE_LIMIT:
            diverged, t_div = True, t
            logger.warning("state diverged after t=%.6g", t)
            if ts[-1] != t:
                record(t, y)
            break
        y = y_next
        if (k + 1) % stride == 0 or k + 1 == n_steps:
            record(t0 + (k + 1) * dt, y)

    x, gh, s = _split(system, y)
    final = NetworkState(ts[-1], x.copy(), None if gh is None else gh.copy(), s.copy())
    return Trajectory(
        t=np.array(ts),
        e_avg=np.array(e_avg),
        e_ref=np.array(e_ref),
        gamma_err=np.array(g_err),
        stride=stride,
        node_norms=np.array(nodes) if per_node else None,
        diverged=diverged,
        divergence_time=t_div,
        final_state=final,
        mismatch_peak=peak,
    )


def settling_time(traj: Trajectory, threshold: float) -> Optional[float]:
    """First sampled time after which the average error stays at or below ``threshold``.

    ``None`` when the last sample is still above it.
    """
    if not threshold > 0:
        raise ValidationError("threshold must be positive")
    above = np.flatnonzero(traj.e_avg > threshold)
    if above.size == 0:
        return float(traj.t[0])
    last = above[-1]
    if last + 1 >= traj.t.size:
        return None
    return float(traj.t[last + 1])
