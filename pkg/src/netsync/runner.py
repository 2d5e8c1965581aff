"""Scenario-level operations behind the command line: certify, simulate, sweep."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

from .certification import check_decentralized, check_distributed, check_open_loop
from .errors import CertificateFailedError
from .scenario import RunSetup, Scenario, ScenarioError, build, get_field, set_field
from .sim import Trajectory, integrate, settling_time

logger = logging.getLogger(__name__)

__all__ = ["certify", "simulate", "SimulationResult", "sweep", "SWEEP_COLUMNS", "format_certificate"]


def certify(setup: RunSetup) -> dict:
    """Certificate report for a scenario.

    ``satisfied`` refers to the certificate the scenario's regime relies on:
    open-loop boundedness, the decentralized gain condition or the
    distributed gain condition. Inapplicable entries are ``None``.
    """
    sysm = setup.system
    ctrl = sysm.controller
    try:
        ol = check_open_loop(setup.F, setup.H, sysm.L, setup.bound)
    except CertificateFailedError:
        ol = None
    dec = check_decentralized(setup.F, setup.H, sysm.L, ctrl.Z) if ctrl.Z is not None else None
    dist = check_distributed(setup.F, setup.H, sysm.L, ctrl.B, ctrl.Z) if ctrl.regime == "distributed" else None
    requested = {"open_loop": ol, "decentralized": dec, "distributed": dist}[ctrl.regime]
    return {
        "scenario": setup.scenario.name,
        "regime": ctrl.regime,
        "lambda_star": None if ol is None else ol.lambda_star,
        "epsilon": None if ol is None else ol.epsilon_bound,
        "theorem2_margin": None if dec is None else dec.margin,
        "theorem3_margin": None if dist is None else dist.margin,
        "binding_mu": {
            "open_loop": None if ol is None else ol.binding_eigenvalue,
            "theorem2": None if dec is None else dec.binding_eigenvalue,
            "theorem3": None if dist is None else dist.binding_eigenvalue,
        },
        "satisfied": bool(requested is not None and requested.satisfied),
    }


def _fmt(v) -> str:
    return "n/a" if v is None else f"{v:.6g}"


def format_certificate(rep: dict) -> str:
    b = rep["binding_mu"]
    lines = [
        f"scenario: {rep['scenario']} (regime {rep['regime']})",
        f"  lambda*            {_fmt(rep['lambda_star'])}   binding mu {_fmt(b['open_loop'])}",
        f"  epsilon bound      {_fmt(rep['epsilon'])}",
        f"  decentralized gain margin  {_fmt(rep['theorem2_margin'])}   binding mu {_fmt(b['theorem2'])}",
        f"  distributed gain margin    {_fmt(rep['theorem3_margin'])}   binding mu {_fmt(b['theorem3'])}",
        f"  certificate for this regime: {'SATISFIED' if rep['satisfied'] else 'NOT SATISFIED'}",
    ]
    return "\n".join(lines)


@dataclass
class SimulationResult:
    trajectory: Trajectory
    summary: dict


def simulate(setup: RunSetup, *, per_node: Optional[bool] = None, observer=None) -> SimulationResult:
    sc = setup.scenario
    per_node = sc.output.per_node if per_node is None else per_node
    # warn only: the sufficient conditions can fail on configurations that still synchronize
    cert = certify(setup)
    if not cert["satisfied"]:
        logger.warning("certificate for regime %s not satisfied; simulating anyway", cert["regime"])
    traj = integrate(setup.system, setup.config, stride=sc.output.stride, per_node=per_node, observer=observer)
    eps = cert["epsilon"]
    settle = settling_time(traj, eps) if eps is not None else None
    g_final = float(traj.gamma_err[-1])
    summary = {
        "scenario": sc.name,
        "regime": setup.system.controller.regime,
        "seed": {"mismatch": sc.mismatch.seed, "initial_state": sc.integration.seed},
        "t_final": float(traj.t[-1]),
        "final_e_avg": float(traj.e_avg[-1]),
        "final_e_ref": float(traj.e_ref[-1]),
        "final_gamma_err": None if math.isnan(g_final) else g_final,
        "certificate_satisfied": cert["satisfied"],
        "epsilon": eps,
        "settling_time": settle,
        "settled_below_epsilon": settle is not None,
        "diverged": traj.diverged,
        "divergence_time": traj.divergence_time,
        "mismatch_peak": traj.mismatch_peak,
        "mismatch_bound": setup.bound.worst_case,
    }
    return SimulationResult(traj, summary)


SWEEP_COLUMNS = ["value", "epsilon", "final_e_avg", "final_e_ref", "final_gamma_err", "settling_time", "diverged"]


def _sweep_one(args):
    sc, axis, value = args
    setup = build(set_field(sc, axis, value))
    s = simulate(setup, per_node=False).summary
    return [value, s["epsilon"], s["final_e_avg"], s["final_e_ref"], s["final_gamma_err"], s["settling_time"],
            s["diverged"]]


def sweep(sc: Scenario, axis: str, values, jobs: int = 1) -> list[list]:
    """One summary row per value of the scalar field ``axis``.

    Every value is validated before any run starts.
    """
    values = list(values)
    for v in values:
        build(set_field(sc, axis, v))
    if not values:
        current = get_field(sc.to_dict(), axis)
        if isinstance(current, (dict, list)):
            raise ScenarioError(axis, "not a scalar field")
        return []
    tasks = [(sc, axis, v) for v in values]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_one, tasks))
    return [_sweep_one(t) for t in tasks]
