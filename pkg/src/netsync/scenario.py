"""Scenario files: parsing, validation, serialization and the built-in presets.

A scenario is a YAML document with the sections ``network``, ``model``,
``mismatch``, ``assumptions``, ``controller``, ``integration`` and
``output``. Validation errors carry the dotted path of the offending field.
Node indices in scenario files are 1-based.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Optional, Union

import numpy as np
import yaml

from .certification import greedy_pin_selection
from .control import REGIMES, ControllerSpec
from .dynamics import (
    LORENZ_F,
    LORENZ_GAMMA,
    LORENZ_PARAMS,
    QuadBound,
    UncertaintyBound,
    corner_gamma_c,
    lorenz_bounds,
    make_model,
    sample_mismatches,
    sinusoidal_modulation,
)
from .errors import NetsyncError, ValidationError
from .graph import (
    GainDiagonal,
    UndirectedLaplacian,
    build_complete_R,
    build_path_laplacian,
    zero_laplacian,
)
from .sim import IntegrationConfig, NetworkSystem

__all__ = [
    "ScenarioError",
    "GraphSpec",
    "NetworkSpec",
    "ModelSpec",
    "MismatchSpec",
    "AssumptionsSpec",
    "ControllerSection",
    "OutputSpec",
    "Scenario",
    "RunSetup",
    "ASSUMPTION_PRESETS",
    "PRESETS",
    "preset",
    "loads",
    "load",
    "dumps",
    "build",
    "set_field",
    "get_field",
]

GENERATORS = ("complete", "path", "zero")


class ScenarioError(ValidationError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


# -- primitive readers -------------------------------------------------------

def _mapping(value, path) -> dict:
    if not isinstance(value, dict):
        raise ScenarioError(path, f"expected a mapping, got {type(value).__name__}")
    return value


def _no_extra(d: dict, allowed, path):
    extra = sorted(set(d) - set(allowed))
    if extra:
        raise ScenarioError(path, f"unknown field(s) {extra}; allowed: {sorted(allowed)}")


def _required(d: dict, key, path):
    if key not in d or d[key] is None:
        raise ScenarioError(f"{path}.{key}", "required field is missing")
    return d[key]


def _number(value, path) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(path, f"expected a number, got {value!r}")
    if not np.isfinite(value):
        raise ScenarioError(path, "must be finite")
    return float(value)


def _integer(value, path) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(path, f"expected an integer, got {value!r}")
    return value


def _boolean(value, path) -> bool:
    if not isinstance(value, bool):
        raise ScenarioError(path, f"expected true/false, got {value!r}")
    return value


def _vector(value, path, length=None) -> tuple:
    if not isinstance(value, (list, tuple)):
        raise ScenarioError(path, f"expected a list of numbers, got {value!r}")
    if length is not None and len(value) != length:
        raise ScenarioError(path, f"expected {length} entries, got {len(value)}")
    return tuple(_number(v, f"{path}[{i}]") for i, v in enumerate(value))


def _matrix(value, path, shape=None) -> tuple:
    if not isinstance(value, (list, tuple)) or not value:
        raise ScenarioError(path, "expected a non-empty list of rows")
    rows = len(value) if shape is None else shape[0]
    cols = len(value) if shape is None else shape[1]
    if len(value) != rows:
        raise ScenarioError(path, f"expected {rows} rows, got {len(value)}")
    return tuple(_vector(r, f"{path}[{i}]", cols) for i, r in enumerate(value))


def _plain(value):
    """Tuples to lists recursively, for YAML output."""
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    return value


# -- sections ----------------------------------------------------------------

@dataclass(frozen=True)
class GraphSpec:
    """A named generator (``complete``, ``path``, ``zero``) plus size, or an explicit matrix."""

    generator: Optional[str] = None
    size: Optional[int] = None
    matrix: Optional[tuple] = None

    @classmethod
    def parse(cls, d, path):
        d = _mapping(d, path)
        _no_extra(d, ("generator", "size", "matrix"), path)
        gen, size, matrix = d.get("generator"), d.get("size"), d.get("matrix")
        if (gen is None) == (matrix is None):
            raise ScenarioError(path, "give exactly one of 'generator' or 'matrix'")
        if gen is not None:
            if gen not in GENERATORS:
                raise ScenarioError(f"{path}.generator", f"unknown generator {gen!r}; expected one of {GENERATORS}")
            if size is not None:
                size = _integer(size, f"{path}.size")
            return cls(generator=gen, size=size)
        if size is not None:
            raise ScenarioError(f"{path}.size", "size is implied by an explicit matrix")
        return cls(matrix=_matrix(matrix, f"{path}.matrix"))

    def to_dict(self):
        if self.matrix is not None:
            return {"matrix": _plain(self.matrix)}
        d = {"generator": self.generator}
        if self.size is not None:
            d["size"] = self.size
        return d

    @property
    def n(self) -> Optional[int]:
        return len(self.matrix) if self.matrix is not None else self.size

    def build(self, path, n=None) -> UndirectedLaplacian:
        size = self.n if self.n is not None else n
        if size is None:
            raise ScenarioError(f"{path}.size", "required field is missing")
        if n is not None and size != n:
            raise ScenarioError(path, f"graph has {size} nodes, network has {n}")
        try:
            if self.matrix is not None:
                return UndirectedLaplacian(np.array(self.matrix))
            if self.generator == "complete":
                return build_complete_R(size)
            if self.generator == "path":
                return build_path_laplacian(size)
            return zero_laplacian(size)
        except NetsyncError as exc:
            raise ScenarioError(path, str(exc)) from None


@dataclass(frozen=True)
class NetworkSpec:
    graph: GraphSpec
    inner_coupling: tuple

    @classmethod
    def parse(cls, d, path="network"):
        d = _mapping(d, path)
        _no_extra(d, ("generator", "size", "matrix", "inner_coupling"), path)
        graph = GraphSpec.parse({k: v for k, v in d.items() if k != "inner_coupling"}, path)
        if graph.n is None:
            raise ScenarioError(f"{path}.size", "required field is missing")
        H = _matrix(_required(d, "inner_coupling", path), f"{path}.inner_coupling")
        return cls(graph, H)

    def to_dict(self):
        return {**self.graph.to_dict(), "inner_coupling": _plain(self.inner_coupling)}


@dataclass(frozen=True)
class ModelSpec:
    name: str
    params: tuple = ()

    @classmethod
    def parse(cls, d, path="model"):
        d = _mapping(d, path)
        _no_extra(d, ("name", "params"), path)
        name = _required(d, "name", path)
        params = _mapping(d.get("params") or {}, f"{path}.params")
        items = []
        for k, v in params.items():
            items.append((str(k), v if isinstance(v, int) and not isinstance(v, bool)
                          else _number(v, f"{path}.params.{k}")))
        return cls(str(name), tuple(items))

    def to_dict(self):
        return {"name": self.name, "params": dict(self.params)}


@dataclass(frozen=True)
class MismatchSpec:
    bounds: tuple
    seed: int
    time_varying: Optional[tuple] = None  # (("kind", ...), ("frequency", ...))

    @classmethod
    def parse(cls, d, path="mismatch"):
        d = _mapping(d, path)
        _no_extra(d, ("bounds", "seed", "time_varying"), path)
        bounds = _vector(_required(d, "bounds", path), f"{path}.bounds")
        if any(b < 0 for b in bounds):
            raise ScenarioError(f"{path}.bounds", "bounds must be nonnegative")
        seed = _integer(_required(d, "seed", path), f"{path}.seed")
        tv = d.get("time_varying")
        if tv is not None:
            tp = f"{path}.time_varying"
            tv = _mapping(tv, tp)
            _no_extra(tv, ("kind", "frequency"), tp)
            if _required(tv, "kind", tp) != "sinusoid":
                raise ScenarioError(f"{tp}.kind", "only 'sinusoid' is supported")
            tv = (("kind", "sinusoid"), ("frequency", _number(_required(tv, "frequency", tp), f"{tp}.frequency")))
        return cls(bounds, seed, tv)

    def to_dict(self):
        d = {"bounds": _plain(self.bounds), "seed": self.seed}
        if self.time_varying is not None:
            d["time_varying"] = dict(self.time_varying)
        return d


ASSUMPTION_PRESETS = {
    "lorenz-s4": {
        "F": LORENZ_F,
        "Gamma": LORENZ_GAMMA,
        "gamma_c": tuple(float(v) for v in corner_gamma_c(lorenz_bounds(LORENZ_PARAMS))),
    },
}


@dataclass(frozen=True)
class AssumptionsSpec:
    """Either a named preset or explicit ``F``, ``Gamma`` and ``gamma_c``."""

    preset: Optional[str] = None
    F: Optional[tuple] = None
    Gamma: Optional[tuple] = None
    gamma_c: Optional[tuple] = None

    @classmethod
    def parse(cls, d, path="assumptions"):
        d = _mapping(d, path)
        _no_extra(d, ("preset", "F", "Gamma", "gamma_c"), path)
        name = d.get("preset")
        if name is not None:
            if name not in ASSUMPTION_PRESETS:
                raise ScenarioError(f"{path}.preset", f"unknown preset {name!r}; known: {sorted(ASSUMPTION_PRESETS)}")
            if any(k in d for k in ("F", "Gamma", "gamma_c")):
                raise ScenarioError(path, "give either 'preset' or explicit F/Gamma/gamma_c, not both")
            return cls(preset=name)
        F = _matrix(_required(d, "F", path), f"{path}.F")
        Gamma = _matrix(_required(d, "Gamma", path), f"{path}.Gamma")
        gamma_c = _vector(_required(d, "gamma_c", path), f"{path}.gamma_c", len(Gamma))
        return cls(F=F, Gamma=Gamma, gamma_c=gamma_c)

    def to_dict(self):
        if self.preset is not None:
            return {"preset": self.preset}
        return {"F": _plain(self.F), "Gamma": _plain(self.Gamma), "gamma_c": _plain(self.gamma_c)}

    def values(self):
        if self.preset is not None:
            p = ASSUMPTION_PRESETS[self.preset]
            return p["F"], p["Gamma"], p["gamma_c"]
        return self.F, self.Gamma, self.gamma_c


Pins = Union[str, tuple]


@dataclass(frozen=True)
class ControllerSection:
    """Controller settings as written in a scenario.

    ``pins`` is ``"all"``, ``"greedy:K"`` or a list of 1-based node indices;
    ``z`` and ``z_prime`` are the gains applied at the pinned nodes.
    """

    regime: str
    pins: Optional[Pins] = None
    z: Optional[float] = None
    z_prime: Optional[float] = None
    k: Optional[Union[float, tuple]] = None
    B: Optional[GraphSpec] = None
    C: Optional[GraphSpec] = None
    gamma_hat0: float = 0.0

    @classmethod
    def parse(cls, d, path="controller"):
        d = _mapping(d, path)
        _no_extra(d, ("regime", "pins", "z", "z_prime", "k", "B", "C", "gamma_hat0"), path)
        regime = _required(d, "regime", path)
        if regime not in REGIMES:
            raise ScenarioError(f"{path}.regime", f"unknown regime {regime!r}; expected one of {REGIMES}")
        if regime == "open_loop":
            extra = sorted(set(d) - {"regime"})
            if extra:
                raise ScenarioError(path, f"open_loop takes no controller fields, got {extra}")
            return cls(regime)
        pins = _required(d, "pins", path)
        if isinstance(pins, str):
            if pins != "all" and not pins.startswith("greedy:"):
                raise ScenarioError(f"{path}.pins", f"expected 'all', 'greedy:K' or a node list, got {pins!r}")
            if pins.startswith("greedy:"):
                try:
                    int(pins.split(":", 1)[1])
                except ValueError:
                    raise ScenarioError(f"{path}.pins", f"bad pin count in {pins!r}") from None
        elif isinstance(pins, (list, tuple)):
            pins = tuple(_integer(p, f"{path}.pins[{i}]") for i, p in enumerate(pins))
        else:
            raise ScenarioError(f"{path}.pins", f"expected 'all', 'greedy:K' or a node list, got {pins!r}")
        z = _number(_required(d, "z", path), f"{path}.z")
        k = _required(d, "k", path)
        k = _vector(k, f"{path}.k") if isinstance(k, (list, tuple)) else _number(k, f"{path}.k")
        gh0 = _number(d.get("gamma_hat0", 0.0), f"{path}.gamma_hat0")
        if regime == "decentralized":
            for key in ("z_prime", "B", "C"):
                if key in d:
                    raise ScenarioError(f"{path}.{key}", "only used by the distributed regime")
            return cls(regime, pins, z, None, k, gamma_hat0=gh0)
        zp = _number(_required(d, "z_prime", path), f"{path}.z_prime")
        B = GraphSpec.parse(_required(d, "B", path), f"{path}.B")
        C = GraphSpec.parse(_required(d, "C", path), f"{path}.C")
        return cls(regime, pins, z, zp, k, B, C, gh0)

    def to_dict(self):
        if self.regime == "open_loop":
            return {"regime": "open_loop"}
        d = {"regime": self.regime, "pins": _plain(self.pins), "z": self.z}
        if self.regime == "distributed":
            d["z_prime"] = self.z_prime
        d["k"] = _plain(self.k)
        if self.regime == "distributed":
            d["B"] = self.B.to_dict()
            d["C"] = self.C.to_dict()
        d["gamma_hat0"] = self.gamma_hat0
        return d


def _parse_integration(d, path="integration") -> IntegrationConfig:
    d = _mapping(d, path)
    _no_extra(d, ("dt", "t_end", "method", "seed", "x0_box"), path)
    box = _required(d, "x0_box", path)
    if not isinstance(box, (list, tuple)) or not box:
        raise ScenarioError(f"{path}.x0_box", "expected a list of [lo, hi] intervals")
    box = tuple(_vector(b, f"{path}.x0_box[{i}]", 2) for i, b in enumerate(box))
    for i, (lo, hi) in enumerate(box):
        if lo > hi:
            raise ScenarioError(f"{path}.x0_box[{i}]", "interval needs lo <= hi")
    dt = _number(_required(d, "dt", path), f"{path}.dt")
    if dt <= 0:
        raise ScenarioError(f"{path}.dt", "must be positive")
    t_end = _number(_required(d, "t_end", path), f"{path}.t_end")
    if t_end <= dt:
        raise ScenarioError(f"{path}.t_end", "must exceed dt")
    method = str(d.get("method", "rk4"))
    if method != "rk4":
        raise ScenarioError(f"{path}.method", f"only 'rk4' is supported, got {method!r}")
    try:
        return IntegrationConfig(dt=dt, t_end=t_end, method=method,
                                 seed=_integer(_required(d, "seed", path), f"{path}.seed"), x0_box=box)
    except ValidationError as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(path, str(exc)) from None


def _integration_dict(c: IntegrationConfig):
    return {"dt": c.dt, "t_end": c.t_end, "method": c.method, "seed": c.seed, "x0_box": _plain(c.x0_box)}


@dataclass(frozen=True)
class OutputSpec:
    directory: str = "out"
    stride: int = 10
    per_node: bool = False

    @classmethod
    def parse(cls, d, path="output"):
        d = _mapping(d or {}, path)
        _no_extra(d, ("directory", "stride", "per_node"), path)
        stride = _integer(d.get("stride", 10), f"{path}.stride")
        if stride < 1:
            raise ScenarioError(f"{path}.stride", "must be >= 1")
        return cls(str(d.get("directory", "out")), stride, _boolean(d.get("per_node", False), f"{path}.per_node"))

    def to_dict(self):
        return {"directory": self.directory, "stride": self.stride, "per_node": self.per_node}


@dataclass(frozen=True)
class Scenario:
    name: str
    network: NetworkSpec
    model: ModelSpec
    mismatch: MismatchSpec
    assumptions: AssumptionsSpec
    controller: ControllerSection
    integration: IntegrationConfig
    output: OutputSpec = field(default_factory=OutputSpec)

    @classmethod
    def from_dict(cls, d) -> "Scenario":
        d = _mapping(d, "")
        _no_extra(d, ("name", "network", "model", "mismatch", "assumptions", "controller",
                      "integration", "output"), "scenario")
        sc = cls(
            name=str(d.get("name", "scenario")),
            network=NetworkSpec.parse(_required(d, "network", "scenario"), "network"),
            model=ModelSpec.parse(_required(d, "model", "scenario"), "model"),
            mismatch=MismatchSpec.parse(_required(d, "mismatch", "scenario"), "mismatch"),
            assumptions=AssumptionsSpec.parse(_required(d, "assumptions", "scenario"), "assumptions"),
            controller=ControllerSection.parse(_required(d, "controller", "scenario"), "controller"),
            integration=_parse_integration(_required(d, "integration", "scenario"), "integration"),
            output=OutputSpec.parse(d.get("output"), "output"),
        )
        sc.check_dimensions()
        return sc

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "network": self.network.to_dict(),
            "model": self.model.to_dict(),
            "mismatch": self.mismatch.to_dict(),
            "assumptions": self.assumptions.to_dict(),
            "controller": self.controller.to_dict(),
            "integration": _integration_dict(self.integration),
            "output": self.output.to_dict(),
        }

    @property
    def n_nodes(self) -> int:
        return self.network.graph.n

    def build_model(self):
        try:
            return make_model(self.model.name, **dict(self.model.params))
        except ValidationError as exc:
            raise ScenarioError("model", str(exc)) from None

    def check_dimensions(self):
        """Cross-field consistency of node count N, state size n and mismatch size m."""
        model = self.build_model()
        n, m, N = model.state_dim, model.mismatch_dim, self.n_nodes
        if len(self.network.inner_coupling) != n or any(len(r) != n for r in self.network.inner_coupling):
            raise ScenarioError("network.inner_coupling", f"must be {n}x{n} for model {model.name!r}")
        if len(self.mismatch.bounds) != m:
            raise ScenarioError("mismatch.bounds", f"expected {m} entries, got {len(self.mismatch.bounds)}")
        F, Gamma, gamma_c = self.assumptions.values()
        if len(F) != n or any(len(r) != n for r in F):
            raise ScenarioError("assumptions.F", f"must be {n}x{n}")
        if len(Gamma) != m or any(len(r) != m for r in Gamma):
            raise ScenarioError("assumptions.Gamma", f"must be {m}x{m}")
        if len(gamma_c) != m:
            raise ScenarioError("assumptions.gamma_c", f"expected {m} entries")
        if len(self.integration.x0_box) != n:
            raise ScenarioError("integration.x0_box", f"expected {n} intervals, got {len(self.integration.x0_box)}")
        c = self.controller
        if c.regime == "open_loop":
            return
        if isinstance(c.pins, tuple):
            for i, p in enumerate(c.pins):
                if not 1 <= p <= N:
                    raise ScenarioError(f"controller.pins[{i}]", f"node {p} outside 1..{N}")
        elif c.pins.startswith("greedy:"):
            kp = int(c.pins.split(":", 1)[1])
            if not 1 <= kp <= N:
                raise ScenarioError("controller.pins", f"pin count {kp} outside 1..{N}")
        if isinstance(c.k, tuple) and len(c.k) != N:
            raise ScenarioError("controller.k", f"expected {N} entries, got {len(c.k)}")
        for key in ("B", "C"):
            g = getattr(c, key)
            if g is not None and g.n is not None and g.n != N:
                raise ScenarioError(f"controller.{key}", f"graph has {g.n} nodes, network has {N}")


# -- runtime objects ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RunSetup:
    """Runtime objects built from a scenario."""

    scenario: Scenario
    system: NetworkSystem
    F: QuadBound
    bound: UncertaintyBound
    config: IntegrationConfig

    @property
    def H(self):
        return self.system.H


def _pin_gains(c: ControllerSection, L: UndirectedLaplacian, gain: float) -> GainDiagonal:
    N = L.n
    if c.pins == "all":
        return GainDiagonal(np.full(N, gain))
    if isinstance(c.pins, str):
        kp = int(c.pins.split(":", 1)[1])
        if gain <= 0:
            raise ScenarioError("controller.z", "greedy pinning needs a positive gain")
        return GainDiagonal(greedy_pin_selection(L, kp, 1.0).gains * gain)
    return GainDiagonal.from_pins(N, [p - 1 for p in c.pins], gain)


def _controller(c: ControllerSection, L: UndirectedLaplacian, m: int) -> ControllerSpec:
    if c.regime == "open_loop":
        return ControllerSpec("open_loop")
    N = L.n
    k = np.array(c.k, dtype=float) if isinstance(c.k, tuple) else np.full(N, c.k)
    gh0 = np.full((N, m), c.gamma_hat0)
    try:
        if c.regime == "decentralized":
            return ControllerSpec("decentralized", Z=_pin_gains(c, L, c.z), k=k, gamma_hat0=gh0)
        B = c.B.build("controller.B", N)
        C = c.C.build("controller.C", N)
        # distributed pins are placed on the estimator graph C
        Z = _pin_gains(c, C, c.z)
        Zp = GainDiagonal(np.where(Z.gains > 0, c.z_prime, 0.0))
        return ControllerSpec("distributed", Z=Z, Zprime=Zp, k=k, B=B, C=C, gamma_hat0=gh0)
    except ScenarioError:
        raise
    except ValidationError as exc:
        raise ScenarioError("controller", str(exc)) from None


def build(sc: Scenario) -> RunSetup:
    model = sc.build_model()
    L = sc.network.graph.build("network")
    H = np.array(sc.network.inner_coupling)
    try:
        ens = sample_mismatches(L.n, sc.mismatch.bounds, sc.mismatch.seed)
    except ValidationError as exc:
        raise ScenarioError("mismatch", str(exc)) from None
    if sc.mismatch.time_varying is not None:
        ens = ens.with_time_variation(sinusoidal_modulation(ens.gammas, dict(sc.mismatch.time_varying)["frequency"]))
    F, Gamma, gamma_c = sc.assumptions.values()
    try:
        quad = QuadBound(np.array(F))
        bound = UncertaintyBound(np.array(Gamma), np.array(gamma_c))
    except ValidationError as exc:
        raise ScenarioError("assumptions", str(exc)) from None
    controller = _controller(sc.controller, L, model.mismatch_dim)
    system = NetworkSystem(model, L, H, ens, controller)
    return RunSetup(sc, system, quad, bound, sc.integration)


# -- text I/O ----------------------------------------------------------------

def loads(text: str) -> Scenario:
    """Parse a scenario document.

    Raises:
        ScenarioError: with the YAML line/column or the field path of the problem.
    """
    try:
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "document"
        msg = f"YAML syntax error: {exc.problem}"
        ctx = exc.context_mark
        if exc.context and ctx is not None:
            msg += f" ({exc.context} at line {ctx.line + 1}, column {ctx.column + 1})"
        raise ScenarioError(where, msg) from None
    except yaml.YAMLError as exc:
        raise ScenarioError("document", f"YAML error: {exc}") from None
    if data is None:
        raise ScenarioError("document", "empty scenario")
    return Scenario.from_dict(data)


def load(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def dumps(sc: Scenario) -> str:
    return yaml.safe_dump(sc.to_dict(), sort_keys=False, default_flow_style=None)


def get_field(d: dict, dotted: str):
    cur: Any = d
    for part in dotted.split("."):
        if not isinstance(cur, dict) or part not in cur:
            raise ScenarioError(dotted, "no such field")
        cur = cur[part]
    return cur


def set_field(sc: Scenario, dotted: str, value) -> Scenario:
    """Copy of ``sc`` with the scalar field at ``dotted`` replaced by ``value``."""
    d = sc.to_dict()
    current = get_field(d, dotted)
    if isinstance(current, (dict, list)):
        raise ScenarioError(dotted, "not a scalar field")
    parts = dotted.split(".")
    target = d
    for part in parts[:-1]:
        target = target[part]
    target[parts[-1]] = value
    return Scenario.from_dict(d)


# -- presets -----------------------------------------------------------------

_H10 = ((10.0, 0.0, 0.0), (0.0, 10.0, 0.0), (0.0, 0.0, 10.0))
_BOX = ((-10.0, 10.0), (-10.0, 10.0), (-10.0, 10.0))
_LORENZ_MODEL = ModelSpec("lorenz", (("a", 10.0), ("b", 28.0), ("c", 8.0 / 3.0)))
_LORENZ_CAPS = (1.0, 2.8, 0.8 / 3.0)


def _lorenz_preset(name, controller, t_end) -> Scenario:
    return Scenario(
        name=name,
        network=NetworkSpec(GraphSpec(generator="complete", size=50), _H10),
        model=_LORENZ_MODEL,
        mismatch=MismatchSpec(_LORENZ_CAPS, seed=0),
        assumptions=AssumptionsSpec(preset="lorenz-s4"),
        controller=controller,
        integration=IntegrationConfig(dt=1e-3, t_end=t_end, method="rk4", seed=0, x0_box=_BOX),
        output=OutputSpec(directory=f"out/{name}", stride=10, per_node=False),
    )


PRESETS = {
    "fig1": lambda: _lorenz_preset("fig1", ControllerSection("open_loop"), 20.0),
    "fig2-3": lambda: _lorenz_preset(
        "fig2-3", ControllerSection("decentralized", pins="all", z=10.0, k=1.0), 20.0),
    "fig4-5": lambda: _lorenz_preset(
        "fig4-5",
        ControllerSection("distributed", pins=(5, 16, 26, 35, 46), z=1.0, z_prime=1.0, k=10.0,
                          B=GraphSpec(generator="zero", size=50), C=GraphSpec(generator="path", size=50)),
        40.0),
}


def preset(name: str) -> Scenario:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ScenarioError("preset", f"unknown preset {name!r}; known: {sorted(PRESETS)}") from None


def with_seed(sc: Scenario, seed: int) -> Scenario:
    """Same scenario with both the mismatch draw and the initial states reseeded."""
    return replace(sc, mismatch=replace(sc.mismatch, seed=seed),
                   integration=replace(sc.integration, seed=seed))
