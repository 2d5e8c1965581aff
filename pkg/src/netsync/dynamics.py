"""Node vector fields, mismatch ensembles and the assumption bounds.

A model acts on a batch of node states shaped ``(N, n)``; ``drift`` returns
``(N, n)`` and ``mismatch_basis`` returns ``(N, n, m)``. Models whose basis
has structure (the Lorenz basis is diagonal) override
:meth:`OscillatorModel.apply_mismatch` and
:meth:`OscillatorModel.apply_mismatch_transpose` to skip the dense products.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ValidationError

__all__ = [
    "OscillatorModel",
    "LorenzModel",
    "LinearDecayModel",
    "MismatchEnsemble",
    "UncertaintyBound",
    "QuadBound",
    "lorenz_drift",
    "lorenz_mismatch_basis",
    "sample_mismatches",
    "sinusoidal_modulation",
    "corner_gamma_c",
    "register_model",
    "make_model",
    "MODEL_REGISTRY",
    "LORENZ_PARAMS",
    "LORENZ_F",
    "LORENZ_GAMMA",
    "lorenz_bounds",
    "lorenz_assumptions",
]

LORENZ_PARAMS = (10.0, 28.0, 8.0 / 3.0)

# QUAD matrix and mismatch-energy bound for the Lorenz network example
LORENZ_F = ((21.0, 10.0, 0.0), (28.0, 23.0, 0.0), (0.0, 0.0, 40.0))
LORENZ_GAMMA = ((213.0, 0.0, 0.0), (0.0, 400.0, 0.0), (0.0, 0.0, 2500.0))


def lorenz_drift(x, params=LORENZ_PARAMS):
    """Nominal Lorenz vector field; works on a single state or a batch ``(..., 3)``."""
    a, b, c = params
    x = np.asarray(x, dtype=float)
    x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
    return np.stack([a * (x2 - x1), b * x1 - x2 - x1 * x3, x1 * x2 - c * x3], axis=-1)


def _lorenz_basis_diag(x):
    x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
    return np.stack([x2 - x1, x1, -x3], axis=-1)


def lorenz_mismatch_basis(x):
    """``G(x) = diag(x2 - x1, x1, -x3)``; shape ``(..., 3, 3)``."""
    x = np.asarray(x, dtype=float)
    d = _lorenz_basis_diag(x)
    out = np.zeros(x.shape[:-1] + (3, 3))
    idx = np.arange(3)
    out[..., idx, idx] = d
    return out


@dataclass(frozen=True)
class OscillatorModel:
    """Node dynamics ``x' = drift(x) + mismatch_basis(x) @ gamma``."""

    name: str
    state_dim: int
    mismatch_dim: int
    drift: Callable[[np.ndarray], np.ndarray]
    mismatch_basis: Callable[[np.ndarray], np.ndarray]
    params: tuple = ()

    def __post_init__(self):
        if self.state_dim < 1 or self.mismatch_dim < 1:
            raise ValidationError("state and mismatch dimensions must be positive")

    def apply_mismatch(self, x, gamma):
        """Row-wise ``G(x_i) @ gamma_i``."""
        return np.einsum("...ij,...j->...i", self.mismatch_basis(x), gamma)

    def apply_mismatch_transpose(self, x, v):
        """Row-wise ``G(x_i).T @ v_i``."""
        return np.einsum("...ji,...j->...i", self.mismatch_basis(x), v)


class LorenzModel(OscillatorModel):
    def __init__(self, a: float = LORENZ_PARAMS[0], b: float = LORENZ_PARAMS[1],
                 c: float = LORENZ_PARAMS[2]):
        params = (float(a), float(b), float(c))
        super().__init__(
            name="lorenz",
            state_dim=3,
            mismatch_dim=3,
            drift=lambda x: lorenz_drift(x, params),
            mismatch_basis=lorenz_mismatch_basis,
            params=params,
        )

    @property
    def a(self):
        return self.params[0]

    @property
    def b(self):
        return self.params[1]

    @property
    def c(self):
        return self.params[2]

    def apply_mismatch(self, x, gamma):
        return _lorenz_basis_diag(x) * gamma

    def apply_mismatch_transpose(self, x, v):
        return _lorenz_basis_diag(x) * v


class LinearDecayModel(OscillatorModel):
    """``x' = -rate * x + diag(x) gamma``. Used to check integrator order."""

    def __init__(self, dim: int = 1, rate: float = 1.0):
        rate = float(rate)
        super().__init__(
            name="linear",
            state_dim=int(dim),
            mismatch_dim=int(dim),
            drift=lambda x: -rate * np.asarray(x, dtype=float),
            mismatch_basis=lambda x: np.asarray(x, dtype=float)[..., :, None] * np.eye(int(dim)),
            params=(int(dim), rate),
        )

    def apply_mismatch(self, x, gamma):
        return x * gamma

    def apply_mismatch_transpose(self, x, v):
        return x * v


MODEL_REGISTRY: dict[str, Callable[..., OscillatorModel]] = {}


def register_model(name: str):
    """Class/factory decorator making a model available to scenario files by name."""
    def deco(factory):
        MODEL_REGISTRY[name] = factory
        return factory
    return deco


register_model("lorenz")(LorenzModel)
register_model("linear")(LinearDecayModel)


def make_model(name: str, **params) -> OscillatorModel:
    try:
        factory = MODEL_REGISTRY[name]
    except KeyError:
        raise ValidationError(f"unknown model {name!r}; known: {sorted(MODEL_REGISTRY)}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise ValidationError(f"bad parameters for model {name!r}: {exc}") from None


def _check_bounds(bounds) -> np.ndarray:
    b = np.asarray(bounds, dtype=float)
    if b.ndim != 1:
        raise ValidationError("mismatch bounds must be a vector")
    if not np.all(np.isfinite(b)) or np.any(b < 0):
        raise ValidationError(f"mismatch bounds must be finite and nonnegative, got {b.tolist()}")
    return b


@dataclass(frozen=True, eq=False)
class MismatchEnsemble:
    """Per-node mismatch vectors (row ``i`` is node ``i``) and their caps.

    ``time_varying`` optionally maps ``t`` to an ``(N, m)`` array that
    replaces ``gammas``; it must respect ``bounds`` for every ``t``.
    """

    gammas: np.ndarray
    bounds: np.ndarray
    time_varying: Optional[Callable[[float], np.ndarray]] = field(default=None, compare=False)

    def __post_init__(self):
        g = np.array(self.gammas, dtype=float)
        b = _check_bounds(self.bounds)
        if g.ndim != 2 or g.shape[1] != b.shape[0]:
            raise ValidationError(f"gammas shape {g.shape} does not match {b.shape[0]} bounds")
        if np.any(np.abs(g) > b):
            raise ValidationError("some mismatch exceeds its bound")
        g.setflags(write=False)
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "gammas", g)
        object.__setattr__(self, "bounds", b)

    @property
    def n_nodes(self) -> int:
        return self.gammas.shape[0]

    def at(self, t: float) -> np.ndarray:
        if self.time_varying is None:
            return self.gammas
        return self.time_varying(t)

    def with_time_variation(self, fn) -> "MismatchEnsemble":
        return MismatchEnsemble(self.gammas, self.bounds, fn)


def sample_mismatches(n_nodes: int, bounds, seed: int) -> MismatchEnsemble:
    """Draw ``gamma[i, j]`` uniformly from ``[-bounds[j], bounds[j]]``."""
    b = _check_bounds(bounds)
    if n_nodes < 1:
        raise ValidationError("need at least one node")
    rng = np.random.default_rng(seed)
    gammas = rng.uniform(-1.0, 1.0, size=(n_nodes, b.shape[0])) * b
    return MismatchEnsemble(gammas, b)


def sinusoidal_modulation(gammas, frequency: float):
    """``gamma_i(t) = gamma_i * cos(frequency * t)``; stays inside the constant box."""
    g = np.array(gammas, dtype=float)
    w = float(frequency)
    return lambda t: g * np.cos(w * t)


def corner_gamma_c(bounds) -> np.ndarray:
    """Worst-case mismatch vector: the positive corner of the mismatch box."""
    return _check_bounds(bounds).copy()


@dataclass(frozen=True, eq=False)
class UncertaintyBound:
    """Symmetric PSD ``Gamma`` and vector ``gamma_c`` bounding ``|G(x) gamma|^2``."""

    Gamma: np.ndarray
    gamma_c: np.ndarray

    def __post_init__(self):
        gm = np.array(self.Gamma, dtype=float)
        gc = np.array(self.gamma_c, dtype=float)
        if gm.ndim != 2 or gm.shape[0] != gm.shape[1]:
            raise ValidationError(f"Gamma must be square, got shape {gm.shape}")
        if gc.shape != (gm.shape[0],):
            raise ValidationError(f"gamma_c must have length {gm.shape[0]}")
        if not (np.all(np.isfinite(gm)) and np.all(np.isfinite(gc))):
            raise ValidationError("Gamma and gamma_c must be finite")
        if np.max(np.abs(gm - gm.T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(gm))):
            raise ValidationError("Gamma must be symmetric")
        from .graph import symmetric_eigenvalues

        if symmetric_eigenvalues(gm)[0] < -1e-9:
            raise ValidationError("Gamma must be positive semidefinite")
        gm.setflags(write=False)
        gc.setflags(write=False)
        object.__setattr__(self, "Gamma", gm)
        object.__setattr__(self, "gamma_c", gc)

    @property
    def worst_case(self) -> float:
        """``gamma_c^T Gamma gamma_c``."""
        return float(self.gamma_c @ self.Gamma @ self.gamma_c)


@dataclass(frozen=True, eq=False)
class QuadBound:
    """Matrix ``F`` of the one-sided Lipschitz (QUAD) bound on the drift."""

    F: np.ndarray

    def __post_init__(self):
        f = np.array(self.F, dtype=float)
        if f.ndim != 2 or f.shape[0] != f.shape[1]:
            raise ValidationError(f"F must be square, got shape {f.shape}")
        if not np.all(np.isfinite(f)):
            raise ValidationError("F must be finite")
        f.setflags(write=False)
        object.__setattr__(self, "F", f)

    @property
    def n(self) -> int:
        return self.F.shape[0]


def lorenz_bounds(params=LORENZ_PARAMS, fraction: float = 0.1) -> np.ndarray:
    return fraction * np.abs(np.asarray(params, dtype=float))


def lorenz_assumptions(params=LORENZ_PARAMS):
    """(QuadBound, UncertaintyBound) for the 10%-mismatch Lorenz network."""
    return QuadBound(LORENZ_F), UncertaintyBound(LORENZ_GAMMA, corner_gamma_c(lorenz_bounds(params)))
