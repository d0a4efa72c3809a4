"""Core types for single probabilistic systems.

States and effects share one representation: real coordinate vectors of a
common dimension. An effect ``e`` applied to a state ``omega`` yields the
outcome probability ``e . omega`` (Euclidean pairing), so the same array can
play either role depending on context. A :class:`ModelSpec` bundles the
extremal states, the extremal effects, and the unit effect of one system;
a :class:`Measurement` is a finite list of effects resolving the unit.

Numerical comparisons use a single global tolerance (:data:`DEFAULT_TOL`);
every checking function accepts a per-call ``tol`` override.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

DEFAULT_TOL = 1e-9

MODEL_SCHEMA_VERSION = 1


def resolve_tol(tol: float | None) -> float:
    """Return the effective tolerance: the global default when ``tol`` is None."""
    if tol is None:
        return DEFAULT_TOL
    tol = float(tol)
    if tol < 0.0:
        raise ValueError("tolerance must be non-negative")
    return tol


def as_vector(x, *, dim: int | None = None) -> np.ndarray:
    """Coerce ``x`` to a read-only 1-D float vector, checking finiteness."""
    v = np.array(x, dtype=float, copy=True)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"expected a non-empty 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite coordinates")
    if dim is not None and v.size != dim:
        raise ValueError(f"expected dimension {dim}, got {v.size}")
    v.flags.writeable = False
    return v


def _as_matrix(x, *, cols: int, name: str) -> np.ndarray:
    m = np.array(x, dtype=float, copy=True)
    if m.ndim != 2 or m.shape[1] != cols or m.shape[0] == 0:
        raise ValueError(f"{name} must be a non-empty 2-D array with {cols} columns")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    m.flags.writeable = False
    return m


def probability(effect, state) -> float:
    """Outcome probability of ``effect`` on ``state``: their Euclidean pairing.

    The pairing is bilinear; validity (a value in [0, 1]) is a property of the
    inputs, not enforced here.
    """
    e = np.asarray(effect, dtype=float)
    w = np.asarray(state, dtype=float)
    if e.shape != w.shape or e.ndim != 1:
        raise ValueError(f"dimension mismatch: effect {e.shape} vs state {w.shape}")
    return float(e @ w)


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """A single system: extremal states, extremal effects, and the unit effect.

    ``extremal_effects`` lists every extremal point of the effect body apart
    from 0 and the unit; ``ray_extremal`` flags which of those lie on extremal
    rays of the effect cone (some models have extremal effects that are
    positive combinations of other effects and hence not ray-extremal).
    Instances are immutable; arrays are stored read-only.
    """

    name: str
    dim: int
    extremal_states: np.ndarray
    extremal_effects: np.ndarray
    unit_effect: np.ndarray
    ray_extremal: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be a positive integer")
        object.__setattr__(
            self, "extremal_states",
            _as_matrix(self.extremal_states, cols=self.dim, name="extremal_states"),
        )
        object.__setattr__(
            self, "extremal_effects",
            _as_matrix(self.extremal_effects, cols=self.dim, name="extremal_effects"),
        )
        object.__setattr__(self, "unit_effect", as_vector(self.unit_effect, dim=self.dim))
        flags = self.ray_extremal
        if flags is None:
            flags = np.ones(self.extremal_effects.shape[0], dtype=bool)
        flags = np.array(flags, dtype=bool, copy=True)
        if flags.shape != (self.extremal_effects.shape[0],):
            raise ValueError("ray_extremal must have one flag per extremal effect")
        flags.flags.writeable = False
        object.__setattr__(self, "ray_extremal", flags)

    @property
    def n_states(self) -> int:
        return self.extremal_states.shape[0]

    @property
    def n_effects(self) -> int:
        return self.extremal_effects.shape[0]

    @property
    def ray_effects(self) -> np.ndarray:
        """The ray-extremal subset of ``extremal_effects`` (rows)."""
        return self.extremal_effects[self.ray_extremal]

    def to_dict(self) -> dict:
        return {
            "schema_version": MODEL_SCHEMA_VERSION,
            "name": self.name,
            "dim": self.dim,
            "extremal_states": self.extremal_states.tolist(),
            "extremal_effects": self.extremal_effects.tolist(),
            "unit_effect": self.unit_effect.tolist(),
            "ray_extremal": self.ray_extremal.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelSpec":
        return cls(
            name=str(data["name"]),
            dim=int(data["dim"]),
            extremal_states=data["extremal_states"],
            extremal_effects=data["extremal_effects"],
            unit_effect=data["unit_effect"],
            ray_extremal=data.get("ray_extremal"),
        )

    def to_json(self, **kwargs) -> str:
        kwargs.setdefault("sort_keys", True)
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "ModelSpec":
        return cls.from_dict(json.loads(text))


def models_similar(a: ModelSpec, b: ModelSpec, tol: float | None = None) -> bool:
    """Whether two systems are the same up to numerical noise (names ignored)."""
    tol = resolve_tol(tol)
    return (
        a.dim == b.dim
        and a.n_states == b.n_states
        and a.n_effects == b.n_effects
        and bool(np.array_equal(a.ray_extremal, b.ray_extremal))
        and bool(np.allclose(a.extremal_states, b.extremal_states, atol=tol, rtol=0.0))
        and bool(np.allclose(a.extremal_effects, b.extremal_effects, atol=tol, rtol=0.0))
        and bool(np.allclose(a.unit_effect, b.unit_effect, atol=tol, rtol=0.0))
    )


def is_proper_effect(effect, model: ModelSpec, tol: float | None = None) -> bool:
    """Whether ``effect`` gives probabilities in [0, 1] on every extremal state.

    By convexity this is equivalent to validity on every state of the model.
    """
    tol = resolve_tol(tol)
    e = as_vector(effect, dim=model.dim)
    p = model.extremal_states @ e
    return bool(np.all(p >= -tol) and np.all(p <= 1.0 + tol))


@dataclass(frozen=True)
class ValidationFailure:
    """One violated model invariant, with the offending indices."""

    code: str
    message: str
    indices: tuple[int, ...] = ()


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of :func:`validate_model`: data, not an exception.

    Collecting every failure lets a caller (e.g. the CLI) print all problems
    at once instead of stopping at the first.
    """

    failures: tuple[ValidationFailure, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        if self.ok:
            return "ok"
        return "; ".join(f.message for f in self.failures)


def validate_model(model: ModelSpec, tol: float | None = None) -> ValidationReport:
    """Check the semantic invariants of a model and report every violation.

    Checks: unit normalization of every extremal state, every extremal effect
    in range [0, 1] on every extremal state, and the extremal states affinely
    spanning a (dim-1)-dimensional set (full-dimensional state space).
    """
    tol = resolve_tol(tol)
    failures: list[ValidationFailure] = []

    norms = model.extremal_states @ model.unit_effect
    for i in np.flatnonzero(np.abs(norms - 1.0) > tol):
        failures.append(ValidationFailure(
            code="state-not-normalized",
            message=f"state {i} has unit pairing {norms[i]!r}, expected 1",
            indices=(int(i),),
        ))

    pairings = model.extremal_effects @ model.extremal_states.T  # (effects, states)
    bad = (pairings < -tol) | (pairings > 1.0 + tol)
    for ei, si in zip(*np.nonzero(bad)):
        failures.append(ValidationFailure(
            code="effect-out-of-range",
            message=(
                f"effect {ei} on state {si} gives {pairings[ei, si]!r}, "
                "outside [0, 1]"
            ),
            indices=(int(ei), int(si)),
        ))

    centered = model.extremal_states - model.extremal_states[0]
    s = np.linalg.svd(centered, compute_uv=False)
    rank = int(np.sum(s > 1e-12 * max(1.0, s[0] if s.size else 0.0)))
    if rank != model.dim - 1:
        failures.append(ValidationFailure(
            code="states-not-full-dimensional",
            message=(
                f"extremal states affinely span a {rank}-dimensional set, "
                f"expected {model.dim - 1}"
            ),
        ))

    return ValidationReport(failures=tuple(failures))


@dataclass(frozen=True, eq=False)
class Measurement:
    """A finite-outcome measurement: effects (rows) resolving the unit effect.

    Construction validates that every effect is proper for ``model`` and that
    the effects sum to the unit effect within ``tol``.
    """

    effects: np.ndarray
    model: ModelSpec
    tol: float | None = None

    def __post_init__(self) -> None:
        effects = _as_matrix(self.effects, cols=self.model.dim, name="effects")
        object.__setattr__(self, "effects", effects)
        tol = resolve_tol(self.tol)
        object.__setattr__(self, "tol", tol)
        total = effects.sum(axis=0)
        if not np.allclose(total, self.model.unit_effect, atol=tol, rtol=0.0):
            raise ValueError("measurement effects do not sum to the unit effect")
        for k, e in enumerate(effects):
            if not is_proper_effect(e, self.model, tol):
                raise ValueError(f"measurement outcome {k} is not a proper effect")

    @property
    def n_outcomes(self) -> int:
        return self.effects.shape[0]

    def outcome_probabilities(self, state) -> np.ndarray:
        """Probability of each outcome on ``state`` (sums to u . state)."""
        return self.effects @ np.asarray(state, dtype=float)


def dichotomic_measurement(model: ModelSpec, ray_index: int,
                           tol: float | None = None) -> Measurement:
    """Two-outcome measurement {e, u - e} from ray-extremal effect ``ray_index``."""
    rays = model.ray_effects
    if not 0 <= ray_index < rays.shape[0]:
        raise ValueError(
            f"ray index {ray_index} out of range (model has {rays.shape[0]} "
            "ray-extremal effects)"
        )
    e = rays[ray_index]
    return Measurement(np.stack([e, model.unit_effect - e]), model, tol=tol)


def simplex_model(n: int) -> ModelSpec:
    """Classical n-outcome system: the probability simplex in R^n.

    Extremal states are the standard basis vectors, extremal effects the
    coordinate read-outs, and the unit effect the all-ones vector.
    """
    if n < 2:
        raise ValueError("a classical system needs at least 2 levels")
    eye = np.eye(n)
    return ModelSpec(
        name=f"classical-{n}",
        dim=n,
        extremal_states=eye,
        extremal_effects=eye,
        unit_effect=np.ones(n),
    )
