"""Bipartite states over a pair of systems.

A joint state is represented by a ``dim_A x dim_B`` matrix ``M``: the joint
probability of local effects ``e`` (first system) and ``f`` (second system)
is the bilinear pairing ``e^T M f``. Membership in the maximal tensor product
(normalization plus positivity on all product effects), extremality, the
inner-product property, and local-map pushforwards are explicit operations;
the :class:`JointState` container itself does not enforce membership, so
non-member matrices can be represented and analyzed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import (
    ModelSpec,
    Measurement,
    as_vector,
    models_similar,
    resolve_tol,
)

JOINT_STATE_SCHEMA_VERSION = 1


@dataclass(frozen=True, eq=False)
class JointState:
    """A bipartite state: matrix of the bilinear form on effect pairs.

    Rows index the first system, columns the second. Immutable; whether the
    matrix is actually a valid joint state is checked by
    :func:`in_max_tensor_product`, not at construction.
    """

    matrix: np.ndarray
    model_a: ModelSpec
    model_b: ModelSpec

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=float, copy=True)
        if m.shape != (self.model_a.dim, self.model_b.dim):
            raise ValueError(
                f"matrix shape {m.shape} does not match model dimensions "
                f"({self.model_a.dim}, {self.model_b.dim})"
            )
        if not np.all(np.isfinite(m)):
            raise ValueError("joint state matrix has non-finite entries")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    def to_dict(self, *, inline_models: bool = False) -> dict:
        return {
            "schema_version": JOINT_STATE_SCHEMA_VERSION,
            "model_A": self.model_a.to_dict() if inline_models else self.model_a.name,
            "model_B": self.model_b.to_dict() if inline_models else self.model_b.name,
            "matrix": self.matrix.tolist(),
        }

    def to_json(self, **kwargs) -> str:
        kwargs.setdefault("sort_keys", True)
        return json.dumps(self.to_dict(), **kwargs)


def joint_probability(state: JointState, effect_a, effect_b) -> float:
    """Joint probability of local effects: ``e_A^T M e_B``."""
    e = as_vector(effect_a, dim=state.model_a.dim)
    f = as_vector(effect_b, dim=state.model_b.dim)
    return float(e @ state.matrix @ f)


def product_state(model_a: ModelSpec, model_b: ModelSpec,
                  state_a, state_b) -> JointState:
    """Uncorrelated joint state of two local states (outer product matrix)."""
    wa = as_vector(state_a, dim=model_a.dim)
    wb = as_vector(state_b, dim=model_b.dim)
    return JointState(np.outer(wa, wb), model_a, model_b)


def normalization(state: JointState) -> float:
    """Pairing of the state with the product unit effect (1 for valid states)."""
    return float(state.model_a.unit_effect @ state.matrix @ state.model_b.unit_effect)


def local_positivity_margin(state: JointState) -> float:
    """Minimum of ``e_A^T M e_B`` over all extremal effect pairs.

    Non-negative (up to tolerance) exactly when the state assigns valid
    probabilities to every pair of proper effects, since proper effects are
    positive combinations of the ray-extremal ones and every listed extremal
    effect lies in the effect cone.
    """
    pairings = state.model_a.extremal_effects @ state.matrix @ state.model_b.extremal_effects.T
    return float(pairings.min())


def in_max_tensor_product(state: JointState, tol: float | None = None) -> bool:
    """Membership in the maximal tensor product of the two systems.

    Requires unit normalization and non-negative pairing with every product
    of extremal effects (sufficient for all product effects by convexity).
    """
    tol = resolve_tol(tol)
    if abs(normalization(state) - 1.0) > tol:
        return False
    return local_positivity_margin(state) >= -tol


def is_extremal(state: JointState, tol: float | None = None,
                rank_cutoff: float = 1e-8) -> bool:
    """Extremality of ``state`` in the maximal tensor product.

    A member of the polytope is extremal iff its active constraints, the
    product effects pairing to zero together with the normalization
    functional, span the full ``dim_A * dim_B``-dimensional space. The span
    is ranked by SVD with singular values below ``rank_cutoff`` times the
    largest treated as zero.

    Raises ``ValueError`` if the state is not in the maximal tensor product.
    """
    tol = resolve_tol(tol)
    if not in_max_tensor_product(state, tol):
        raise ValueError("state is not in the maximal tensor product")
    ea = state.model_a.extremal_effects
    eb = state.model_b.extremal_effects
    pairings = ea @ state.matrix @ eb.T
    rows = [np.outer(state.model_a.unit_effect, state.model_b.unit_effect).ravel()]
    for i, j in zip(*np.nonzero(pairings <= tol)):
        rows.append(np.outer(ea[i], eb[j]).ravel())
    stacked = np.stack(rows)
    s = np.linalg.svd(stacked, compute_uv=False)
    rank = int(np.sum(s > rank_cutoff * s[0]))
    return rank == state.model_a.dim * state.model_b.dim


@dataclass(frozen=True)
class InnerProductReport:
    """Result of the inner-product test: symmetry and positive semidefiniteness.

    ``asymmetry`` is the max-abs entry of ``M - M^T``; ``min_eigenvalue`` is
    the smallest eigenvalue of the symmetrized matrix; ``matrix_norm`` is the
    Frobenius norm used for the relative PSD threshold.
    """

    symmetric: bool
    psd: bool
    asymmetry: float
    min_eigenvalue: float
    matrix_norm: float

    @property
    def is_inner_product(self) -> bool:
        return self.symmetric and self.psd


def is_inner_product_state(state: JointState,
                           tol: float | None = None) -> InnerProductReport:
    """Test whether a joint state of two similar systems is an inner-product state.

    Such states are symmetric under swapping the effect arguments and
    non-negative on all squares ``(e, e)``; for the matrix form this is
    symmetry of ``M`` plus positive semidefiniteness of ``(M + M^T) / 2``
    (threshold relative to the Frobenius norm of ``M``).

    Raises ``ValueError`` when the two systems are not similar.
    """
    tol = resolve_tol(tol)
    if not models_similar(state.model_a, state.model_b, tol):
        raise ValueError("inner-product test requires two similar systems")
    m = state.matrix
    asymmetry = float(np.abs(m - m.T).max())
    norm = float(np.linalg.norm(m))
    eigs = np.linalg.eigvalsh((m + m.T) / 2.0)
    min_eig = float(eigs[0])
    return InnerProductReport(
        symmetric=asymmetry <= tol,
        psd=min_eig >= -tol * max(norm, 1e-300),
        asymmetry=asymmetry,
        min_eigenvalue=min_eig,
        matrix_norm=norm,
    )


def _check_local_map(tau: np.ndarray, model: ModelSpec, tol: float) -> None:
    """Raise unless ``tau`` preserves the state cone and the unit functional.

    Cone preservation is checked on the extremal states (sufficient by
    convexity), with membership certified against the ray-extremal effect
    generators of the dual cone.
    """
    if tau.shape != (model.dim, model.dim):
        raise ValueError(f"local map must be {model.dim}x{model.dim}, got {tau.shape}")
    u = model.unit_effect
    if not np.allclose(u @ tau, u, atol=tol, rtol=0.0):
        raise ValueError("local map does not preserve the unit functional")
    images = model.extremal_states @ tau.T  # rows: tau(omega_i)
    pairings = images @ model.extremal_effects.T
    if pairings.min() < -tol:
        raise ValueError("local map does not preserve the state cone")


def push_local_map(state: JointState, tau, tol: float | None = None) -> JointState:
    """Apply a cone- and unit-preserving linear map to the second system.

    Returns the pushed-forward state with matrix ``M @ tau^T``. Correlations
    of the result with effects ``f`` equal correlations of the original with
    the pulled-back effects ``tau^T f`` (see :func:`pull_back_measurement`).

    Raises ``ValueError`` if ``tau`` fails the cone or unit precondition.
    """
    tol = resolve_tol(tol)
    tau = np.asarray(tau, dtype=float)
    _check_local_map(tau, state.model_b, tol)
    return JointState(state.matrix @ tau.T, state.model_a, state.model_b)


def adjoint_effect(tau, effect) -> np.ndarray:
    """Pull an effect back through a local map: ``tau^T e``.

    Adjoint consistency: ``(tau^T e) . omega == e . (tau omega)`` for all
    states and effects.
    """
    tau = np.asarray(tau, dtype=float)
    e = np.asarray(effect, dtype=float)
    return tau.T @ e


def pull_back_measurement(tau, measurement: Measurement,
                          tol: float | None = None) -> Measurement:
    """Pull every outcome effect of a measurement back through ``tau``."""
    tau = np.asarray(tau, dtype=float)
    return Measurement(measurement.effects @ tau, measurement.model, tol=tol)
