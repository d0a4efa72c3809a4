"""Cone isomorphisms, weak/strong self-duality, and the induced joint states.

A model is weakly self-dual when some invertible linear map sends the effect
cone onto the state cone, and strongly self-dual when a symmetric positive
semidefinite such map exists. Every isomorphism T induces a bipartite joint
state through ``(e, f) -> f . T(e) / u . T(u)``.

The search enumerates candidate bijections between ray-extremal effect rays
and extremal state rays, then solves each candidate linearly. Two candidate
generators are available:

* ``dihedral`` sorts both ray families by angle around the cone axis and
  tries the 2k cyclic alignments. For three-dimensional cones this is
  complete, not a heuristic: a linear cone bijection maps two-dimensional
  faces to two-dimensional faces, so it preserves ray adjacency, and the
  only adjacency-preserving bijections of a k-cycle are the 2k dihedral
  ones.
* ``exhaustive`` tries all k! bijections (capped at 10 rays). Kept as a
  cross-check for the dihedral pruning and for models without a usable
  cyclic structure.

Per candidate, the unknowns are T plus one positive scale per ray; the
homogeneous system is solved by SVD null space. When the system is
underdetermined (simplicial cones, k = 3) the equal-scale member of the
solution family is taken as representative. Accepted solutions are
normalized to Frobenius norm 1 with the cone orientation (all ray scales
positive) fixing the sign.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .bipartite import JointState, in_max_tensor_product
from .core import ModelSpec, resolve_tol

EXHAUSTIVE_RAY_CAP = 10

_RESIDUAL_TOL = 1e-9


def _cycle_order(rays: np.ndarray) -> np.ndarray | None:
    """Indices sorting rays by angle on the u = 1 cut, or None if not planar-cyclic."""
    if rays.shape[1] != 3 or np.any(rays[:, 2] <= 0):
        return None
    angles = np.arctan2(rays[:, 1] / rays[:, 2], rays[:, 0] / rays[:, 2])
    return np.argsort(angles, kind="stable")


def _dihedral_bijections(n_rays: int, effect_order: np.ndarray,
                         state_order: np.ndarray):
    base = np.arange(n_rays)
    for offset in range(n_rays):
        for flip in (1, -1):
            perm = np.empty(n_rays, dtype=int)
            perm[effect_order] = state_order[(offset + flip * base) % n_rays]
            yield perm


def _solve_candidate(effects: np.ndarray, states: np.ndarray, perm: np.ndarray,
                     tol: float) -> np.ndarray | None:
    """Solve T e_i = scale_i * state_perm(i); return T or None.

    Builds the homogeneous system in (vec T, scales) and extracts its null
    space. A one-dimensional null space gives the candidate directly; a
    larger one is re-solved with all scales tied together, which picks the
    isometry-like member of the family. The sign is fixed by requiring
    positive scales, the global magnitude by Frobenius normalization.
    """
    k, d = effects.shape
    rows = []
    for i in range(k):
        block = np.zeros((d, d * d + k))
        for r in range(d):
            block[r, r * d:(r + 1) * d] = effects[i]
        block[:, d * d + i] = -states[perm[i]]
        rows.append(block)
    a = np.vstack(rows)

    def null_space(mat: np.ndarray) -> np.ndarray:
        _, sv, vt = np.linalg.svd(mat)
        cutoff = max(sv[0], 1.0) * 1e-10 if sv.size else 0.0
        n_null = mat.shape[1] - np.count_nonzero(sv > cutoff)
        return vt[mat.shape[1] - n_null:]

    basis = null_space(a)
    if basis.shape[0] > 1:
        ties = np.zeros((k - 1, d * d + k))
        for i in range(k - 1):
            ties[i, d * d + i] = 1.0
            ties[i, d * d + i + 1] = -1.0
        basis = null_space(np.vstack([a, ties]))
    if basis.shape[0] != 1:
        return None

    vec = basis[0]
    scales = vec[d * d:]
    if np.all(scales > 0):
        pass
    elif np.all(scales < 0):
        vec = -vec
        scales = vec[d * d:]
    else:
        return None
    t = vec[:d * d].reshape(d, d)
    norm = np.linalg.norm(t)
    if norm < tol or np.min(scales) < tol * norm:
        return None
    t = t / norm
    scales = scales / norm
    residual = np.abs(effects @ t.T - scales[:, None] * states[perm]).max()
    if residual > _RESIDUAL_TOL:
        return None
    if abs(np.linalg.det(t)) < 1e-9:
        return None
    return t


def find_cone_isomorphisms(model: ModelSpec, tol: float | None = None,
                           method: str = "auto") -> list[np.ndarray]:
    """All linear bijections effect cone -> state cone, up to positive scale.

    Returns Frobenius-normalized matrices in a deterministic canonical
    order; the empty list means the search found no isomorphism (so the
    model is not weakly self-dual, for the model families this search is
    complete on). Ray counts must match, otherwise no bijection exists.
    """
    tol = resolve_tol(tol)
    effects = model.ray_effects
    states = model.extremal_states
    k = effects.shape[0]
    if k != states.shape[0] or k == 0:
        return []

    if method not in ("auto", "dihedral", "exhaustive"):
        raise ValueError(f"unknown search method {method!r}")
    if method == "exhaustive" and k > EXHAUSTIVE_RAY_CAP:
        raise ValueError(f"exhaustive search is capped at {EXHAUSTIVE_RAY_CAP} rays")

    if method in ("auto", "dihedral"):
        effect_order = _cycle_order(effects)
        state_order = _cycle_order(states)
        if effect_order is None or state_order is None:
            if method == "dihedral":
                raise ValueError("model rays admit no angular cycle ordering")
            if k > EXHAUSTIVE_RAY_CAP:
                raise ValueError(
                    "model rays admit no angular cycle ordering and exceed "
                    f"the exhaustive cap of {EXHAUSTIVE_RAY_CAP}"
                )
            candidates = (np.array(p) for p in itertools.permutations(range(k)))
        else:
            candidates = _dihedral_bijections(k, effect_order, state_order)
    else:
        candidates = (np.array(p) for p in itertools.permutations(range(k)))

    found: dict[tuple, np.ndarray] = {}
    for perm in candidates:
        t = _solve_candidate(effects, states, perm, tol)
        if t is None:
            continue
        key = tuple(np.round(t, 8).ravel())
        found.setdefault(key, t)
    return [found[key] for key in sorted(found)]


def is_strongly_self_dual(model: ModelSpec, tol: float | None = None,
                          method: str = "auto") -> tuple[bool, np.ndarray | None]:
    """(True, witness) when a symmetric PSD cone isomorphism exists.

    Filters the isomorphism list for max |T - T^T| <= tol and minimum
    eigenvalue >= -tol, returning the first witness in canonical order.
    """
    tol = resolve_tol(tol)
    for t in find_cone_isomorphisms(model, tol, method=method):
        if np.abs(t - t.T).max() > tol:
            continue
        if np.linalg.eigvalsh((t + t.T) / 2.0)[0] < -tol:
            continue
        return True, t
    return False, None


def state_from_isomorphism(t, model: ModelSpec,
                           tol: float | None = None) -> JointState:
    """The joint state induced by a cone isomorphism: matrix T^T / (u . T u).

    The pairing then satisfies e^T M f = f . T(e) / u . T(u). Raises
    ``ValueError`` when u . T u <= 0 and ``ArithmeticError`` when the result
    fails normalization or local positivity, which cannot happen for a
    genuine isomorphism.
    """
    tol = resolve_tol(tol)
    t = np.asarray(t, dtype=float)
    u = model.unit_effect
    height = float(u @ t @ u)
    if height <= 0:
        raise ValueError(f"u . T u = {height!r} must be positive")
    state = JointState(matrix=t.T / height, model_a=model, model_b=model)
    if abs(float(u @ state.matrix @ u) - 1.0) > tol:
        raise ArithmeticError("induced state failed normalization")
    if not in_max_tensor_product(state, tol):
        raise ArithmeticError("induced state failed local positivity")
    return state


def induced_state_symmetries(isomorphisms: list[np.ndarray],
                             tol: float | None = None) -> list[np.ndarray]:
    """The state-cone automorphisms T_i T_j^{-1}, Frobenius-normalized, deduped."""
    resolve_tol(tol)
    symmetries: dict[tuple, np.ndarray] = {}
    for ti in isomorphisms:
        for tj in isomorphisms:
            s = ti @ np.linalg.inv(tj)
            s = s / np.linalg.norm(s)
            symmetries.setdefault(tuple(np.round(s, 8).ravel()), s)
    return [symmetries[key] for key in sorted(symmetries)]


def certain_state_counts(model: ModelSpec, tol: float | None = None) -> list[int]:
    """Per ray-extremal effect, how many extremal states it accepts with certainty.

    Diagnostic for the uniqueness question: a count above 1 means the effect
    occurs with probability one on several distinct extremal states.
    """
    tol = resolve_tol(tol)
    pairings = model.ray_effects @ model.extremal_states.T
    return [int(np.sum(np.abs(row - 1.0) <= tol)) for row in pairings]


def random_extremal_joint_state(model_a: ModelSpec, rng: np.random.Generator,
                                model_b: ModelSpec | None = None) -> JointState:
    """A random vertex of the maximal tensor product polytope.

    Maximizes a random linear functional over the normalized locally
    positive matrices by linear programming; the optimum of a generic
    objective over a polytope is a vertex, i.e. an extremal joint state.
    Part of the falsification harness for bound conjectures: it asserts
    nothing beyond feasibility.
    """
    from scipy.optimize import linprog

    if model_b is None:
        model_b = model_a
    da, db = model_a.dim, model_b.dim
    rows = [-np.kron(e, f) for e in model_a.ray_effects for f in model_b.ray_effects]
    res = linprog(
        c=rng.standard_normal(da * db),
        A_ub=np.array(rows),
        b_ub=np.zeros(len(rows)),
        A_eq=np.kron(model_a.unit_effect, model_b.unit_effect)[None, :],
        b_eq=np.ones(1),
        bounds=(None, None),
        method="highs",
    )
    if not res.success:
        raise RuntimeError(f"vertex search failed: {res.message}")
    return JointState(matrix=res.x.reshape(da, db), model_a=model_a, model_b=model_b)


def rotation_about_axis(angle: float) -> np.ndarray:
    """Rotation by ``angle`` in the plane orthogonal to the cone axis."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
