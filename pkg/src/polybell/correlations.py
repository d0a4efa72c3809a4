"""Correlation tables and two-party Bell functionals.

A :class:`CorrelationTable` holds the joint outcome distribution for every
pair of measurement settings. On top of it live the standard dichotomic
functionals: the CHSH combination and its maximum over settings (scanned
exactly, and in closed form for the polygon entangled states), the chained
N-setting combination, the quadratic Uffink combination, and the noise
decomposition of the polygon correlations into an extremal no-signalling
box plus a perfectly correlated local table.

Outcome sign convention: outcome 0 maps to +1 and outcome 1 to -1 in every
correlator, so for a dichotomic pair ``E = (2 e - u)_A^T M (2 f - u)_B``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .bipartite import JointState
from .core import Measurement, ModelSpec, dichotomic_measurement, resolve_tol
from .polygon import max_entangled, polygon

TSIRELSON_BOUND = 2.0 * math.sqrt(2.0)

_DISTRIBUTION_TOL = 1e-10
_NO_SIGNALLING_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class CorrelationTable:
    """Joint probabilities ``probs[a, b, x, y]`` for settings x, y.

    The dense array is zero-padded up to the largest outcome count on each
    side; ``outcomes_a``/``outcomes_b`` record the true count per setting.
    Construction validates that every (x, y) slice is a probability
    distribution and that the marginals obey no-signalling.
    """

    probs: np.ndarray
    outcomes_a: tuple[int, ...]
    outcomes_b: tuple[int, ...]

    def __post_init__(self) -> None:
        probs = np.array(self.probs, dtype=float, copy=True)
        outcomes_a = tuple(int(k) for k in self.outcomes_a)
        outcomes_b = tuple(int(k) for k in self.outcomes_b)
        object.__setattr__(self, "outcomes_a", outcomes_a)
        object.__setattr__(self, "outcomes_b", outcomes_b)
        if probs.ndim != 4:
            raise ValueError("probs must be a 4-D array indexed [a, b, x, y]")
        n_x, n_y = probs.shape[2], probs.shape[3]
        if len(outcomes_a) != n_x or len(outcomes_b) != n_y:
            raise ValueError("outcome counts must list one entry per setting")
        if n_x == 0 or n_y == 0:
            raise ValueError("need at least one setting per side")
        if min(outcomes_a) < 1 or min(outcomes_b) < 1:
            raise ValueError("every setting needs at least one outcome")
        if max(outcomes_a) > probs.shape[0] or max(outcomes_b) > probs.shape[1]:
            raise ValueError("probs array too small for the declared outcome counts")
        if not np.all(np.isfinite(probs)):
            raise ValueError("probabilities must be finite")

        neg_tol = resolve_tol(None)
        for x in range(n_x):
            for y in range(n_y):
                block = probs[:, :, x, y]
                ra, rb = outcomes_a[x], outcomes_b[y]
                if np.any(block[ra:, :] != 0.0) or np.any(block[:, rb:] != 0.0):
                    raise ValueError(
                        f"padding beyond the declared outcomes of ({x}, {y}) "
                        "must be exactly zero"
                    )
                live = block[:ra, :rb]
                if live.min() < -neg_tol:
                    raise ValueError(
                        f"negative probability {live.min()!r} at settings ({x}, {y})"
                    )
                if abs(live.sum() - 1.0) > _DISTRIBUTION_TOL:
                    raise ValueError(
                        f"probabilities at settings ({x}, {y}) sum to {live.sum()!r}"
                    )

        # No-signalling: each side's marginal must not depend on the far setting.
        marg_a = probs.sum(axis=1)  # (a, x, y)
        if np.abs(marg_a - marg_a[:, :, :1]).max() > _NO_SIGNALLING_TOL:
            raise ValueError("first party's marginals depend on the far setting")
        marg_b = probs.sum(axis=0)  # (b, x, y)
        if np.abs(marg_b - marg_b[:, :1, :]).max() > _NO_SIGNALLING_TOL:
            raise ValueError("second party's marginals depend on the far setting")

        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)

    @property
    def n_settings_a(self) -> int:
        return self.probs.shape[2]

    @property
    def n_settings_b(self) -> int:
        return self.probs.shape[3]

    # -- flat outcome labeling ------------------------------------------------
    # Outcomes of all settings on one side, concatenated in setting order:
    # flat index i corresponds to setting x(i) and outcome a(i).

    @property
    def flat_offsets_a(self) -> tuple[int, ...]:
        return tuple(np.concatenate([[0], np.cumsum(self.outcomes_a)]).tolist())

    @property
    def flat_offsets_b(self) -> tuple[int, ...]:
        return tuple(np.concatenate([[0], np.cumsum(self.outcomes_b)]).tolist())

    def flat_index_a(self, x: int, a: int) -> int:
        if not 0 <= a < self.outcomes_a[x]:
            raise ValueError(f"setting {x} has no outcome {a}")
        return self.flat_offsets_a[x] + a

    def flat_index_b(self, y: int, b: int) -> int:
        if not 0 <= b < self.outcomes_b[y]:
            raise ValueError(f"setting {y} has no outcome {b}")
        return self.flat_offsets_b[y] + b

    def setting_of_flat_a(self, i: int) -> tuple[int, int]:
        offs = self.flat_offsets_a
        x = int(np.searchsorted(offs, i, side="right")) - 1
        if not 0 <= i < offs[-1]:
            raise ValueError(f"flat index {i} out of range")
        return x, i - offs[x]

    def setting_of_flat_b(self, j: int) -> tuple[int, int]:
        offs = self.flat_offsets_b
        y = int(np.searchsorted(offs, j, side="right")) - 1
        if not 0 <= j < offs[-1]:
            raise ValueError(f"flat index {j} out of range")
        return y, j - offs[y]

    def flat_joint(self) -> np.ndarray:
        """P(i, j) over flat outcome labels (block (x, y) holds that slice)."""
        offs_a, offs_b = self.flat_offsets_a, self.flat_offsets_b
        out = np.zeros((offs_a[-1], offs_b[-1]))
        for x, ra in enumerate(self.outcomes_a):
            for y, rb in enumerate(self.outcomes_b):
                out[offs_a[x]:offs_a[x] + ra, offs_b[y]:offs_b[y] + rb] = \
                    self.probs[:ra, :rb, x, y]
        return out

    def flat_marginal_a(self) -> np.ndarray:
        """P_A(i) over flat labels (far setting irrelevant by no-signalling)."""
        offs = self.flat_offsets_a
        out = np.zeros(offs[-1])
        for x, ra in enumerate(self.outcomes_a):
            out[offs[x]:offs[x] + ra] = self.probs[:ra, :, x, 0].sum(axis=1)
        return out

    def flat_marginal_b(self) -> np.ndarray:
        offs = self.flat_offsets_b
        out = np.zeros(offs[-1])
        for y, rb in enumerate(self.outcomes_b):
            out[offs[y]:offs[y] + rb] = self.probs[:, :rb, 0, y].sum(axis=0)
        return out


def correlations_from_state(state: JointState,
                            meas_a: Sequence[Measurement],
                            meas_b: Sequence[Measurement]) -> CorrelationTable:
    """Tabulate joint probabilities of the given local measurements on a state."""
    meas_a = list(meas_a)
    meas_b = list(meas_b)
    if not meas_a or not meas_b:
        raise ValueError("need at least one measurement per side")
    for m in meas_a:
        if m.model.dim != state.model_a.dim:
            raise ValueError("first-side measurement does not fit the first system")
    for m in meas_b:
        if m.model.dim != state.model_b.dim:
            raise ValueError("second-side measurement does not fit the second system")
    outcomes_a = tuple(m.n_outcomes for m in meas_a)
    outcomes_b = tuple(m.n_outcomes for m in meas_b)
    probs = np.zeros((max(outcomes_a), max(outcomes_b), len(meas_a), len(meas_b)))
    for x, ma in enumerate(meas_a):
        left = ma.effects @ state.matrix
        for y, mb in enumerate(meas_b):
            probs[:outcomes_a[x], :outcomes_b[y], x, y] = left @ mb.effects.T
    return CorrelationTable(probs, outcomes_a, outcomes_b)


def ray_settings(model: ModelSpec, k: int,
                 tol: float | None = None) -> list[Measurement]:
    """The first k dichotomic settings {e_i, u - e_i} over ray-extremal effects."""
    return [dichotomic_measurement(model, i, tol=tol) for i in range(k)]


def correlator(table: CorrelationTable, x: int, y: int) -> float:
    """Dichotomic correlator E(x, y) with outcome 0 -> +1, outcome 1 -> -1."""
    if table.outcomes_a[x] != 2 or table.outcomes_b[y] != 2:
        raise ValueError(f"correlator needs dichotomic settings, got ({x}, {y})")
    p = table.probs[:2, :2, x, y]
    return float(p[0, 0] + p[1, 1] - p[0, 1] - p[1, 0])


def correlator_matrix(table: CorrelationTable) -> np.ndarray:
    """All correlators E(x, y); requires every setting to be dichotomic."""
    if any(k != 2 for k in table.outcomes_a) or any(k != 2 for k in table.outcomes_b):
        raise ValueError("correlator matrix needs dichotomic settings throughout")
    p = table.probs
    return p[0, 0] + p[1, 1] - p[0, 1] - p[1, 0]


def chsh(table: CorrelationTable, x0: int = 0, x1: int = 1,
         y0: int = 0, y1: int = 1) -> float:
    """|E(x0,y0) + E(x0,y1) + E(x1,y0) - E(x1,y1)|."""
    return abs(
        correlator(table, x0, y0) + correlator(table, x0, y1)
        + correlator(table, x1, y0) - correlator(table, x1, y1)
    )


def uffink(table: CorrelationTable, x0: int = 0, x1: int = 1,
           y0: int = 0, y1: int = 1) -> float:
    """Quadratic combination (E(x0,y0) + E(x1,y0))^2 + (E(x0,y1) - E(x1,y1))^2."""
    e00 = correlator(table, x0, y0)
    e01 = correlator(table, x0, y1)
    e10 = correlator(table, x1, y0)
    e11 = correlator(table, x1, y1)
    return (e00 + e10) ** 2 + (e01 - e11) ** 2


def chained(table: CorrelationTable, n_settings: int) -> float:
    """Chained combination over settings 0..N-1 on each side.

    |sum_{j<N-1} (E(j,j) + E(j,j+1)) + E(N-1,N-1) - E(N-1,0)|; local tables
    obey the bound 2N - 2, while the algebraic maximum is 2N.
    """
    n = int(n_settings)
    if n < 2:
        raise ValueError("chained combination needs at least 2 settings")
    if table.n_settings_a < n or table.n_settings_b < n:
        raise ValueError(f"table has fewer than {n} settings per side")
    total = 0.0
    for j in range(n - 1):
        total += correlator(table, j, j) + correlator(table, j, j + 1)
    total += correlator(table, n - 1, n - 1) - correlator(table, n - 1, 0)
    return abs(total)


def chained_local_bound(n_settings: int) -> float:
    """Largest chained value over local deterministic tables: 2N - 2."""
    return 2.0 * int(n_settings) - 2.0


def chsh_max_over_settings(state: JointState) -> tuple[float, tuple[int, int, int, int]]:
    """Exact CHSH maximum over dichotomic ray-extremal settings on a state.

    Scans every ordered choice (i0, i1, j0, j1) of ray-extremal effects for
    the two settings per side, with measurement {e_i, u - e_i}. Returns the
    maximum |S| and its argmax, ties broken by smallest (i0, i1, j0, j1) in
    lexicographic order. Outcome relabellings never beat this scan: a sign
    flip of one setting's correlator row is absorbed by repositioning the
    minus sign, which the ordered scan already covers.
    """
    ga = 2.0 * state.model_a.ray_effects - state.model_a.unit_effect
    gb = 2.0 * state.model_b.ray_effects - state.model_b.unit_effect
    e = ga @ state.matrix @ gb.T
    n_a, n_b = e.shape
    # diff[i1, j0, j1] = E[i1, j0] - E[i1, j1]; the i0 block adds E[i0, j0] + E[i0, j1].
    diff = e[:, :, None] - e[:, None, :]
    best = -np.inf
    best_idx = (0, 0, 0, 0)
    for i0 in range(n_a):
        block = np.abs((e[i0][:, None] + e[i0][None, :])[None, :, :] + diff)
        flat = int(np.argmax(block))
        val = float(block.ravel()[flat])
        if val > best:
            i1, j0, j1 = np.unravel_index(flat, block.shape)
            best = val
            best_idx = (i0, int(i1), int(j0), int(j1))
    return best, best_idx


def chsh_max_bruteforce(n: int) -> tuple[float, tuple[int, int, int, int]]:
    """CHSH maximum of the n-vertex entangled state by exhaustive scan."""
    return chsh_max_over_settings(max_entangled(n))


# -- analytic CHSH maximum ----------------------------------------------------
#
# In angle coordinates the scan above becomes: pick alpha_x from the first
# side's admissible angles and beta_y from the second side's, and evaluate
#
#   even n:  S = sec(pi/n) |sum_xy (-1)^{xy} cos(alpha_x - beta_y)|
#   odd n:   S = 2/(1+sec)^2 |(sec-1)^2 + 2 sec sum_xy (-1)^{xy} cos(alpha_x - beta_y)|
#
# with sec = sec(pi/n). Admissible angles are multiples of 2 pi / n on the
# first side; on the second side, odd multiples of pi/n for even n and
# multiples of 2 pi / n for odd n. The unconstrained optimum of the cosine
# sum is reached by two angle quadruples (one maximizing, one minimizing the
# sum); the constrained optimum is obtained by rounding each free angle to
# its admissible neighbours and taking the best combination.

_FREE_ANGLE_SETS = (
    (0.0, math.pi / 2, math.pi / 4, -math.pi / 4),
    (0.0, math.pi / 2, -3 * math.pi / 4, 3 * math.pi / 4),
)


def _chsh_at_angles(n: int, a0: float, a1: float, b0: float, b1: float) -> float:
    sigma = (
        math.cos(a0 - b0) + math.cos(a0 - b1)
        + math.cos(a1 - b0) - math.cos(a1 - b1)
    )
    sec = 1.0 / math.cos(math.pi / n)
    if n % 2 == 0:
        return abs(sec * sigma)
    return (2.0 / (1.0 + sec) ** 2) * abs((sec - 1.0) ** 2 + 2.0 * sec * sigma)


def _admissible_neighbours(target: float, step: float, offset: float) -> tuple[float, float]:
    k = math.floor((target - offset) / step)
    return (offset + k * step, offset + (k + 1) * step)


def chsh_max_analytic(n: int) -> float:
    """CHSH maximum of the n-vertex entangled state, no exhaustive scan.

    Rounds both free-optimum angle quadruples to the admissible polygon
    angles (both neighbours of each angle) and returns the best evaluation;
    agrees with :func:`chsh_max_bruteforce` to within float error.
    """
    if n < 3:
        raise ValueError("polygon models need at least 3 vertices")
    step = 2.0 * math.pi / n
    b_offset = math.pi / n if n % 2 == 0 else 0.0
    best = 0.0
    for a0t, a1t, b0t, b1t in _FREE_ANGLE_SETS:
        for a0 in _admissible_neighbours(a0t, step, 0.0):
            for a1 in _admissible_neighbours(a1t, step, 0.0):
                for b0 in _admissible_neighbours(b0t, step, b_offset):
                    for b1 in _admissible_neighbours(b1t, step, b_offset):
                        best = max(best, _chsh_at_angles(n, a0, a1, b0, b1))
    return best


def chsh_max_closed_form(n: int) -> float:
    """Closed-form CHSH maximum keyed on the residue class n mod 8.

    Serves as a cross-check of :func:`chsh_max_analytic`; the residue classes
    come from how the free-optimum angles round to the admissible grid. The
    brackets for classes 3 and 5 carry a "+ 2" term that a well-known printed
    version of this table drops; the forms here are re-derived from the
    rounded angles and agree with the exhaustive scan for every n.
    """
    if n < 3:
        raise ValueError("polygon models need at least 3 vertices")
    x = n % 8
    sec = 1.0 / math.cos(math.pi / n)
    q = math.pi / (4.0 * n)
    if x == 0:
        return 2.0 * math.sqrt(2.0)
    if x == 4:
        return 2.0 * math.sqrt(2.0) * sec
    if x == 2:
        return sec * (3.0 * math.cos((n + 2) * q) + math.sin((n + 6) * q))
    if x == 6:
        return sec * (math.cos((n + 6) * q) + 3.0 * math.sin((n + 2) * q))
    pref = 2.0 / (1.0 + sec) ** 2
    if x == 1:
        return pref * (1.0 + sec * (6.0 * math.sin((n + 1) * q)
                                    + 2.0 * math.cos((n + 3) * q) + sec - 2.0))
    if x == 7:
        return pref * (1.0 + sec * (6.0 * math.cos((n + 1) * q)
                                    + 2.0 * math.sin((n + 3) * q) + sec - 2.0))
    if x == 3:
        return pref * (sec * (6.0 * math.cos((n + 1) * q)
                              + 2.0 * math.sin((n + 3) * q) + 2.0 - sec) - 1.0)
    # x == 5
    return pref * (sec * (6.0 * math.sin((n + 1) * q)
                          + 2.0 * math.cos((n + 3) * q) + 2.0 - sec) - 1.0)


# -- special tables -----------------------------------------------------------


def _pattern_table(predicate: Callable[[int, int, int, int], bool]) -> CorrelationTable:
    """Dichotomic 2x2-setting table putting weight 1/2 on a winning pattern."""
    probs = np.zeros((2, 2, 2, 2))
    for a in range(2):
        for b in range(2):
            for x in range(2):
                for y in range(2):
                    if predicate(a, b, x, y):
                        probs[a, b, x, y] = 0.5
    return CorrelationTable(probs, (2, 2), (2, 2))


def pr_box_table() -> CorrelationTable:
    """The extremal no-signalling box: a XOR b == x AND y, uniformly."""
    return _pattern_table(lambda a, b, x, y: (a ^ b) == (x & y))


def deterministic_table(assign_a: Sequence[int],
                        assign_b: Sequence[int]) -> CorrelationTable:
    """Local deterministic dichotomic table: fixed outcome per setting."""
    assign_a = [int(v) for v in assign_a]
    assign_b = [int(v) for v in assign_b]
    probs = np.zeros((2, 2, len(assign_a), len(assign_b)))
    for x, a in enumerate(assign_a):
        for y, b in enumerate(assign_b):
            probs[a, b, x, y] = 1.0
    return CorrelationTable(probs, (2,) * len(assign_a), (2,) * len(assign_b))


def distill_decompose(n: int) -> tuple[float, CorrelationTable, CorrelationTable]:
    """Noise decomposition of the even-n entangled correlations on two settings.

    With settings {e_1, u-e_1} and {e_2, u-e_2} on both sides, the measured
    table equals ``eps * P_box + (1 - eps) * P_corr`` with
    ``eps = 1 - cos(2 pi / n)``, where P_box is the extremal box winning
    ``a XOR b == x AND (NOT y)`` and P_corr is the perfectly correlated local
    table. Verifies the identity entrywise to 1e-10 and the single mixed
    correlator E(1, 0) == 2 cos(2 pi / n) - 1 to 1e-12 before returning
    (eps, P_box, P_corr).
    """
    if n < 4 or n % 2 != 0:
        raise ValueError("the decomposition applies to even n >= 4")
    state = max_entangled(n)
    settings = ray_settings(state.model_a, 2)
    table = correlations_from_state(state, settings, settings)
    eps = 1.0 - math.cos(2.0 * math.pi / n)
    p_box = _pattern_table(lambda a, b, x, y: (a ^ b) == (x & (1 - y)))
    p_corr = _pattern_table(lambda a, b, x, y: a == b)
    combined = eps * p_box.probs + (1.0 - eps) * p_corr.probs
    err = float(np.abs(table.probs - combined).max())
    if err > 1e-10:
        raise ArithmeticError(f"decomposition identity violated by {err!r}")
    e10 = correlator(table, 1, 0)
    expected = 2.0 * math.cos(2.0 * math.pi / n) - 1.0
    if abs(e10 - expected) > 1e-12:
        raise ArithmeticError(f"mixed correlator {e10!r} != {expected!r}")
    return eps, p_box, p_corr
