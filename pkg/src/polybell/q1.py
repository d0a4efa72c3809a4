"""Level-1 moment-matrix certificates for two-party correlation tables.

A table is in the first level of the moment-matrix hierarchy (Q1) iff there
is a positive-semidefinite matrix, indexed by the unit plus every outcome
effect of every setting on both sides, whose first row carries the
marginals, whose diagonal blocks carry the marginals on the diagonal and
zeros between distinct outcomes of one measurement, and whose off-diagonal
block carries the joint probabilities. Membership certifies that the table
admits a quantum-like covariance structure at first order.

For inner-product states such a certificate can be written down directly:
take the bilinear pairing of every pair of listed effects, then override the
diagonal blocks as required. The override differs from the pairing by a
block-diagonal correction that splits into pair matrices
``p * [[1, -1], [-1, 1]]`` with ``p >= 0``, hence stays PSD.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bipartite import (
    JointState,
    is_inner_product_state,
    pull_back_measurement,
    push_local_map,
)
from .core import Measurement, resolve_tol
from .correlations import (
    TSIRELSON_BOUND,
    CorrelationTable,
    correlations_from_state,
    correlator,
)

CERTIFICATE_SCHEMA_VERSION = 1

UFFINK_BOUND = 4.0


@dataclass(frozen=True, eq=False)
class Q1Certificate:
    """A candidate moment matrix with its spectrum and provenance.

    ``outcomes_a``/``outcomes_b`` record how the flat outcome labels split
    into measurements (one count per setting). ``free_entries_source`` is
    "from-state" when the unconstrained entries were filled from a state's
    bilinear pairing, "supplied" when the matrix came from outside.
    """

    gamma: np.ndarray
    eigen_spectrum: np.ndarray
    outcomes_a: tuple[int, ...]
    outcomes_b: tuple[int, ...]
    free_entries_source: str = "from-state"

    def __post_init__(self) -> None:
        gamma = np.array(self.gamma, dtype=float, copy=True)
        n = 1 + sum(self.outcomes_a) + sum(self.outcomes_b)
        if gamma.shape != (n, n):
            raise ValueError(f"gamma must be {n}x{n} for these outcome counts")
        spectrum = np.array(self.eigen_spectrum, dtype=float, copy=True)
        if spectrum.shape != (n,):
            raise ValueError("eigen spectrum length must match gamma")
        gamma.flags.writeable = False
        spectrum.flags.writeable = False
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "eigen_spectrum", spectrum)
        object.__setattr__(self, "outcomes_a", tuple(int(k) for k in self.outcomes_a))
        object.__setattr__(self, "outcomes_b", tuple(int(k) for k in self.outcomes_b))

    @classmethod
    def from_gamma(cls, gamma, outcomes_a: Sequence[int], outcomes_b: Sequence[int],
                   free_entries_source: str = "supplied") -> "Q1Certificate":
        gamma = np.asarray(gamma, dtype=float)
        return cls(
            gamma=gamma,
            eigen_spectrum=np.linalg.eigvalsh((gamma + gamma.T) / 2.0),
            outcomes_a=tuple(outcomes_a),
            outcomes_b=tuple(outcomes_b),
            free_entries_source=free_entries_source,
        )

    def psd(self, tol: float | None = None) -> bool:
        """Positive semidefiniteness: min eigenvalue >= -tol * max |eigenvalue|."""
        tol = resolve_tol(tol)
        scale = float(np.abs(self.eigen_spectrum).max()) if self.eigen_spectrum.size else 0.0
        return float(self.eigen_spectrum[0]) >= -tol * max(scale, 1e-300)

    def verdict(self, tol: float | None = None) -> str:
        """"in-Q1" when the certificate is PSD, else "undetermined"."""
        return "in-Q1" if self.psd(tol) else "undetermined"

    def to_dict(self) -> dict:
        return {
            "schema_version": CERTIFICATE_SCHEMA_VERSION,
            "gamma": self.gamma.tolist(),
            "spectrum": self.eigen_spectrum.tolist(),
            "outcomes_A": list(self.outcomes_a),
            "outcomes_B": list(self.outcomes_b),
            "free_entries_source": self.free_entries_source,
            "verdict": self.verdict(),
        }

    def to_json(self, **kwargs) -> str:
        kwargs.setdefault("sort_keys", True)
        return json.dumps(self.to_dict(), **kwargs)


def _stack_effects(measurements: Sequence[Measurement]) -> tuple[np.ndarray, tuple[int, ...]]:
    if not measurements:
        raise ValueError("need at least one measurement")
    effects = np.vstack([m.effects for m in measurements])
    return effects, tuple(m.n_outcomes for m in measurements)


def certificate_from_inner_product_state(state: JointState,
                                         meas_a: Sequence[Measurement],
                                         meas_b: Sequence[Measurement],
                                         tol: float | None = None) -> Q1Certificate:
    """Constructive Q1 certificate for correlations of an inner-product state.

    Builds the pairing matrix of (unit, first-side effects, second-side
    effects) under the state's symmetric PSD bilinear form, overrides each
    diagonal measurement block to (marginals on the diagonal, zeros between
    distinct outcomes), and checks the result stays PSD. Raises
    ``ValueError`` when the state fails the inner-product test, since the
    construction would then be unsound.
    """
    tol = resolve_tol(tol)
    report = is_inner_product_state(state, tol)
    if not report.is_inner_product:
        raise ValueError(
            "certificate construction needs an inner-product state "
            f"(asymmetry {report.asymmetry!r}, min eigenvalue {report.min_eigenvalue!r})"
        )
    effects_a, outcomes_a = _stack_effects(meas_a)
    effects_b, outcomes_b = _stack_effects(meas_b)
    m = state.matrix
    u = state.model_a.unit_effect
    g = np.vstack([u[None, :], effects_a, effects_b])
    gamma = g @ m @ g.T
    gamma = (gamma + gamma.T) / 2.0

    marg_a = effects_a @ m @ state.model_b.unit_effect
    marg_b = u @ m @ effects_b.T
    offset = 1
    for count, marg in ((outcomes_a, marg_a), (outcomes_b, marg_b)):
        pos = 0
        for size in count:
            block = slice(offset + pos, offset + pos + size)
            gamma[block, block] = np.diag(marg[pos:pos + size])
            pos += size
        offset += pos

    spectrum = np.linalg.eigvalsh(gamma)
    cert = Q1Certificate(
        gamma=gamma,
        eigen_spectrum=spectrum,
        outcomes_a=outcomes_a,
        outcomes_b=outcomes_b,
        free_entries_source="from-state",
    )
    if not cert.psd(tol):
        raise ArithmeticError(
            f"certificate unexpectedly not PSD (min eigenvalue {spectrum[0]!r})"
        )
    return cert


def verify_delta_decomposition(state: JointState, measurement: Measurement,
                               tol: float | None = None) -> bool:
    """Check the PSD split of one diagonal-block override correction.

    For a measurement with outcomes e_1..e_r on an inner-product state, the
    correction (marginal diagonal minus the pairing block) must equal the sum
    over outcome pairs m < n of the matrix with ``p_mn`` at (m,m) and (n,n)
    and ``-p_mn`` at (m,n) and (n,m), where ``p_mn`` is the pairing of e_m
    with e_n. Each summand is PSD exactly when ``p_mn >= 0``, which local
    positivity guarantees. Returns True iff the sum matches entrywise to
    1e-12 and every ``p_mn`` is non-negative within tolerance.
    """
    tol = resolve_tol(tol)
    report = is_inner_product_state(state, tol)
    if not report.is_inner_product:
        raise ValueError("the block decomposition is defined for inner-product states")
    e = measurement.effects
    m = state.matrix
    pair = e @ m @ e.T
    marg = e @ m @ state.model_b.unit_effect
    correction = np.diag(marg) - pair

    r = e.shape[0]
    total = np.zeros((r, r))
    psd_ok = True
    for nn in range(1, r):
        for mm in range(nn):
            p = pair[mm, nn]
            total[mm, mm] += p
            total[nn, nn] += p
            total[mm, nn] -= p
            total[nn, mm] -= p
            if p < -tol:
                psd_ok = False
    return psd_ok and float(np.abs(total - correction).max()) <= 1e-12


@dataclass(frozen=True)
class ConditionReport:
    """Necessary-condition screen for Q1 membership of a 2x2 dichotomic table.

    ``chsh_value`` is the best of the 8 sign-relabelled CHSH combinations,
    ``uffink_value`` the best of the 4 quadratic sign patterns. A violation
    of either bound proves the table is outside Q1; passing both proves
    nothing, hence the verdict "undetermined".
    """

    chsh_value: float
    chsh_ok: bool
    uffink_value: float
    uffink_ok: bool
    chsh_bound: float = TSIRELSON_BOUND
    uffink_bound: float = UFFINK_BOUND

    @property
    def verdict(self) -> str:
        return "undetermined" if (self.chsh_ok and self.uffink_ok) else "not-in-Q1"

    def to_dict(self) -> dict:
        return {
            "chsh_value": self.chsh_value,
            "chsh_bound": self.chsh_bound,
            "chsh_ok": self.chsh_ok,
            "uffink_value": self.uffink_value,
            "uffink_bound": self.uffink_bound,
            "uffink_ok": self.uffink_ok,
            "verdict": self.verdict,
        }


def q1_necessary_conditions(table: CorrelationTable,
                            x0: int = 0, x1: int = 1, y0: int = 0, y1: int = 1,
                            tol: float | None = None) -> ConditionReport:
    """Screen a dichotomic 2x2 sub-table against the Q1 necessary bounds."""
    tol = resolve_tol(tol)
    e = np.array([
        [correlator(table, x0, y0), correlator(table, x0, y1)],
        [correlator(table, x1, y0), correlator(table, x1, y1)],
    ])
    chsh_best = 0.0
    for signs in range(16):
        s = [1 - 2 * ((signs >> k) & 1) for k in range(4)]
        if s[0] * s[1] * s[2] * s[3] != -1:
            continue
        chsh_best = max(chsh_best,
                        s[0] * e[0, 0] + s[1] * e[0, 1] + s[2] * e[1, 0] + s[3] * e[1, 1])
    uffink_best = max(
        (e[0, 0] + e[1, 0]) ** 2 + (e[0, 1] - e[1, 1]) ** 2,
        (e[0, 0] - e[1, 0]) ** 2 + (e[0, 1] + e[1, 1]) ** 2,
        (e[0, 0] + e[0, 1]) ** 2 + (e[1, 0] - e[1, 1]) ** 2,
        (e[0, 0] - e[0, 1]) ** 2 + (e[1, 0] + e[1, 1]) ** 2,
    )
    return ConditionReport(
        chsh_value=float(chsh_best),
        chsh_ok=bool(chsh_best <= TSIRELSON_BOUND + tol),
        uffink_value=float(uffink_best),
        uffink_ok=bool(uffink_best <= UFFINK_BOUND + tol),
    )


def certificate_via_pushforward(omega: JointState, tau,
                                meas_a: Sequence[Measurement],
                                meas_b: Sequence[Measurement],
                                *, sigma: JointState,
                                tol: float | None = None) -> Q1Certificate:
    """Certify correlations of a pushed-forward state via its preimage.

    Requires ``omega == push_local_map(sigma, tau)`` with ``sigma`` an
    inner-product state; the second side's measurements are pulled back
    through the adjoint of ``tau`` and ``sigma`` is certified with them. The
    certified correlations are checked to match those of (omega, meas) to
    1e-12. Raises ``ValueError`` when the preimage or map fails a
    precondition.
    """
    tol = resolve_tol(tol)
    pushed = push_local_map(sigma, tau, tol)
    if float(np.abs(pushed.matrix - omega.matrix).max()) > tol:
        raise ValueError("omega is not the pushforward of sigma under tau")
    pulled = [pull_back_measurement(tau, m) for m in meas_b]
    cert = certificate_from_inner_product_state(sigma, meas_a, pulled, tol)
    direct = correlations_from_state(omega, meas_a, meas_b)
    certified = correlations_from_state(sigma, meas_a, pulled)
    gap = float(np.abs(direct.probs - certified.probs).max())
    if gap > 1e-12:
        raise ArithmeticError(f"certified correlations deviate by {gap!r}")
    return cert
