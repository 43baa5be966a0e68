"""Dominance relations and oracles over two-objective expected rewards.

Scalar functions accept any real numbers (floats or ``fractions.Fraction``)
and compare exactly. The ``*_batch`` variants take an ``(n, K, 2)`` array
and are what the simulation engine uses each round.
"""
from __future__ import annotations

import enum
import math
from typing import NamedTuple, Sequence

import numpy as np

from .core import InvalidInputError


class DominanceRelation(enum.Enum):
    DOMINATES = "dominates"
    # The two "weakly ... only" members cannot arise from exact comparison of
    # 2-vectors (weak dominance without strictness means equality); they are
    # kept so the relation lattice is complete.
    WEAKLY_DOMINATES_ONLY = "weakly_dominates_only"
    DOMINATED_BY = "dominated_by"
    WEAKLY_DOMINATED_ONLY = "weakly_dominated_only"
    INCOMPARABLE = "incomparable"
    EQUAL = "equal"


def _finite(*vals) -> None:
    for v in vals:
        if isinstance(v, float) and not math.isfinite(v):
            raise InvalidInputError(f"non-finite component {v}")


def compare(u: Sequence[float], v: Sequence[float]) -> DominanceRelation:
    u1, u2 = u
    v1, v2 = v
    _finite(u1, u2, v1, v2)
    if u1 == v1 and u2 == v2:
        return DominanceRelation.EQUAL
    if u1 >= v1 and u2 >= v2:
        return DominanceRelation.DOMINATES
    if u1 <= v1 and u2 <= v2:
        return DominanceRelation.DOMINATED_BY
    return DominanceRelation.INCOMPARABLE


def _rows(mu) -> list[tuple]:
    rows = [tuple(r) for r in mu]
    if not rows:
        raise InvalidInputError("empty arm set")
    for r in rows:
        if len(r) != 2:
            raise InvalidInputError(f"expected 2-vectors, got {r}")
        _finite(*r)
    return rows


def pareto_front(mu) -> list[int]:
    """Arms not dominated by any other arm, in increasing id order.

    Sweep over arms sorted by dominant value (descending): an arm survives
    iff it has the best non-dominant value within its dominant-value tie
    group and strictly beats every arm with a larger dominant value.
    """
    rows = _rows(mu)
    order = sorted(range(len(rows)), key=lambda a: (-rows[a][0], -rows[a][1]))
    front = []
    best_above = None
    i = 0
    while i < len(order):
        j = i
        group_val = rows[order[i]][0]
        while j < len(order) and rows[order[j]][0] == group_val:
            j += 1
        group_max = rows[order[i]][1]
        if best_above is None or group_max > best_above:
            front.extend(a for a in order[i:j] if rows[a][1] == group_max)
            best_above = group_max
        i = j
    return sorted(front)


def psg(arm: int, mu) -> float:
    """Pareto suboptimality gap of ``arm``.

    Closed form for two objectives: the smallest uniform shift that lifts
    the arm out of dominance by every front member is
    ``max(0, max_{a' in front} min_i (mu'_i - mu_i))`` (infimum reading).
    """
    rows = _rows(mu)
    if not 0 <= arm < len(rows):
        raise InvalidInputError(f"invalid arm id {arm}")
    a1, a2 = rows[arm]
    best = 0
    for b in pareto_front(rows):
        b1, b2 = rows[b]
        gap = min(b1 - a1, b2 - a2)
        if gap > best:
            best = gap
    return best


class LexOptimum(NamedTuple):
    optimal_set: list[int]
    arm: int
    dominant: float
    nondominant: float


def lex_optimal(mu, tie_tol: float = 0.0) -> LexOptimum:
    """Lexicographic oracle: maximize the non-dominant mean among the arms
    whose dominant mean is within ``tie_tol`` of the best.

    ``dominant`` is the overall maximum of the dominant means; lowest arm id
    wins exact ties on the non-dominant mean.
    """
    if tie_tol < 0:
        raise InvalidInputError("tie_tol must be non-negative")
    rows = _rows(mu)
    best1 = max(r[0] for r in rows)
    opt = [a for a, r in enumerate(rows) if r[0] >= best1 - tie_tol]
    star = opt[0]
    for a in opt[1:]:
        if rows[a][1] > rows[star][1]:
            star = a
    return LexOptimum(opt, star, best1, rows[star][1])


def front_mask_batch(mu: np.ndarray) -> np.ndarray:
    """(n, K) boolean Pareto-front membership for an (n, K, 2) array."""
    p = mu[:, :, None, :]  # candidate dominators b along axis 2
    q = mu[:, None, :, :]
    weak = np.all(q >= p, axis=-1)  # [n, a, b]: b weakly dominates a
    strict = np.any(q > p, axis=-1)
    return ~np.any(weak & strict, axis=2)


def psg_batch(mu: np.ndarray, front: np.ndarray | None = None) -> np.ndarray:
    if front is None:
        front = front_mask_batch(mu)
    diff = np.minimum(
        mu[:, None, :, 0] - mu[:, :, None, 0], mu[:, None, :, 1] - mu[:, :, None, 1]
    )  # [n, a, b] = min_i(mu_b - mu_a)
    diff = np.where(front[:, None, :], diff, -np.inf)
    return np.maximum(diff.max(axis=2), 0.0)


def lex_batch(mu: np.ndarray, tie_tol: float = 0.0):
    """Per-row lexicographic optimum.

    Returns ``(arm, best_dominant, best_nondominant)`` arrays of length n.
    """
    best1 = mu[:, :, 0].max(axis=1)
    opt = mu[:, :, 0] >= (best1 - tie_tol)[:, None]
    masked = np.where(opt, mu[:, :, 1], -np.inf)
    arm = masked.argmax(axis=1)
    return arm, best1, masked[np.arange(len(mu)), arm]
