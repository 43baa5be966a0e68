"""MOC-MAB and the UCB1-family baselines behind one select/update contract.

Every policy draws exactly two uniforms from its own generator per round,
whether it needs them or not, so the per-step ``select``/``update`` path and
the batched ``play`` path consume randomness identically.

Contextual policies keep an independent block of statistics (and a local
round counter) per partition cell; a non-contextual policy is the same
machinery with a single cell.
"""
from __future__ import annotations

import math
from functools import partial
from typing import Callable, Sequence

import numpy as np

from . import _kernels as K_
from .core import (
    CellRows,
    CellStats,
    HyperParams,
    InvalidInputError,
    PartitionSpec,
    RewardVector,
    log_confidence,
    margin_of_tolerance,
)
from .pareto import lex_batch, lex_optimal

DEFAULT_WEIGHTS = ((1.0, 0.0), (0.5, 0.5), (0.0, 1.0))


def uncertainty(count: int, A_mT: float, scale: float = 1.0) -> float:
    if count == 0:
        return math.inf
    return scale * math.sqrt(2.0 * A_mT / count)


def _as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def ucb1_select(counts, means, t: int, scale: float, rng) -> int:
    """Random argmax of ``mean + scale * sqrt(2 ln t / n)``; unplayed arms first."""
    if t < 1:
        raise InvalidInputError("t must be >= 1")
    return int(K_.ucb1_choose(np.asarray(counts, np.int64), np.asarray(means, np.float64),
                              t, scale, _as_generator(rng).random()))


def pareto_ucb1_select(counts, means1, means2, t: int, scale: float, rng) -> int:
    """Uniform draw from the Pareto front of the per-objective UCB index
    vectors, width ``sqrt((2/n) ln(t (2K)^(1/4)))``; unplayed arms first in id
    order."""
    if t < 1:
        raise InvalidInputError("t must be >= 1")
    return int(K_.pucb_choose(np.asarray(counts, np.int64), np.asarray(means1, np.float64),
                              np.asarray(means2, np.float64), t, scale,
                              _as_generator(rng).random()))


def scalarize(weight: Sequence[float], r: Sequence[float]) -> float:
    return weight[0] * r[0] + weight[1] * r[1]


class Policy:
    name = "policy"

    def __init__(self, num_arms: int, seed=None):
        if num_arms < 1:
            raise InvalidInputError("num_arms must be positive")
        self.num_arms = int(num_arms)
        self.seed = seed
        self.rng = _as_generator(seed)

    def reset(self) -> None:
        self.rng = _as_generator(self.seed)

    def select(self, x, t: int) -> int:
        raise NotImplementedError

    def update(self, x, arm: int, r) -> None:
        raise NotImplementedError

    def _check_arm(self, arm: int) -> None:
        if not 0 <= arm < self.num_arms:
            raise InvalidInputError(f"invalid arm id {arm} (K={self.num_arms})")

    def play(self, X: np.ndarray, rewards: np.ndarray, t0: int = 1) -> np.ndarray:
        """Run a block of rounds: contexts ``X`` (n, d) and the reward every
        arm would have produced, ``rewards`` (n, K, 2). Returns chosen arms."""
        arms = np.empty(len(X), dtype=np.int64)
        for b in range(len(X)):
            a = self.select(X[b], t0 + b)
            self.update(X[b], a, rewards[b, a])
            arms[b] = a
        return arms


class _Celled(Policy):
    """Statistics tables with a leading per-cell axis."""

    def __init__(self, num_arms: int, seed=None, spec: PartitionSpec | None = None):
        super().__init__(num_arms, seed)
        self.spec = spec
        self._alloc()

    def _shapes(self) -> dict[str, tuple[tuple[int, ...], type]]:
        raise NotImplementedError

    def _alloc(self) -> None:
        n_cells = 1 if self.spec is None else self.spec.n_cells
        self._rows = CellRows(n_cells, self.num_arms)
        cap = n_cells if self._rows.dense else 16
        for name, (shape, dtype) in self._shapes().items():
            setattr(self, name, np.zeros((cap,) + shape, dtype=dtype))
        self._cap = cap

    def reset(self) -> None:
        super().reset()
        self._alloc()

    def _grow(self, need: int) -> None:
        if need <= self._cap:
            return
        cap = max(need, 2 * self._cap)
        for name in self._shapes():
            old = getattr(self, name)
            new = np.zeros((cap,) + old.shape[1:], dtype=old.dtype)
            new[: len(old)] = old
            setattr(self, name, new)
        self._cap = cap

    def cell_of(self, x) -> int:
        return 0 if self.spec is None else self.spec.locate(x)

    def _row(self, x) -> int:
        r = self._rows.row(self.cell_of(x))
        self._grow(r + 1)
        return r

    def _block_rows(self, X: np.ndarray) -> np.ndarray:
        if self.spec is None:
            return np.zeros(len(X), dtype=np.int64)
        rows = self._rows.rows(self.spec.locate_many(X))
        if len(rows):
            self._grow(int(rows.max()) + 1)
        return rows


class MocMab(_Celled):
    """MOC-MAB over a uniform m^d partition.

    Per round: index ``g = mean + u`` per objective; if the dominant-index
    leader is still uncertain (``u > beta * v``) play it, otherwise play the
    best non-dominant index among arms whose dominant mean is within
    ``u_leader + u_a + 2v`` of the leader's.
    """

    name = "mocmab"

    def __init__(self, params: HyperParams, d: int, seed=None):
        self.params = params
        spec = PartitionSpec(d, params.m)
        self.v = margin_of_tolerance(params, d)
        self.A_mT = log_confidence(params.num_arms, params.m, d, params.T)
        self.beta_v = params.beta * self.v
        self.last_explored = False
        super().__init__(params.num_arms, seed, spec)

    def _shapes(self):
        K = self.num_arms
        return {"counts": ((K,), np.int64), "mu1": ((K,), np.float64), "mu2": ((K,), np.float64)}

    def widths(self, row: int) -> np.ndarray:
        return np.array([uncertainty(int(n), self.A_mT, self.params.scale) for n in self.counts[row]])

    def select(self, x, t: int = 0) -> int:
        r = self._row(x)
        u0, u1 = self.rng.random(2)
        a, explored = K_.moc_choose(self.counts[r], self.mu1[r], self.mu2[r], self.A_mT,
                                    self.params.scale, self.beta_v, self.v, u0, u1)
        self.last_explored = bool(explored)
        if __debug__ and not explored:
            self._check_exploit(r, int(a))
        return int(a)

    def _check_exploit(self, r: int, a: int) -> None:
        unc = self.widths(r)
        g1 = self.mu1[r] + unc
        lead = [b for b in range(self.num_arms) if g1[b] == g1.max()]
        for a1 in lead:
            if unc[a1] > self.beta_v:
                continue
            need = 2 * self.A_mT * self.params.scale**2 / self.beta_v**2
            assert self.counts[r, a1] >= need * (1 - 1e-12), "branch threshold inconsistent"
            cand = self.mu1[r] >= self.mu1[r, a1] - unc[a1] - unc - 2 * self.v
            if cand[a]:
                return
        raise AssertionError("exploit branch returned an arm outside the candidate set")

    def update(self, x, arm: int, r) -> None:
        self._check_arm(arm)
        r1, r2 = RewardVector(float(r[0]), float(r[1])).check()
        row = self._row(x)
        n = self.counts[row, arm]
        self.mu1[row, arm] = (self.mu1[row, arm] * n + r1) / (n + 1)
        self.mu2[row, arm] = (self.mu2[row, arm] * n + r2) / (n + 1)
        self.counts[row, arm] = n + 1

    def stats(self, cell: int, arm: int) -> CellStats:
        row = self._rows.known().get(cell)
        if row is None:
            return CellStats()
        return CellStats(int(self.counts[row, arm]), float(self.mu1[row, arm]), float(self.mu2[row, arm]))

    def stats_table(self) -> dict[int, np.ndarray]:
        """Visited cells -> (K, 3) array of (count, mean1, mean2)."""
        out = {}
        for cell, row in sorted(self._rows.known().items()):
            if self.counts[row].any():
                out[cell] = np.column_stack([self.counts[row], self.mu1[row], self.mu2[row]])
        return out

    def play(self, X, rewards, t0: int = 1):
        rows = self._block_rows(X)
        U = self.rng.random((len(X), 2))
        arms = np.empty(len(X), dtype=np.int64)
        explored = np.empty(len(X), dtype=np.bool_)
        K_.moc_play(rows, np.ascontiguousarray(rewards, dtype=np.float64), U, self.counts,
                    self.mu1, self.mu2, self.A_mT, self.params.scale, self.beta_v, self.v,
                    arms, explored)
        if len(X):
            self.last_explored = bool(explored[-1])
        return arms


class UCB1(_Celled):
    """UCB1 on the dominant objective only (CD-UCB1 when given a partition)."""

    name = "ucb1"

    def __init__(self, num_arms: int, scale: float = 1.0, seed=None, spec=None):
        self.scale = scale
        super().__init__(num_arms, seed, spec)

    def _shapes(self):
        K = self.num_arms
        return {"counts": ((K,), np.int64), "means": ((K,), np.float64), "tloc": ((), np.int64)}

    def select(self, x, t: int = 0) -> int:
        r = self._row(x)
        u0, _ = self.rng.random(2)
        self.tloc[r] += 1
        return int(K_.ucb1_choose(self.counts[r], self.means[r], self.tloc[r], self.scale, u0))

    def update(self, x, arm, r) -> None:
        self._check_arm(arm)
        r1 = RewardVector(float(r[0]), float(r[1])).check()[0]
        row = self._row(x)
        n = self.counts[row, arm]
        self.means[row, arm] = (self.means[row, arm] * n + r1) / (n + 1)
        self.counts[row, arm] = n + 1

    def play(self, X, rewards, t0: int = 1):
        rows = self._block_rows(X)
        U = self.rng.random((len(X), 2))
        arms = np.empty(len(X), dtype=np.int64)
        K_.ucb1_play(rows, np.ascontiguousarray(rewards, dtype=np.float64), U, self.counts,
                     self.means, self.tloc, self.scale, arms)
        return arms


class ParetoUCB1(_Celled):
    """Empirical Pareto UCB1 (CP-UCB1 when given a partition)."""

    name = "pareto_ucb1"

    def __init__(self, num_arms: int, scale: float = 1.0, seed=None, spec=None):
        self.scale = scale
        super().__init__(num_arms, seed, spec)

    def _shapes(self):
        K = self.num_arms
        return {"counts": ((K,), np.int64), "m1": ((K,), np.float64),
                "m2": ((K,), np.float64), "tloc": ((), np.int64)}

    def select(self, x, t: int = 0) -> int:
        r = self._row(x)
        u0, _ = self.rng.random(2)
        self.tloc[r] += 1
        return int(K_.pucb_choose(self.counts[r], self.m1[r], self.m2[r], self.tloc[r], self.scale, u0))

    def update(self, x, arm, r) -> None:
        self._check_arm(arm)
        r1, r2 = RewardVector(float(r[0]), float(r[1])).check()
        row = self._row(x)
        n = self.counts[row, arm]
        self.m1[row, arm] = (self.m1[row, arm] * n + r1) / (n + 1)
        self.m2[row, arm] = (self.m2[row, arm] * n + r2) / (n + 1)
        self.counts[row, arm] = n + 1

    def play(self, X, rewards, t0: int = 1):
        rows = self._block_rows(X)
        U = self.rng.random((len(X), 2))
        arms = np.empty(len(X), dtype=np.int64)
        K_.pucb_play(rows, np.ascontiguousarray(rewards, dtype=np.float64), U, self.counts,
                     self.m1, self.m2, self.tloc, self.scale, arms)
        return arms


class ScalarizedUCB1(_Celled):
    """Scalarized multi-objective UCB1: each round one linear scalarization is
    chosen (uniformly at random, or round-robin) and UCB1 runs on that
    scalarization's own statistics, with its own play counter as ``t``."""

    name = "scalarized_ucb1"

    def __init__(self, num_arms: int, scale: float = 1.0, seed=None, spec=None,
                 weights: Sequence[Sequence[float]] = DEFAULT_WEIGHTS, schedule: str = "random"):
        if schedule not in ("random", "round_robin"):
            raise InvalidInputError(f"unknown schedule {schedule!r}")
        self.scale = scale
        self.weights = np.asarray(weights, dtype=np.float64)
        self.schedule = schedule
        self.last_weight: int | None = None
        super().__init__(num_arms, seed, spec)

    def _shapes(self):
        K, J = self.num_arms, len(self.weights)
        return {"counts": ((J, K), np.int64), "means": ((J, K), np.float64),
                "tloc": ((), np.int64), "tw": ((J,), np.int64)}

    def reset(self) -> None:
        super().reset()
        self.last_weight = None

    def select(self, x, t: int = 0) -> int:
        r = self._row(x)
        u0, u1 = self.rng.random(2)
        self.tloc[r] += 1
        j = int(K_.sucb_weight(self.tloc[r], len(self.weights), self.schedule == "round_robin", u0))
        self.tw[r, j] += 1
        self.last_weight = j
        return int(K_.ucb1_choose(self.counts[r, j], self.means[r, j], self.tw[r, j], self.scale, u1))

    def update(self, x, arm, r) -> None:
        self._check_arm(arm)
        if self.last_weight is None:
            raise InvalidInputError("update() called before select()")
        rv = RewardVector(float(r[0]), float(r[1])).check()
        row, j = self._row(x), self.last_weight
        s = self.weights[j, 0] * rv[0] + self.weights[j, 1] * rv[1]
        n = self.counts[row, j, arm]
        self.means[row, j, arm] = (self.means[row, j, arm] * n + s) / (n + 1)
        self.counts[row, j, arm] = n + 1

    def play(self, X, rewards, t0: int = 1):
        rows = self._block_rows(X)
        U = self.rng.random((len(X), 2))
        arms = np.empty(len(X), dtype=np.int64)
        chosen = np.empty(len(X), dtype=np.int64)
        K_.sucb_play(rows, np.ascontiguousarray(rewards, dtype=np.float64), U, self.counts,
                     self.means, self.tloc, self.tw, self.weights,
                     self.schedule == "round_robin", self.scale, arms, chosen)
        if len(X):
            self.last_weight = int(chosen[-1])
        return arms


def contextual_wrap(factory: Callable[..., _Celled], spec: PartitionSpec) -> _Celled:
    """Give every cell of ``spec`` its own independent copy of the policy
    built by ``factory``; each copy sees a local round counter."""
    return factory(spec=spec)


class OraclePolicy(Policy):
    """Plays the lexicographically optimal arm using true means (tests only)."""

    name = "oracle"

    def __init__(self, env, seed=None):
        super().__init__(env.num_arms(), seed)
        self.env = env

    def select(self, x, t: int = 0) -> int:
        self.rng.random(2)
        return lex_optimal(self.env.true_means(x), self.env.tie_tolerance()).arm

    def update(self, x, arm, r) -> None:
        self._check_arm(arm)

    def play(self, X, rewards, t0: int = 1):
        self.rng.random((len(X), 2))
        return lex_batch(self.env.means_batch(X), self.env.tie_tolerance())[0].astype(np.int64)


ALGORITHMS = ("mocmab", "p_ucb1", "s_ucb1", "cp_ucb1", "cs_ucb1", "cd_ucb1")
LABELS = {
    "mocmab": "MOC-MAB", "p_ucb1": "P-UCB1", "s_ucb1": "S-UCB1",
    "cp_ucb1": "CP-UCB1", "cs_ucb1": "CS-UCB1", "cd_ucb1": "CD-UCB1", "oracle": "Oracle",
}


def make_policy(name: str, params: HyperParams, d: int, seed=None, env=None,
                schedule: str = "random") -> Policy:
    K, s = params.num_arms, params.scale
    spec = PartitionSpec(d, params.m)
    if name == "mocmab":
        return MocMab(params, d, seed)
    if name == "p_ucb1":
        return ParetoUCB1(K, s, seed)
    if name == "s_ucb1":
        return ScalarizedUCB1(K, s, seed, schedule=schedule)
    if name == "cp_ucb1":
        return contextual_wrap(partial(ParetoUCB1, K, s, seed), spec)
    if name == "cs_ucb1":
        return contextual_wrap(partial(ScalarizedUCB1, K, s, seed, schedule=schedule), spec)
    if name == "cd_ucb1":
        return contextual_wrap(partial(UCB1, K, s, seed), spec)
    if name == "oracle":
        if env is None:
            raise InvalidInputError("oracle policy needs the environment")
        return OraclePolicy(env, seed)
    raise InvalidInputError(f"unknown algorithm {name!r}")
