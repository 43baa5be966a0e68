"""Regret accounting, high-probability envelope checks and the seeded
multi-run experiment engine."""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import ConfigError, HyperParams, log_confidence, margin_of_tolerance
from .pareto import lex_batch, lex_optimal, psg, psg_batch
from .policies import ALGORITHMS, make_policy

SERIES = ("reg1", "reg2", "pareto", "cumrw1", "cumrw2")
BLOCK = 8192
ORACLE_ID = len(ALGORITHMS)


def checkpoint_grid(T: int, n: int = 50) -> np.ndarray:
    """``min(n, T)`` distinct, roughly geometric rounds from 1 to T.

    Rounding collides near t=1; colliding points are pushed one round later.
    """
    n = min(n, T)
    g = np.round(np.geomspace(1, T, n)).astype(np.int64)
    for i in range(1, n):
        g[i] = max(g[i], g[i - 1] + 1)
    for i in range(n - 2, -1, -1):  # keep the last point at T
        g[i] = min(g[i], g[i + 1] - 1)
    return g


class RegretTrace:
    """Cumulative Reg^1, Reg^2, Pareto regret and expected rewards, sampled
    at checkpoint rounds."""

    def __init__(self, checkpoints):
        self.checkpoints = np.asarray(checkpoints, dtype=np.int64)
        self.values = np.zeros((len(self.checkpoints), len(SERIES)))
        self.t = 0
        self.totals = np.zeros(len(SERIES))
        self._next = 0

    def step(self, mu: np.ndarray, chosen: int, tie_tol: float = 0.0) -> np.ndarray:
        """Account one round given the true means ``mu`` (K, 2)."""
        opt = lex_optimal(mu, tie_tol)
        inc = np.array([
            opt.dominant - mu[chosen][0],
            opt.nondominant - mu[chosen][1],
            psg(chosen, mu),
            mu[chosen][0],
            mu[chosen][1],
        ], dtype=np.float64)
        self.add_block(inc[None, :])
        return inc

    def add_block(self, inc: np.ndarray) -> None:
        """Append per-round increments (n, 5), summing strictly in order."""
        if not len(inc):
            return
        cum = np.cumsum(np.vstack([self.totals, inc]), axis=0)[1:]
        t_end = self.t + len(inc)
        while self._next < len(self.checkpoints) and self.checkpoints[self._next] <= t_end:
            self.values[self._next] = cum[self.checkpoints[self._next] - self.t - 1]
            self._next += 1
        self.totals = cum[-1]
        self.t = t_end

    def series(self, name: str) -> np.ndarray:
        return self.values[:, SERIES.index(name)]


def regret_step(trace: RegretTrace, env, x, chosen: int) -> np.ndarray:
    return trace.step(env.true_means(x), chosen, env.tie_tolerance())


# -- high-probability envelopes ----------------------------------------------------

@dataclass(frozen=True)
class EnvelopeParams:
    C1_max: float
    C2_max: float
    m: int
    d: int
    K: int
    T: int
    beta: float
    v: float
    A_mT: float

    @property
    def B_mT(self) -> float:
        return 2.0 * math.sqrt(2.0 * self.A_mT)

    @classmethod
    def for_params(cls, params: HyperParams, d: int, c1: float, c2: float) -> "EnvelopeParams":
        return cls(c1, c2, params.m, d, params.num_arms, params.T, params.beta,
                   margin_of_tolerance(params, d),
                   log_confidence(params.num_arms, params.m, d, params.T))


def envelope(t, p: EnvelopeParams):
    """High-probability regret bounds (eps1(t), eps2(t)) for MOC-MAB."""
    t = np.asarray(t, dtype=np.float64)
    cells = float(p.m) ** p.d
    common = 2 * p.B_mT * np.sqrt(p.K * cells * t)
    e1 = cells * p.K * p.C1_max + common + 2 * (p.beta + 2) * p.v * t
    e2 = (cells * p.K * p.C2_max
          + cells * p.C2_max * p.K * (2 * p.A_mT / (p.beta**2 * p.v**2))
          + common + 2 * p.v * t)
    return e1, e2


def max_gaps(env, per_axis: int = 101, budget: int = 2_000_000) -> tuple[float, float]:
    """Grid estimate of C^i_max = sup_x (mu^i_*(x) - min_a mu^i_a(x)), capped at 1."""
    d = env.dims()
    n = per_axis if per_axis**d <= budget else max(2, int(budget ** (1 / d)))
    axes = np.linspace(0.0, 1.0, n)
    grid = np.stack(np.meshgrid(*([axes] * d), indexing="ij"), axis=-1).reshape(-1, d)
    best = [0.0, 0.0]
    for i in range(0, len(grid), 65536):
        mu = env.means_batch(grid[i:i + 65536])
        _, b1, b2 = lex_batch(mu, env.tie_tolerance())
        best[0] = max(best[0], float((b1 - mu[:, :, 0].min(axis=1)).max()))
        best[1] = max(best[1], float((b2 - mu[:, :, 1].min(axis=1)).max()))
    return min(best[0], 1.0), min(best[1], 1.0)


def sublinearity_fit(t, reg) -> float:
    """Least-squares slope of log Reg vs log t over the second half of the
    checkpoints (0 when regret never becomes positive)."""
    t = np.asarray(t, dtype=np.float64)
    reg = np.asarray(reg, dtype=np.float64)
    half = slice(len(t) // 2, None)
    t, reg = t[half], reg[half]
    keep = reg > 0
    if keep.sum() < 2:
        return 0.0
    slope, _ = np.polyfit(np.log(t[keep]), np.log(reg[keep]), 1)
    return float(slope)


# -- engine --------------------------------------------------------------------

def _stream(seed: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=key)


def _alg_id(name: str) -> int:
    return ORACLE_ID if name == "oracle" else ALGORITHMS.index(name)


@dataclass
class RunOutput:
    traces: dict[str, np.ndarray]          # alg -> (n_ckpt, 5)
    rounds: dict[str, np.ndarray] = field(default_factory=dict)  # alg -> (T, 4) when dumped


def simulate_run(cfg, run: int, algorithms=None) -> RunOutput:
    """One seeded run: shared context stream, per-policy reward/tie streams."""
    from .config import build_environment, policy_dims, resolved_params

    seed = cfg.base_seed + run
    algorithms = list(algorithms or cfg.algorithms)
    env = build_environment(cfg, seed)
    params = resolved_params(cfg, env)
    d_pol = policy_dims(cfg, env)
    tol = env.tie_tolerance()
    ckpts = checkpoint_grid(cfg.horizon, cfg.checkpoints)
    ctx_rng = np.random.default_rng(_stream(seed, 0))
    policies, noise, traces, dumps = {}, {}, {}, {}
    for name in algorithms:
        k = _alg_id(name)
        policies[name] = make_policy(name, params, d_pol, seed=_stream(seed, 2, k), env=env,
                                     schedule=cfg.scalarized_schedule)
        noise[name] = np.random.default_rng(_stream(seed, 1, k))
        traces[name] = RegretTrace(ckpts)
        dumps[name] = []
    for t0 in range(1, cfg.horizon + 1, BLOCK):
        ts = np.arange(t0, min(t0 + BLOCK, cfg.horizon + 1))
        X = env.contexts(ts, ctx_rng)
        mu = env.means_batch(X)
        _, best1, best2 = lex_batch(mu, tol)
        gap1 = best1[:, None] - mu[:, :, 0]
        gap2 = best2[:, None] - mu[:, :, 1]
        gaps = np.stack([gap1, gap2, psg_batch(mu), mu[:, :, 0], mu[:, :, 1]], axis=-1)
        rows = np.arange(len(ts))
        Xp = np.ascontiguousarray(X[:, :d_pol])
        for name, pol in policies.items():
            U = noise[name].random((len(ts), env.n_uniforms))
            R = env.rewards_from_uniforms(X, U, ts)
            arms = pol.play(Xp, R, t0)
            inc = gaps[rows, arms]
            traces[name].add_block(inc)
            if cfg.dump_rounds:
                dumps[name].append(np.column_stack([ts, arms, inc[:, :3]]))
    out = RunOutput({n: tr.values.copy() for n, tr in traces.items()})
    if cfg.dump_rounds:
        out.rounds = {n: np.vstack(v) for n, v in dumps.items()}
    return out


@dataclass
class ExperimentResult:
    config: object
    checkpoints: np.ndarray
    runs: dict[str, np.ndarray]            # alg -> (R, n_ckpt, 5)
    envelope: EnvelopeParams | None
    envelope_violations: int
    wall_clock: float
    rounds: list[dict[str, np.ndarray]] = field(default_factory=list)

    def mean(self, alg: str, series: str) -> np.ndarray:
        return self.runs[alg][:, :, SERIES.index(series)].mean(axis=0)

    def std(self, alg: str, series: str) -> np.ndarray:
        return self.runs[alg][:, :, SERIES.index(series)].std(axis=0)

    def final(self, alg: str, series: str) -> float:
        return float(self.mean(alg, series)[-1])

    def exponents(self, alg: str) -> dict[str, float]:
        return {s: sublinearity_fit(self.checkpoints, self.mean(alg, s))
                for s in ("reg1", "reg2", "pareto")}


def resolve_jobs(jobs: int | None) -> int:
    if jobs is None:
        env = os.environ.get("MOC_BANDIT_JOBS")
        if not env:
            return os.cpu_count() or 1
        try:
            jobs = int(env)
        except ValueError:
            raise ConfigError(f"MOC_BANDIT_JOBS: expected an integer, got {env!r}") from None
        if jobs < 1:
            raise ConfigError(f"MOC_BANDIT_JOBS: must be >= 1, got {jobs}")
    return max(1, int(jobs))


def _run_one(args):
    cfg, run, algorithms = args
    return simulate_run(cfg, run, algorithms)


def run_experiment(cfg, jobs: int | None = None, algorithms=None) -> ExperimentResult:
    from .config import build_environment, policy_dims, resolved_params

    algorithms = list(algorithms or cfg.algorithms)
    start = time.perf_counter()
    env = build_environment(cfg, cfg.base_seed)  # surfaces config errors before simulating
    jobs = min(resolve_jobs(jobs), cfg.runs)
    tasks = [(cfg, r, algorithms) for r in range(cfg.runs)]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            outs = list(pool.map(_run_one, tasks))
    else:
        outs = [_run_one(a) for a in tasks]
    ckpts = checkpoint_grid(cfg.horizon, cfg.checkpoints)
    runs = {a: np.stack([o.traces[a] for o in outs]) for a in algorithms}
    env_params, violations = None, 0
    if "mocmab" in algorithms:
        params = resolved_params(cfg, env)
        c1, c2 = max_gaps(env)
        env_params = EnvelopeParams.for_params(params, policy_dims(cfg, env), c1, c2)
        e1, e2 = envelope(ckpts, env_params)
        r = runs["mocmab"]
        violations = int(np.sum(r[:, :, 0] >= e1) + np.sum(r[:, :, 1] >= e2))
    return ExperimentResult(cfg, ckpts, runs, env_params, violations,
                            time.perf_counter() - start,
                            [o.rounds for o in outs] if cfg.dump_rounds else [])
