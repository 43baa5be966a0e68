"""Context/reward generators with queryable ground-truth means.

All environments expose a batched interface used by the simulation engine:

* ``contexts(ts, rng)`` -> (n, d) contexts for rounds ``ts``
* ``means_batch(X)`` -> (n, K, 2) expected rewards
* ``rewards_from_uniforms(X, U, ts)`` -> (n, K, 2) the reward every arm would
  return given ``n_uniforms`` uniforms per round. Each reward is a function
  of its round's uniforms only, so a policy's noise can be drawn from its
  own stream independently of which arms it pulls.

plus the per-round convenience methods ``next_context``, ``sample_reward``
and ``true_means``.
"""
from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .core import ConfigError, InvalidInputError, RewardVector, make_context


class Environment:
    n_uniforms = 2
    name = "environment"

    def __init__(self, seed=None):
        ctx, rw = np.random.SeedSequence(seed).spawn(2)
        self._ctx_rng = np.random.default_rng(ctx)
        self._rw_rng = np.random.default_rng(rw)
        self._t = 0

    # -- contract -----------------------------------------------------------
    def dims(self) -> int:
        raise NotImplementedError

    def num_arms(self) -> int:
        raise NotImplementedError

    def tie_tolerance(self) -> float:
        return 0.0

    def holder_constants(self) -> tuple[float, float] | None:
        """(L, alpha) for which the mean surfaces are Hölder continuous."""
        return None

    def contexts(self, ts: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def means_batch(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def rewards_from_uniforms(self, X: np.ndarray, U: np.ndarray, ts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # -- per-round helpers ---------------------------------------------------
    def next_context(self, t: int) -> np.ndarray:
        self._t = t
        return self.contexts(np.array([t]), self._ctx_rng)[0]

    def true_means(self, x) -> np.ndarray:
        x = make_context(x, self.dims())
        return self.means_batch(x[None, :])[0]

    def sample_reward(self, x, arm: int, rng: np.random.Generator | None = None) -> RewardVector:
        if not 0 <= arm < self.num_arms():
            raise InvalidInputError(f"invalid arm id {arm}")
        x = make_context(x, self.dims())
        U = (rng or self._rw_rng).random((1, self.n_uniforms))
        r = self.rewards_from_uniforms(x[None, :], U, np.array([self._t]))[0, arm]
        return RewardVector(float(r[0]), float(r[1]))


def _check_2d(X: np.ndarray, d: int) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != d:
        raise InvalidInputError(f"expected contexts of shape (n, {d}), got {X.shape}")
    return X


class GaussianSurface(Environment):
    """Four arms on [0,1]^2 whose mean surfaces are peak-normalized Gaussian
    bumps ``exp(-|x - c|^2 / (2 * variance))``.

    Arms 0 and 1 share the dominant bump, so their dominant means tie exactly
    for every context and the non-dominant objective decides between them.
    Rewards are independent Bernoulli draws per objective.
    """

    name = "synthetic_gaussian"
    DOMINANT = ((0.3, 0.5), (0.3, 0.5), (0.7, 0.5), None)
    NONDOMINANT = ((0.3, 0.7), (0.3, 0.3), (0.7, 0.5), (0.7, 0.5))

    def __init__(self, variance: float = 0.3, seed=None):
        super().__init__(seed)
        if not variance > 0:
            raise InvalidInputError("variance must be positive")
        self.variance = variance

    def dims(self) -> int:
        return 2

    def num_arms(self) -> int:
        return 4

    def holder_constants(self):
        # Max gradient norm of exp(-r^2 / (2 s)) is 1/sqrt(s e) (~1.107 at s=0.3).
        return (max(2.0, 1.0 / math.sqrt(self.variance * math.e) + 1e-9), 1.0)

    def bump(self, X: np.ndarray, c) -> np.ndarray:
        if c is None:
            return np.zeros(len(X))
        d2 = (X[:, 0] - c[0]) ** 2 + (X[:, 1] - c[1]) ** 2
        return np.exp(-d2 / (2 * self.variance))

    def contexts(self, ts, rng):
        return rng.random((len(ts), 2))

    def means_batch(self, X):
        X = _check_2d(X, 2)
        mu = np.empty((len(X), 4, 2))
        for a in range(4):
            mu[:, a, 0] = self.bump(X, self.DOMINANT[a])
            mu[:, a, 1] = self.bump(X, self.NONDOMINANT[a])
        return mu

    def rewards_from_uniforms(self, X, U, ts):
        mu = self.means_batch(X)
        return (U[:, None, :2] < mu).astype(np.float64)


def outage_success(h2, snr, rate):
    """1 when log2(1 + h^2 SNR) >= R, i.e. no outage."""
    return np.log2(1.0 + h2 * snr) >= rate


class Multichannel(Environment):
    """Rate/channel selection under Rayleigh fading.

    Arms are (rate, channel) pairs ordered rate-major. The context is the
    per-channel transmit SNR divided by ``snr_max``. Channel power gain is
    exponential with rate ``lam[Q]``; a transmission succeeds unless it is
    in outage. Rewards: (R / R_max * success, success).
    """

    name = "multichannel"
    n_uniforms = 2

    def __init__(self, rates: Sequence[float] = (1.0, 0.5, 0.25, 0.1),
                 lambdas: Sequence[float] = (0.25, 0.25), snr_max: float = 5.0, seed=None):
        super().__init__(seed)
        if not rates or not lambdas:
            raise InvalidInputError("need at least one rate and one channel")
        if min(rates) <= 0 or min(lambdas) <= 0 or snr_max <= 0:
            raise InvalidInputError("rates, lambdas and snr_max must be positive")
        self.rates = np.asarray(rates, dtype=np.float64)
        self.lambdas = np.asarray(lambdas, dtype=np.float64)
        self.snr_max = float(snr_max)
        nq = len(self.lambdas)
        self.arm_rate = np.repeat(self.rates, nq)
        self.arm_channel = np.tile(np.arange(nq), len(self.rates))
        self.r_max = float(self.rates.max())

    def arm_label(self, arm: int) -> tuple[float, int]:
        return float(self.arm_rate[arm]), int(self.arm_channel[arm]) + 1

    def dims(self) -> int:
        return len(self.lambdas)

    def num_arms(self) -> int:
        return len(self.arm_rate)

    def tie_tolerance(self) -> float:
        return 1e-12

    def holder_constants(self):
        # exp(-c/x) is 1/2-Hölder with constant e^{-1/2}/sqrt(2c) (worst pair
        # anchored at x=0); c is smallest for the lowest rate.
        c = self.lambdas.max() * (2.0 ** self.rates.min() - 1.0) / self.snr_max
        return (math.exp(-0.5) / math.sqrt(2 * c) * 1.05 + 0.5, 0.5)

    def contexts(self, ts, rng):
        return rng.random((len(ts), self.dims()))

    def _snr(self, X):
        return self.snr_max * X[:, self.arm_channel]  # (n, K)

    def means_batch(self, X):
        X = _check_2d(X, self.dims())
        snr = self._snr(X)
        thr = self.lambdas[self.arm_channel] * (2.0 ** self.arm_rate - 1.0)
        with np.errstate(divide="ignore"):
            ok = np.where(snr > 0, np.exp(-thr / np.where(snr > 0, snr, 1.0)), 0.0)
        mu = np.empty(snr.shape + (2,))
        mu[..., 1] = ok
        mu[..., 0] = self.arm_rate / self.r_max * ok
        return mu

    def rewards_from_uniforms(self, X, U, ts):
        snr = self._snr(_check_2d(X, self.dims()))
        h2 = -np.log1p(-U[:, :1]) / self.lambdas[self.arm_channel]  # inverse-CDF draw
        s = outage_success(h2, snr, self.arm_rate).astype(np.float64)
        out = np.empty(s.shape + (2,))
        out[..., 0] = self.arm_rate / self.r_max * s
        out[..., 1] = s
        return out


# -- display advertising replay -----------------------------------------------

DISPLAY, SKIP = 0, 1


def load_replay_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read ``x1,...,xd,click`` rows; returns (contexts, clicks)."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"replay file not found: {path}")
    with path.open(newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if not header or header[-1] != "click" or len(header) < 2:
            raise ConfigError(f"{path}: header must be x1,...,xd,click")
        d = len(header) - 1
        if header[:-1] != [f"x{i + 1}" for i in range(d)]:
            raise ConfigError(f"{path}: header must be x1,...,xd,click, got {header}")
        rows = [r for r in reader if r]
    if not rows:
        raise ConfigError(f"{path}: no records")
    try:
        data = np.array(rows, dtype=np.float64)
    except ValueError as e:
        raise ConfigError(f"{path}: non-numeric field ({e})") from None
    if data.shape[1] != d + 1:
        raise ConfigError(f"{path}: ragged rows")
    X, clicks = data[:, :d], data[:, d]
    if np.any((X < 0) | (X > 1)) or not np.all(np.isin(clicks, (0.0, 1.0))):
        raise ConfigError(f"{path}: contexts must be in [0,1] and clicks in {{0,1}}")
    return X, clicks


def write_replay_csv(path, X: np.ndarray, clicks: np.ndarray) -> None:
    with Path(path).open("w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow([f"x{i + 1}" for i in range(X.shape[1])] + ["click"])
        for x, c in zip(X, clicks):
            w.writerow([repr(float(v)) for v in x] + [int(c)])


class LinearClickModel:
    """p(x) = base * (1 + x_1); ``base`` chosen so that E[p] over uniform
    contexts equals ``click_rate``."""

    def __init__(self, click_rate: float = 0.0407):
        self.click_rate = click_rate
        self.base = click_rate / 1.5

    def __call__(self, X: np.ndarray) -> np.ndarray:
        return self.base * (1.0 + X[:, 0])


class CellClickModel:
    """Histogram estimate of the click probability on a uniform m^d grid."""

    def __init__(self, X: np.ndarray, clicks: np.ndarray, m: int):
        from .core import PartitionSpec

        self.spec = PartitionSpec(X.shape[1], m)
        cells = self.spec.locate_many(X)
        uniq, inv = np.unique(cells, return_inverse=True)
        rates = np.bincount(inv, weights=clicks) / np.bincount(inv)
        self._rate = dict(zip(uniq.tolist(), rates.tolist()))
        self._overall = float(clicks.mean())

    def __call__(self, X):
        cells = self.spec.locate_many(X)
        return np.array([self._rate.get(int(c), self._overall) for c in cells])


def synthetic_replay(n: int, d: int = 4, click_rate: float = 0.0407, seed=None):
    """Schema-compatible surrogate for logged display data."""
    rng = np.random.default_rng(seed)
    model = LinearClickModel(click_rate)
    X = rng.random((n, d))
    clicks = (rng.random(n) < model(X)).astype(np.float64)
    return X, clicks, model


class Replay(Environment):
    """Two actions per logged round: display (reward ``(click_t, 0)``) or
    skip (reward ``(0, 1)``). ``click_model`` supplies the ground truth the
    regret oracle uses; the learner only ever sees logged clicks."""

    name = "replay"

    def __init__(self, X: np.ndarray, clicks: np.ndarray, click_model: Callable, seed=None,
                 holder: tuple[float, float] | None = None):
        super().__init__(seed)
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or len(X) == 0 or len(clicks) != len(X):
            raise ConfigError("replay needs a non-empty (n, d) record set with one click per row")
        self.X = X
        self.clicks = np.asarray(clicks, dtype=np.float64)
        self.click_model = click_model
        self._holder = holder

    def __len__(self) -> int:
        return len(self.X)

    def dims(self):
        return self.X.shape[1]

    def num_arms(self):
        return 2

    def holder_constants(self):
        return self._holder

    def _index(self, ts):
        ts = np.asarray(ts)
        if len(ts) and (ts.min() < 1 or ts.max() > len(self.X)):
            raise ConfigError(f"replay file exhausted: round {int(ts.max())} > {len(self.X)} records")
        return ts - 1

    def contexts(self, ts, rng=None):
        return self.X[self._index(ts)]

    def means_batch(self, X):
        X = _check_2d(X, self.dims())
        mu = np.zeros((len(X), 2, 2))
        mu[:, DISPLAY, 0] = self.click_model(X)
        mu[:, SKIP, 1] = 1.0
        return mu

    def rewards_from_uniforms(self, X, U, ts):
        out = np.zeros((len(X), 2, 2))
        out[:, DISPLAY, 0] = self.clicks[self._index(ts)]
        out[:, SKIP, 1] = 1.0
        return out


# -- periodic extension --------------------------------------------------------

def default_profile(s):
    """0.75 + 0.25 sin(2 pi s): a daily-style modulation in [0.5, 1]."""
    return 0.75 + 0.25 * np.sin(2 * np.pi * np.asarray(s, dtype=np.float64))


class PeriodicWrap(Environment):
    """Appends the time context ``(t mod period) / period`` and scales every
    mean of the inner environment by ``profile(time context)``.

    Samples are the inner sample thinned by an extra Bernoulli(profile)."""

    name = "periodic"

    def __init__(self, inner: Environment, period: int, profile: Callable = default_profile,
                 profile_lipschitz: float = math.pi / 2, seed=None):
        super().__init__(seed)
        if int(period) != period or period < 2:
            raise InvalidInputError("period must be an integer >= 2")
        self.inner = inner
        self.period = int(period)
        self.profile = profile
        self.profile_lipschitz = profile_lipschitz
        self.n_uniforms = inner.n_uniforms + 1

    def dims(self):
        return self.inner.dims() + 1

    def num_arms(self):
        return self.inner.num_arms()

    def tie_tolerance(self):
        return self.inner.tie_tolerance()

    def holder_constants(self):
        inner = self.inner.holder_constants()
        if inner is None:
            return None
        L, alpha = inner
        return (L + self.profile_lipschitz * self.dims() ** ((1 - alpha) / 2), alpha)

    def time_context(self, ts):
        return (np.asarray(ts) % self.period) / self.period

    def contexts(self, ts, rng):
        return np.column_stack([self.inner.contexts(ts, rng), self.time_context(ts)])

    def means_batch(self, X):
        X = _check_2d(X, self.dims())
        return self.profile(X[:, -1])[:, None, None] * self.inner.means_batch(X[:, :-1])

    def rewards_from_uniforms(self, X, U, ts):
        X = _check_2d(X, self.dims())
        k = self.inner.n_uniforms
        keep = (U[:, k] < self.profile(X[:, -1])).astype(np.float64)
        return self.inner.rewards_from_uniforms(X[:, :-1], U[:, :k], ts) * keep[:, None, None]
