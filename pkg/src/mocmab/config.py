"""Experiment configuration: strict JSON parsing and default resolution."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any

from .core import ConfigError, HyperParams, InvalidInputError, default_cells_per_axis
from .environments import (
    CellClickModel,
    GaussianSurface,
    Multichannel,
    PeriodicWrap,
    Replay,
    load_replay_csv,
    synthetic_replay,
)
from .policies import ALGORITHMS

EXPERIMENTS = ("synthetic_gaussian", "multichannel", "replay", "periodic")
MODES = ("two_d_optimal", "pareto_optimal")
SCALE_SWEEP = (1.0, 1 / 5, 1 / 10, 1 / 15, 1 / 20, 1 / 25, 1 / 30)
SCALE_LABELS = ("1", "1over5", "1over10", "1over15", "1over20", "1over25", "1over30")

DEFAULTS = {
    "synthetic_gaussian": dict(horizon=100_000, runs=100, beta=1.0),
    "multichannel": dict(horizon=1_000_000, runs=20, beta=1.0),
    "replay": dict(horizon=100_000, runs=10, beta=0.1),
    "periodic": dict(horizon=100_000, runs=20, beta=1.0),
}

ENV_KEYS = {
    "synthetic_gaussian": {"variance": 0.3},
    "multichannel": {"rates": [1.0, 0.5, 0.25, 0.1], "lambdas": [0.25, 0.25], "snr_max": 5.0},
    "replay": {"path": None, "dims": 4, "click_rate": 0.0407, "records": None, "estimate_m": 10},
    "periodic": {"variance": 0.3, "period": 10_000, "use_time_context": True},
}

TOP_KEYS = {"experiment", "horizon", "runs", "base_seed", "algorithms", "hyperparams", "mode",
            "environment", "output_dir", "checkpoints", "dump_rounds", "scalarized_schedule"}
HYPER_KEYS = {"L", "alpha", "beta", "m", "scale", "scale_sweep"}


@dataclass(frozen=True)
class Hyper:
    L: float = 1.0
    alpha: float = 1.0
    beta: float = 1.0
    m: int | None = None
    scale: float = 1.0
    scale_sweep: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    horizon: int
    runs: int
    base_seed: int = 0
    algorithms: tuple[str, ...] = ALGORITHMS
    hyperparams: Hyper = field(default_factory=Hyper)
    mode: str = "two_d_optimal"
    environment: dict = field(default_factory=dict)
    output_dir: str = "results"
    checkpoints: int = 50
    dump_rounds: bool = False
    scalarized_schedule: str = "random"

    def with_scale(self, scale: float) -> "ExperimentConfig":
        return replace(self, hyperparams=replace(self.hyperparams, scale=scale))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["algorithms"] = list(self.algorithms)
        return d


def _int(val, path: str, lo: int | None = None) -> int:
    if isinstance(val, bool) or not isinstance(val, (int, float)) or int(val) != val:
        raise ConfigError(f"{path}: expected an integer, got {val!r}")
    if lo is not None and val < lo:
        raise ConfigError(f"{path}: must be >= {lo}, got {val}")
    return int(val)


def _num(val, path: str) -> float:
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {val!r}")
    return float(val)


def _bool(val, path: str) -> bool:
    if not isinstance(val, bool):
        raise ConfigError(f"{path}: expected true/false, got {val!r}")
    return val


def _reject_unknown(d: dict, allowed, path: str) -> None:
    if not isinstance(d, dict):
        raise ConfigError(f"{path or '<root>'}: expected an object")
    for k in d:
        if k not in allowed:
            where = f"{path}.{k}" if path else k
            raise ConfigError(f"{where}: unknown key {k!r}")


def config_from_dict(raw: dict[str, Any]) -> ExperimentConfig:
    _reject_unknown(raw, TOP_KEYS, "")
    exp = raw.get("experiment")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"experiment: must be one of {EXPERIMENTS}, got {exp!r}")
    dflt = DEFAULTS[exp]

    hraw = raw.get("hyperparams", {})
    _reject_unknown(hraw, HYPER_KEYS, "hyperparams")
    hyper = Hyper(
        L=_num(hraw.get("L", 1.0), "hyperparams.L"),
        alpha=_num(hraw.get("alpha", 1.0), "hyperparams.alpha"),
        beta=_num(hraw.get("beta", dflt["beta"]), "hyperparams.beta"),
        m=None if hraw.get("m") is None else _int(hraw["m"], "hyperparams.m", 1),
        scale=_num(hraw.get("scale", 1.0), "hyperparams.scale"),
        scale_sweep=_bool(hraw.get("scale_sweep", False), "hyperparams.scale_sweep"),
    )
    if not hyper.L > 0:
        raise ConfigError("hyperparams.L: must be positive")
    if not 0 < hyper.alpha <= 1:
        raise ConfigError("hyperparams.alpha: must lie in (0, 1]")
    if not hyper.beta > 0:
        raise ConfigError("hyperparams.beta: must be positive")
    if not 0 < hyper.scale <= 1:
        raise ConfigError("hyperparams.scale: must lie in (0, 1]")

    algs = raw.get("algorithms", list(ALGORITHMS))
    if not isinstance(algs, list) or not algs:
        raise ConfigError("algorithms: expected a non-empty list")
    for i, a in enumerate(algs):
        if a not in ALGORITHMS:
            raise ConfigError(f"algorithms[{i}]: unknown algorithm {a!r}")
    if len(set(algs)) != len(algs):
        raise ConfigError("algorithms: duplicate entries")

    eraw = raw.get("environment", {})
    _reject_unknown(eraw, ENV_KEYS[exp], "environment")
    env = {**ENV_KEYS[exp], **eraw}

    mode = raw.get("mode", "two_d_optimal")
    if mode not in MODES:
        raise ConfigError(f"mode: must be one of {MODES}, got {mode!r}")
    sched = raw.get("scalarized_schedule", "random")
    if sched not in ("random", "round_robin"):
        raise ConfigError(f"scalarized_schedule: must be 'random' or 'round_robin', got {sched!r}")
    out = raw.get("output_dir", f"results/{exp}")
    if not isinstance(out, str) or not out:
        raise ConfigError("output_dir: expected a path string")

    cfg = ExperimentConfig(
        experiment=exp,
        horizon=_int(raw.get("horizon", dflt["horizon"]), "horizon", 1),
        runs=_int(raw.get("runs", dflt["runs"]), "runs", 1),
        base_seed=_int(raw.get("base_seed", 0), "base_seed", 0),
        algorithms=tuple(algs),
        hyperparams=hyper,
        mode=mode,
        environment=env,
        output_dir=out,
        checkpoints=_int(raw.get("checkpoints", 50), "checkpoints", 2),
        dump_rounds=_bool(raw.get("dump_rounds", False), "dump_rounds"),
        scalarized_schedule=sched,
    )
    # Resolve m now so the echoed config is complete, and surface
    # environment errors before any simulation.
    env_obj = build_environment(cfg, cfg.base_seed)
    m = resolved_params(cfg, env_obj).m
    return replace(cfg, hyperparams=replace(hyper, m=m))


def parse_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: malformed JSON at line {e.lineno} column {e.colno}: {e.msg}") from None
    return config_from_dict(raw)


_REPLAY_CACHE: dict = {}


def _replay_records(cfg: ExperimentConfig):
    e = cfg.environment
    key = (e.get("path"), e["dims"], e["click_rate"], e.get("records"), cfg.base_seed, cfg.horizon,
           e.get("estimate_m"))
    if key not in _REPLAY_CACHE:
        if e.get("path"):
            X, clicks = load_replay_csv(e["path"])
            model = CellClickModel(X, clicks, _int(e["estimate_m"], "environment.estimate_m", 1))
            holder = None
        else:
            n = e.get("records") or cfg.horizon
            X, clicks, model = synthetic_replay(_int(n, "environment.records", 1),
                                                _int(e["dims"], "environment.dims", 1),
                                                _num(e["click_rate"], "environment.click_rate"),
                                                seed=cfg.base_seed)
            holder = (1.0, 1.0)
        _REPLAY_CACHE.clear()
        _REPLAY_CACHE[key] = (X, clicks, model, holder)
    return _REPLAY_CACHE[key]


def build_environment(cfg: ExperimentConfig, seed: int):
    e = cfg.environment
    try:
        if cfg.experiment == "synthetic_gaussian":
            return GaussianSurface(_num(e["variance"], "environment.variance"), seed=seed)
        if cfg.experiment == "multichannel":
            return Multichannel(e["rates"], e["lambdas"], _num(e["snr_max"], "environment.snr_max"),
                                seed=seed)
        if cfg.experiment == "replay":
            X, clicks, model, holder = _replay_records(cfg)
            if len(X) < cfg.horizon:
                raise ConfigError(f"environment: replay has {len(X)} records, fewer than horizon {cfg.horizon}")
            return Replay(X, clicks, model, seed=seed, holder=holder)
        inner = GaussianSurface(_num(e["variance"], "environment.variance"), seed=seed)
        _bool(e["use_time_context"], "environment.use_time_context")
        return PeriodicWrap(inner, _int(e["period"], "environment.period", 2), seed=seed)
    except InvalidInputError as err:
        raise ConfigError(f"environment: {err}") from None
    except (TypeError, ValueError) as err:
        if isinstance(err, ConfigError):
            raise
        raise ConfigError(f"environment: {err}") from None


def policy_dims(cfg: ExperimentConfig, env) -> int:
    """Context dimension the learners see (the periodic experiment can hide
    the time coordinate)."""
    if cfg.experiment == "periodic" and not cfg.environment["use_time_context"]:
        return env.dims() - 1
    return env.dims()


def resolved_params(cfg: ExperimentConfig, env) -> HyperParams:
    h = cfg.hyperparams
    d = policy_dims(cfg, env)
    m = h.m if h.m is not None else default_cells_per_axis(cfg.horizon, h.alpha, d, cfg.mode)
    try:
        return HyperParams(L=h.L, alpha=h.alpha, m=m, beta=h.beta, T=cfg.horizon,
                           num_arms=env.num_arms(), scale=h.scale)
    except InvalidInputError as err:
        raise ConfigError(f"hyperparams: {err}") from None
