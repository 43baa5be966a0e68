"""Serialization of experiment results: trace CSVs, summary JSON, SVG plots."""
from __future__ import annotations

import csv
import json
import os
from pathlib import Path

import numpy as np

from .core import ConfigError
from .policies import LABELS
from .svgplot import line_plot

TRACE_HEADER = ("t", "reg1_mean", "reg1_std", "reg2_mean", "reg2_std", "pareto_mean",
                "pareto_std", "cumrw1_mean", "cumrw2_mean")
PLOTS = {
    "regret_dominant.svg": ("reg1", "Regret in the dominant objective", "Reg1(t)"),
    "regret_nondominant.svg": ("reg2", "Regret in the non-dominant objective", "Reg2(t)"),
    "pareto_regret.svg": ("pareto", "Pareto regret", "PR(t)"),
}


def preflight_output_dir(path, create: bool = False) -> Path:
    """Fail early (ConfigError) if ``path`` cannot be created or written.

    With ``create=False`` nothing on disk is touched; with ``create=True`` the
    directory is made now, so that failures surface before any simulation.
    """
    path = Path(path)
    if create:
        try:
            path.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ConfigError(f"output_dir: cannot create {path}: {e.strerror or e}") from None
    probe = path
    while not probe.exists():
        if probe.parent == probe:
            break
        probe = probe.parent
    if probe.exists() and not probe.is_dir():
        raise ConfigError(f"output_dir: {probe} exists and is not a directory")
    if not os.access(probe, os.W_OK | os.X_OK):
        raise ConfigError(f"output_dir: {probe} is not writable")
    return path


def trace_rows(result, alg: str) -> list[list[float]]:
    cols = [result.checkpoints.astype(np.float64)]
    for s in ("reg1", "reg2", "pareto"):
        cols += [result.mean(alg, s), result.std(alg, s)]
    cols += [result.mean(alg, "cumrw1"), result.mean(alg, "cumrw2")]
    return np.column_stack(cols).tolist()


def write_trace_csv(path, result, alg: str) -> None:
    with Path(path).open("w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for row in trace_rows(result, alg):
            w.writerow([str(int(row[0]))] + [repr(v) for v in row[1:]])


def read_trace_csv(path) -> dict[str, np.ndarray]:
    with Path(path).open(newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        data = np.array([[float(v) for v in r] for r in reader])
    return {h: data[:, i] for i, h in enumerate(header)}


def summary_dict(result) -> dict:
    cfg = result.config
    algs = {}
    for alg in result.runs:
        algs[alg] = {
            "label": LABELS[alg],
            "final": {s: {"mean": result.final(alg, s), "std": float(result.std(alg, s)[-1])}
                      for s in ("reg1", "reg2", "pareto", "cumrw1", "cumrw2")},
            "exponents": result.exponents(alg),
        }
    env = None
    if result.envelope is not None:
        p = result.envelope
        env = {"violations": result.envelope_violations, "C1_max": p.C1_max, "C2_max": p.C2_max,
               "A_mT": p.A_mT, "B_mT": p.B_mT, "v": p.v, "m": p.m, "d": p.d}
    return {
        "experiment": cfg.experiment,
        "horizon": cfg.horizon,
        "runs": cfg.runs,
        "base_seed": cfg.base_seed,
        "scale": cfg.hyperparams.scale,
        "m": cfg.hyperparams.m,
        "algorithms": algs,
        "envelope": env,
        "wall_clock_s": result.wall_clock,
    }


def _xticks(ckpts: np.ndarray, n: int = 6) -> list[int]:
    idx = np.unique(np.linspace(0, len(ckpts) - 1, n).round().astype(int))
    return [int(ckpts[i]) for i in idx]


def emit_outputs(result, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for alg in result.runs:
        p = out / f"trace_{alg}.csv"
        write_trace_csv(p, result, alg)
        written.append(p)
    p = out / "summary.json"
    p.write_text(json.dumps(summary_dict(result), indent=2, sort_keys=True) + "\n")
    written.append(p)
    for fname, (series, title, ylabel) in PLOTS.items():
        svg = line_plot(result.checkpoints, {LABELS[a]: result.mean(a, series) for a in result.runs},
                        title, "round t", ylabel, _xticks(result.checkpoints))
        p = out / fname
        p.write_text(svg)
        written.append(p)
    if result.rounds:
        rdir = out / "rounds"
        rdir.mkdir(exist_ok=True)
        for r, per_alg in enumerate(result.rounds):
            for alg, arr in per_alg.items():
                p = rdir / f"run{r}_{alg}.csv"
                with p.open("w", newline="") as f:
                    w = csv.writer(f, lineterminator="\n")
                    w.writerow(["t", "arm", "reg1_inc", "reg2_inc", "pareto_inc"])
                    for row in arr.tolist():
                        w.writerow([int(row[0]), int(row[1])] + [repr(v) for v in row[2:]])
    return written


def write_resolved_config(cfg, out_dir) -> Path:
    p = Path(out_dir) / "resolved_config.json"
    p.write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")
    return p
