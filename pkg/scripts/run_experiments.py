"""Run the shipped experiment configs through the CLI.

Usage: python3 scripts/run_experiments.py [--runs N] [--jobs N] [name ...]
where name is one of exp1_gaussian, exp2_multichannel, exp3_replay, periodic
(default: all). ``--runs`` overrides the config's run count, which is handy
for a quick desk-scale pass.
"""
import argparse
import json
import sys
import tempfile
from pathlib import Path

from mocmab.cli import main as cli_main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
NAMES = ("exp1_gaussian", "exp2_multichannel", "exp3_replay", "periodic")


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("names", nargs="*", default=list(NAMES), choices=NAMES + ((),))
    ap.add_argument("--runs", type=int, default=None)
    ap.add_argument("--jobs", type=int, default=None)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    for name in args.names:
        raw = json.loads((CONFIGS / f"{name}.json").read_text())
        if args.runs:
            raw["runs"] = args.runs
        raw["output_dir"] = str(Path(args.out) / name)
        with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as f:
            json.dump(raw, f)
        argv = ["run", "--config", f.name]
        if args.jobs:
            argv += ["--jobs", str(args.jobs)]
        print(f"== {name}", file=sys.stderr)
        code = cli_main(argv)
        Path(f.name).unlink()
        if code:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
