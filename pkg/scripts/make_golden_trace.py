"""Regenerate the frozen MOC-MAB golden trace used by the test suite.

Only rerun this after an intentional change to the learner's decision rule;
the fixture exists to catch unintentional ones.
"""
import json
from pathlib import Path

import numpy as np

from mocmab.core import HyperParams
from mocmab.policies import MocMab

OUT = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "golden_mocmab.json"


def main() -> None:
    params = HyperParams(L=1.0, alpha=1.0, m=3, beta=1.0, T=1000, num_arms=3, scale=0.5)
    pol = MocMab(params, d=2, seed=2024)
    rng = np.random.default_rng(7)
    p = np.array([[0.8, 0.2], [0.8, 0.7], [0.3, 0.9]])
    trace = []
    for t in range(1, 601):
        x = rng.random(2)
        a = pol.select(x, t)
        r = (rng.random(2) < p[a]).astype(float)
        pol.update(x, a, r)
        trace.append({"x": x.tolist(), "arm": a, "r": r.tolist()})
    table = {str(c): v.tolist() for c, v in pol.stats_table().items()}
    OUT.write_text(json.dumps({"params": params.__dict__, "d": 2, "seed": 2024,
                               "trace": trace, "table": table}) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
