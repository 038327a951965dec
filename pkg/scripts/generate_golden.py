#!/usr/bin/env python3
"""Regenerate the golden artifacts consumed by the frontend plot tests.

Usage: python3 scripts/generate_golden.py [dest]  (default frontend/golden)
"""

import sys
from pathlib import Path

from gnewton.bench import run_experiment

DEST = Path(sys.argv[1] if len(sys.argv) > 1 else "frontend/golden")


def main():
    DEST.mkdir(parents=True, exist_ok=True)

    # 2-D Rosenbrock-residual runs: convergence + contour overlays
    run_experiment({
        "problem": {"kind": "power_residual", "p": 2,
                    "operator": {"kind": "rosenbrock"}},
        "methods": [{"name": "Exact Hess., Func. Search"},
                    {"name": "Inexact Hess., Func. Search"},
                    {"name": "Gradient Method"}],
        "x0": {"kind": "explicit", "vector": [-2.0, 2.0]},
        "stop": {"f_tol": 1e-12, "max_iters": 150},
        "seed": 0,
    }, output_dir=DEST / "rosenbrock")

    # soft-maximum runs: log-scale convergence and gamma traces
    run_experiment({
        "problem": {"kind": "logsumexp", "mu": 1.0,
                    "dataset": {"kind": "synthetic", "rows": 50, "cols": 20,
                                "seed": 1}},
        "methods": [{"name": "Exact Hess., Func. Search"},
                    {"name": "Inexact Hess., Func. Search"},
                    {"name": "Gradient Method"}],
        "x0": {"kind": "zeros"},
        "stop": {"grad_tol": 1e-10, "max_iters": 120},
        "seed": 0,
    }, output_dir=DEST / "logsumexp")

    # failure-region grid for the heatmap
    run_experiment({
        "problem": {"kind": "power_residual", "p": 2,
                    "operator": {"kind": "rosenbrock"}},
        "methods": [{"name": "Exact Hess., Func. Search"},
                    {"name": "Inexact Hess., Func. Search"}],
        "x0": {"kind": "grid", "range": [-2, 2], "steps": 21},
        "stop": {"f_tol": 1e-10, "max_iters": 200},
        "seed": 0,
    }, output_dir=DEST / "failure-map")

    # the per-start trace files of the grid sweep are bulky and unused by the
    # figures; keep only the failure maps
    for p in (DEST / "failure-map").glob("*x0-*.csv"):
        p.unlink()
    for p in (DEST / "failure-map").glob("*x0-*.json"):
        p.unlink()
    print(f"golden artifacts written under {DEST}")


if __name__ == "__main__":
    main()
