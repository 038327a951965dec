"""Command-line entry point.

Subcommands:
  run <config.json>          run a benchmark config, write traces/summaries
  gamma-probe <config.json>  estimate gamma along the first method's trajectory
  inexactness <config.json>  measure ||hess f - H|| envelopes along a trajectory
  predict <config.json>      evaluate the complexity predictors
  gen-data                   write a synthetic dataset in libsvm format

Exit codes: 0 success, 1 configuration error, 2 run failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from gnewton import bench
from gnewton.bench import ConfigError
from gnewton.datasets import save_libsvm, synthetic_dataset
from gnewton.gns import GammaBoundSpec, GammaEstimatorConfig, estimate_gamma
from gnewton.linalg import dual_norm
from gnewton.solver import run as solver_run
from gnewton.strategies import measure_inexactness
from gnewton.theory import (
    ProblemClassParams,
    k_convex,
    k_grad_dominated,
    k_inexact_convex,
    k_nonconvex,
    pnorm_problem_params,
)


def _apply_overrides(cfg: dict, args) -> dict:
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.max_iters is not None:
        cfg.setdefault("stop", {})["max_iters"] = args.max_iters
    if args.grad_tol is not None:
        cfg.setdefault("stop", {})["grad_tol"] = args.grad_tol
    if args.out is not None:
        cfg["output_dir"] = args.out
    return cfg


def _cmd_run(args) -> int:
    cfg = _apply_overrides(bench.load_config(args.config), args)
    artifacts = bench.run_experiment(cfg)
    if not args.quiet:
        for a in artifacts:
            r = a.result
            print(f"{a.name} [x0 {a.x0_index}]: {r.status} "
                  f"iters={r.iterations} f={r.f_final:.3e} "
                  f"grad={r.grad_final:.3e} calls={r.oracle_calls} "
                  f"-> {a.trace_path}")
    grid_mode = cfg.get("x0", {}).get("kind") == "grid"
    if not grid_mode and artifacts and \
            all(a.result.status in ("failed-linalg", "stalled")
                for a in artifacts):
        return 2
    return 0


def _first_method_run(cfg: dict):
    problem = bench.build_problem(cfg.get("problem", {}))
    stop = bench._stop_rule(cfg.get("stop", {}))
    methods = cfg.get("methods", [])
    if not methods:
        raise ConfigError("config needs at least one method")
    name, solver_cfg = bench._method_config(methods[0], problem, stop,
                                            seed=int(cfg.get("seed", 0)))
    x0 = bench._x0_list(cfg.get("x0", {}), problem.dim)[0]
    return problem, name, solver_cfg, solver_run(problem.oracle, solver_cfg, x0)


def _cmd_gamma_probe(args) -> int:
    cfg = _apply_overrides(bench.load_config(args.config), args)
    problem, name, solver_cfg, result = _first_method_run(cfg)
    probe_cfg = GammaEstimatorConfig(seed=int(cfg.get("seed", 0)))
    step = max(1, len(result.iterates) // max(args.max_points, 1))
    lines = ["iter,gamma_hat,gamma_used,grad_dual_norm"]
    for k in range(0, len(result.iterates), step):
        x = result.iterates[k]
        g = problem.oracle.gradient(x)
        if dual_norm(g, solver_cfg.norm) == 0.0:
            continue
        gam = estimate_gamma(problem.oracle, solver_cfg.strategy, x, g,
                             solver_cfg.norm, probe_cfg)
        row = result.trace[k]
        lines.append(f"{k},{gam!r},{row.gamma!r},{row.grad_dual_norm!r}")
    out = Path(args.out or cfg.get("output_dir", "gnewton-out"))
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{bench._slug(name)}__gamma-probe.csv"
    path.write_text("\n".join(lines) + "\n")
    if not args.quiet:
        print(f"{name}: probed {len(lines) - 1} points -> {path}")
    return 0


def _cmd_inexactness(args) -> int:
    cfg = _apply_overrides(bench.load_config(args.config), args)
    problem, name, solver_cfg, result = _first_method_run(cfg)
    spec = cfg.get("inexactness", {})
    strategy = bench._strategy(spec.get("strategy", "matched"), problem)
    beta = float(spec.get("beta", 0.0))
    pts = result.iterates[: max(args.max_points, 2)]
    rep = measure_inexactness(problem.oracle, strategy, pts, solver_cfg.norm,
                              beta=beta)
    out = Path(args.out or cfg.get("output_dir", "gnewton-out"))
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{bench._slug(name)}__inexactness.json"
    payload = {
        "C1": rep.bound.C1, "C2": rep.bound.C2, "beta": rep.bound.beta,
        "residuals": rep.residuals.tolist(),
        "grad_dual_norms": rep.grad_dual_norms.tolist(),
        "envelope_values": rep.envelope_values.tolist(),
    }
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    if not args.quiet:
        print(f"{name}: C1={rep.bound.C1:.3e} C2={rep.bound.C2:.3e} "
              f"beta={beta} over {len(pts)} points -> {path}")
    return 0


def _cmd_predict(args) -> int:
    cfg = bench.load_config(args.config)
    spec = cfg.get("class_params")
    if spec is None:
        raise ConfigError("predict needs a 'class_params' section")
    if "pnorm_p" in spec:
        params = pnorm_problem_params(float(spec["pnorm_p"]), D=float(spec["D"]),
                                      F0=float(spec["F0"]),
                                      grad0_dual=float(spec["grad0"]))
    else:
        from gnewton.strategies import InexactnessBound
        inex = spec.get("inexactness")
        params = ProblemClassParams(
            spec=GammaBoundSpec(terms=tuple((float(M), float(a))
                                            for M, a in spec["terms"])),
            D=float(spec["D"]), F0=float(spec["F0"]),
            grad0_dual=float(spec["grad0"]),
            dominance=tuple(spec["dominance"]) if spec.get("dominance") else None,
            inexactness=InexactnessBound(*inex) if inex else None)
    epsilons = spec.get("epsilons", [1e-2, 1e-4, 1e-6, 1e-8])
    print("epsilon,k_nonconvex,k_convex,k_grad_dominated,k_inexact_convex")
    for eps in epsilons:
        row = [f"{eps:g}", str(k_nonconvex(params, eps)),
               str(k_convex(params, eps)), str(k_grad_dominated(params, eps))]
        row.append(str(k_inexact_convex(params, eps))
                   if params.inexactness is not None else "-")
        print(",".join(row))
    return 0


def _cmd_gen_data(args) -> int:
    data = synthetic_dataset(args.rows, args.cols, args.seed)
    save_libsvm(data, args.out)
    if not args.quiet:
        print(f"wrote {args.rows}x{args.cols} dataset (seed {args.seed}) "
              f"to {args.out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gnewton",
                                     description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config")
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--max-iters", type=int, dest="max_iters")
        p.add_argument("--grad-tol", type=float, dest="grad_tol")
        p.add_argument("--quiet", action="store_true")

    common(sub.add_parser("run", help="run a benchmark config"))
    p_probe = sub.add_parser("gamma-probe",
                             help="estimate gamma along a trajectory")
    common(p_probe)
    p_probe.add_argument("--max-points", type=int, default=25)
    p_inex = sub.add_parser("inexactness",
                            help="measure Hessian approximation error")
    common(p_inex)
    p_inex.add_argument("--max-points", type=int, default=25)
    p_pred = sub.add_parser("predict", help="evaluate complexity predictors")
    p_pred.add_argument("config")
    p_gen = sub.add_parser("gen-data", help="write a synthetic libsvm file")
    p_gen.add_argument("--rows", type=int, required=True)
    p_gen.add_argument("--cols", type=int, required=True)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True)
    p_gen.add_argument("--quiet", action="store_true")
    return parser


def cli_main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "gamma-probe": _cmd_gamma_probe,
        "inexactness": _cmd_inexactness,
        "predict": _cmd_predict,
        "gen-data": _cmd_gen_data,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - batch boundary
        print(f"run failed: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
