"""Experiment orchestration: JSON configs in, CSV traces and summaries out.

The method names follow the benchmark naming dictionary:

* "Exact Hess., Func. Search"   -- exact Hessian, function-value search
* "Inexact Hess., Func. Search" -- the problem's matched approximation
                                   (weighted Gauss-Newton for soft maximum,
                                   the Gauss-Newton/Fisher combination for
                                   residual powers, Fisher for logistic)
* "Exact Hess., Grad. Search"   -- exact Hessian, inner-product search (l=1)
* "Gradient Method"             -- H = 0 with B = I
* "Gauss-Newton"                -- H = 0 with B = A^T A
* "Fisher Term of H"            -- rank-one curvature with B = A^T A
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from gnewton.datasets import Dataset, load_libsvm, synthetic_dataset
from gnewton.gns import GammaBoundSpec, GammaEstimatorConfig
from gnewton.linalg import NormPair
from gnewton.objectives import (
    LinearResidualOperator,
    Oracle,
    chebyshev_residuals,
    logistic_oracle,
    logsumexp_oracle,
    power_residual_oracle,
    rosenbrock_residuals,
)
from gnewton.solver import (
    EmpiricalGamma,
    FixedGamma,
    FuncSearch,
    GradSearch,
    RunResult,
    SolverConfig,
    StepTrace,
    StopRule,
    TheoreticalGamma,
    run,
)
from gnewton.strategies import (
    ConstantGaussNewton,
    ExactHessian,
    FisherCurvature,
    HessianStrategy,
    PowerResidualCurvature,
    PowerResidualRankOne,
    WeightedGaussNewton,
    ZeroCurvature,
)

TRACE_HEADER = ("iter,f,grad_dual_norm,gamma,backtracks,step_norm,"
                "oracle_calls,wall_seconds,accepted")
FAILURE_MAP_HEADER = "x1,x2,status,iters,final_f"


class ConfigError(ValueError):
    pass


@dataclass
class Problem:
    oracle: Oracle
    dim: int
    dataset: Dataset | None = None
    kind: str = ""


@dataclass
class RunArtifact:
    name: str
    x0_index: int
    trace_path: Path
    summary_path: Path
    result: RunResult


def _build_dataset(spec: dict) -> Dataset:
    kind = spec.get("kind")
    if kind == "synthetic":
        return synthetic_dataset(int(spec["rows"]), int(spec["cols"]),
                                 int(spec.get("seed", 0)))
    if kind == "libsvm":
        path = Path(spec["path"])
        if not path.exists():
            raise ConfigError(f"dataset file not found: {path}")
        return load_libsvm(path, spec.get("n_features"))
    raise ConfigError(f"unknown dataset kind {kind!r}")


def build_problem(spec: dict) -> Problem:
    kind = spec.get("kind")
    if kind == "logsumexp":
        data = _build_dataset(spec["dataset"])
        oracle = logsumexp_oracle(data, float(spec.get("mu", 1.0)))
        return Problem(oracle=oracle, dim=data.n_features, dataset=data,
                       kind=kind)
    if kind == "logistic":
        data = _build_dataset(spec["dataset"])
        return Problem(oracle=logistic_oracle(data), dim=data.n_features,
                       dataset=data, kind=kind)
    if kind == "power_residual":
        op_spec = spec.get("operator", {})
        op_kind = op_spec.get("kind")
        p = float(spec.get("p", 2.0))
        data = None
        if op_kind == "linear":
            data = _build_dataset(op_spec["dataset"])
            op = LinearResidualOperator.from_dataset(data)
        elif op_kind == "rosenbrock":
            op = rosenbrock_residuals()
        elif op_kind == "chebyshev":
            op = chebyshev_residuals(int(op_spec["d"]))
        else:
            raise ConfigError(f"unknown operator kind {op_kind!r}")
        oracle = power_residual_oracle(op, p)
        return Problem(oracle=oracle, dim=op.dim, dataset=data, kind=kind)
    raise ConfigError(f"unknown problem kind {kind!r}")


def _matched_inexact_strategy(problem: Problem) -> HessianStrategy:
    if problem.kind == "logsumexp":
        return WeightedGaussNewton()
    if problem.kind == "logistic":
        return FisherCurvature()
    if problem.kind == "power_residual":
        return PowerResidualCurvature()
    raise ConfigError(f"no matched approximation for {problem.kind!r}")


def _strategy(name: str, problem: Problem) -> HessianStrategy:
    table = {
        "exact": ExactHessian,
        "zero": ZeroCurvature,
        "fisher": FisherCurvature,
        "weighted_gauss_newton": WeightedGaussNewton,
        "nonlinear_power_full": PowerResidualCurvature,
        "fisher_rank_one": PowerResidualRankOne,
        "matched": lambda: _matched_inexact_strategy(problem),
    }
    if name == "gauss_newton_constant":
        if problem.dataset is None:
            raise ConfigError("gauss_newton_constant needs a dataset problem")
        return ConstantGaussNewton(problem.dataset)
    if name not in table:
        raise ConfigError(f"unknown strategy {name!r}")
    return table[name]()


def _norm(name: str, problem: Problem) -> NormPair:
    if name in ("identity", None):
        return NormPair.identity(problem.dim)
    if name == "gram":
        if problem.dataset is None:
            raise ConfigError("gram norm needs a dataset problem")
        return NormPair(problem.dataset.gram())
    raise ConfigError(f"unknown norm {name!r}")


def _gamma_rule(spec: dict):
    kind = spec.get("kind", "func-search")
    if kind == "func-search":
        return FuncSearch(gamma0=float(spec.get("gamma0", 1.0)))
    if kind == "grad-search":
        return GradSearch(l=float(spec.get("l", 1.0)),
                          M0=float(spec.get("M0", 1.0)))
    if kind == "fixed":
        return FixedGamma(gamma=float(spec["gamma"]))
    if kind == "theoretical":
        terms = tuple((float(M), float(a)) for M, a in spec["terms"])
        return TheoreticalGamma(GammaBoundSpec(terms=terms))
    if kind == "empirical-gns":
        fields = {k: spec[k] for k in ("n_dirs", "n_radii", "grid_points",
                                       "tol", "seed") if k in spec}
        return EmpiricalGamma(GammaEstimatorConfig(**fields))
    raise ConfigError(f"unknown gamma rule {kind!r}")


METHOD_PRESETS = {
    "Exact Hess., Func. Search": dict(strategy="exact", norm="identity",
                                      gamma_rule={"kind": "func-search"}),
    "Inexact Hess., Func. Search": dict(strategy="matched", norm="identity",
                                        gamma_rule={"kind": "func-search"}),
    "Exact Hess., Grad. Search": dict(strategy="exact", norm="identity",
                                      gamma_rule={"kind": "grad-search", "l": 1.0}),
    "Gradient Method": dict(strategy="zero", norm="identity",
                            gamma_rule={"kind": "func-search"}),
    "Gauss-Newton": dict(strategy="zero", norm="gram",
                         gamma_rule={"kind": "func-search"}),
    "Fisher Term of H": dict(strategy="fisher_rank_one", norm="gram",
                             gamma_rule={"kind": "func-search"}),
}


def _method_config(m: dict, problem: Problem, stop: StopRule,
                   seed: int) -> tuple[str, SolverConfig]:
    name = m.get("name", "unnamed")
    spec = dict(METHOD_PRESETS.get(name, {}))
    spec.update(m)
    if "strategy" not in spec:
        raise ConfigError(f"method {name!r} is neither a preset nor fully "
                          f"specified (missing 'strategy')")
    cfg = SolverConfig(
        gamma_rule=_gamma_rule(spec.get("gamma_rule", {})),
        strategy=_strategy(spec["strategy"], problem),
        norm=_norm(spec.get("norm", "identity"), problem),
        stop=stop,
        seed=seed,
        max_backtracks=int(spec.get("max_backtracks", 60)),
    )
    return name, cfg


def _x0_list(spec: dict, dim: int) -> list[np.ndarray]:
    kind = spec.get("kind", "zeros")
    if kind == "zeros":
        return [np.zeros(dim)]
    if kind == "constant":
        return [np.full(dim, float(spec["value"]))]
    if kind == "explicit":
        v = np.asarray(spec["vector"], dtype=float)
        if v.shape != (dim,):
            raise ConfigError(f"x0 vector has shape {v.shape}, expected ({dim},)")
        return [v]
    if kind == "grid":
        if dim != 2:
            raise ConfigError("grid starting points need a 2-D problem")
        lo, hi = spec.get("range", [-2.0, 2.0])
        steps = int(spec.get("steps", 21))
        axis = np.linspace(lo, hi, steps)
        return [np.array([a, b]) for a in axis for b in axis]
    raise ConfigError(f"unknown x0 kind {kind!r}")


def _stop_rule(spec: dict) -> StopRule:
    try:
        return StopRule(
            grad_tol=spec.get("grad_tol"),
            f_tol=spec.get("f_tol"),
            max_iters=spec.get("max_iters"),
            max_oracle_calls=spec.get("max_oracle_calls"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _fmt(x: float) -> str:
    return repr(float(x))


def emit_trace_csv(trace: list[StepTrace], path) -> None:
    """Write a trace with shortest round-trip decimals, one row per iterate."""
    lines = [TRACE_HEADER]
    for r in trace:
        lines.append(",".join([
            str(r.k), _fmt(r.f), _fmt(r.grad_dual_norm), _fmt(r.gamma),
            str(r.backtracks), _fmt(r.step_primal_norm),
            str(r.oracle_calls_cum), _fmt(r.wall_seconds),
            "true" if r.accepted else "false",
        ]))
    Path(path).write_text("\n".join(lines) + "\n")


def parse_trace_csv(path) -> list[StepTrace]:
    lines = Path(path).read_text().strip().splitlines()
    if not lines or lines[0] != TRACE_HEADER:
        raise ValueError(f"{path}: unexpected trace header")
    out = []
    for line in lines[1:]:
        k, f, gd, gamma, t, step, calls, wall, acc = line.split(",")
        out.append(StepTrace(
            k=int(k), f=float(f), grad_dual_norm=float(gd), gamma=float(gamma),
            backtracks=int(t), step_primal_norm=float(step),
            oracle_calls_cum=int(calls), wall_seconds=float(wall),
            accepted=acc == "true"))
    return out


def _slug(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-")


def run_experiment(cfg: dict, output_dir=None) -> list[RunArtifact]:
    """Run every (method, x0) pair and write one CSV + JSON summary per run.

    Solver failures are recorded in the summary status, not raised; grid x0
    configs additionally write one failure-map CSV per method.
    """
    problem = build_problem(cfg.get("problem", {}))
    stop = _stop_rule(cfg.get("stop", {}))
    seed = int(cfg.get("seed", 0))
    out = Path(output_dir if output_dir is not None
               else cfg.get("output_dir", "gnewton-out"))
    out.mkdir(parents=True, exist_ok=True)

    methods = cfg.get("methods", [])
    if not methods:
        raise ConfigError("config needs at least one method")
    x0s = _x0_list(cfg.get("x0", {}), problem.dim)
    grid_mode = cfg.get("x0", {}).get("kind") == "grid"

    artifacts = []
    run_index = 0
    for m in methods:
        name, solver_cfg = _method_config(m, problem, stop,
                                          seed=seed * 10007 + run_index)
        rows = []
        for i, x0 in enumerate(x0s):
            t0 = time.perf_counter()
            result = run(problem.oracle, solver_cfg, x0)
            wall = time.perf_counter() - t0
            slug = _slug(name)
            trace_path = out / f"{slug}__x0-{i:03d}.csv"
            summary_path = out / f"{slug}__x0-{i:03d}.json"
            emit_trace_csv(result.trace, trace_path)
            summary = {
                "name": name,
                "x0_index": i,
                "x0": [float(v) for v in x0],
                "dim": problem.dim,
                "status": result.status,
                "iterations": result.iterations,
                "final_f": result.f_final,
                "final_grad_dual_norm": result.grad_final,
                "oracle_calls": result.oracle_calls,
                "wall_seconds": wall,
                "trace_csv": trace_path.name,
                "seed": solver_cfg.seed,
                "config_echo": {"problem": cfg.get("problem", {}),
                                "method": m, "stop": cfg.get("stop", {})},
            }
            if problem.dim == 2:
                # 2-D trajectories feed the contour-overlay figures
                summary["iterates"] = [[float(p[0]), float(p[1])]
                                       for p in result.iterates]
            summary_path.write_text(json.dumps(summary, indent=2,
                                               sort_keys=True) + "\n")
            artifacts.append(RunArtifact(name=name, x0_index=i,
                                         trace_path=trace_path,
                                         summary_path=summary_path,
                                         result=result))
            if grid_mode:
                rows.append(",".join([
                    _fmt(x0[0]), _fmt(x0[1]), result.status,
                    str(result.iterations), _fmt(result.f_final)]))
            run_index += 1
        if grid_mode:
            map_path = out / f"{_slug(name)}__failure-map.csv"
            map_path.write_text("\n".join([FAILURE_MAP_HEADER] + rows) + "\n")
    return artifacts


def load_config(path) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON ({exc})") from exc
