"""The optimization loop: regularized Newton steps with step-size control.

One step solves (H(x) + ||grad f(x)||_* / gamma * B) d = grad f(x) and moves
to x - d, which keeps ||d|| <= gamma in the primal norm.  gamma comes from a
fixed value, a closed-form bound evaluated at the current gradient norm, the
sampling estimator, or one of two adaptive searches:

* func-search halves gamma until the per-step progress inequality
  f(x) - f(T) >= (gamma/8) ||grad f(T)||_*^2 / ||grad f(x)||_* holds, then
  doubles the accepted value for the next iteration;
* grad-search doubles M until
  <grad f(T), x - T> >= ||grad f(T)||_*^2 / (4 M ||grad f(x)||_*^l).

Every trial costs one oracle call; with the doubling rule the total after K
iterations telescopes to 2K + log2(gamma_seed_0 / gamma_seed_K), which the
trace bookkeeping preserves exactly by keeping gamma on a dyadic grid.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from gnewton.gns import GammaBoundSpec, GammaEstimatorConfig, estimate_gamma, \
    pi_bound
from gnewton.linalg import GAMMA_MAX, FactorizationError, NormPair, dual_norm, \
    primal_norm, solve_regularized
from gnewton.objectives import Oracle
from gnewton.strategies import HessianStrategy


# ---------------------------------------------------------------------------
# Step-size rules


@dataclass(frozen=True)
class FixedGamma:
    gamma: float


@dataclass(frozen=True)
class TheoreticalGamma:
    """gamma_k = pi(||grad f(x_k)||_*) from a structural bound spec."""

    spec: GammaBoundSpec


@dataclass(frozen=True)
class EmpiricalGamma:
    """gamma_k from the sampling estimator; expensive, small-n diagnostics."""

    cfg: GammaEstimatorConfig = field(default_factory=GammaEstimatorConfig)


@dataclass(frozen=True)
class FuncSearch:
    gamma0: float = 1.0


@dataclass(frozen=True)
class GradSearch:
    """Comparison search with gamma = ||grad f(x)||_*^(1-l) / M.

    The exponent pairing keeps the acceptance condition satisfiable for large
    M at any gradient size; l = 1 gives the constant-per-iteration rule
    gamma = 1/M.
    """

    l: float = 1.0
    M0: float = 1.0

    def __post_init__(self):
        if not 2.0 / 3.0 <= self.l <= 1.0:
            raise ValueError(f"l must lie in [2/3, 1], got {self.l}")


@dataclass(frozen=True)
class StopRule:
    grad_tol: float | None = None
    f_tol: float | None = None
    max_iters: int | None = None
    max_oracle_calls: int | None = None

    def __post_init__(self):
        if (self.grad_tol is None and self.f_tol is None
                and self.max_iters is None):
            raise ValueError("set grad_tol, f_tol or max_iters")


@dataclass
class SolverConfig:
    gamma_rule: object
    strategy: HessianStrategy
    norm: NormPair
    stop: StopRule
    seed: int = 0
    max_backtracks: int = 60


@dataclass
class StepTrace:
    k: int
    f: float
    grad_dual_norm: float
    gamma: float
    backtracks: int
    step_primal_norm: float
    oracle_calls_cum: int
    wall_seconds: float
    accepted: bool = True


@dataclass
class RunResult:
    status: str                    # converged | max_iters | stalled | failed-linalg
    x: np.ndarray
    trace: list
    iterates: list
    oracle_calls: int
    gamma0: float | None = None    # adaptive runs: initial seed
    gamma_seed_final: float | None = None
    gamma_capped: bool = False
    seed_exponent_final: int = 0   # gamma_seed_final = gamma0 * 2**e

    @property
    def iterations(self) -> int:
        return len(self.trace) - 1

    @property
    def f_final(self) -> float:
        return self.trace[-1].f

    @property
    def grad_final(self) -> float:
        return self.trace[-1].grad_dual_norm


# ---------------------------------------------------------------------------
# Single steps


def take_step(oracle: Oracle, strategy: HessianStrategy, x, gamma: float,
              np_: NormPair):
    """x_next = x - (H(x) + ||grad||_*/gamma * B)^-1 grad f(x)."""
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    x = np.asarray(x, dtype=float)
    g = oracle.gradient(x)
    gd = dual_norm(g, np_)
    if gd == 0.0:
        raise ValueError("gradient is zero; nothing to step along")
    d = solve_regularized(strategy.at(oracle, x), np_, gd / gamma, g)
    return x - d, -d


def check_progress(f_k: float, f_next: float, g_k_dual: float,
                   g_next_dual: float, gamma: float) -> bool:
    """Per-step progress: f_k - f_next >= (gamma/8) g_next^2 / g_k, slack for
    roundoff."""
    if g_k_dual <= 0:
        raise ValueError("g_k_dual must be positive")
    lhs = f_k - f_next
    rhs = (gamma / 8.0) * g_next_dual ** 2 / g_k_dual
    return lhs >= rhs - 1e-12 * (1.0 + abs(f_k))


@dataclass
class _Trial:
    x: np.ndarray
    f: float
    g: np.ndarray
    g_dual: float
    step_norm: float
    gamma: float
    backtracks: int
    calls: int


def _solve_trial(oracle, H, x, g, gd, gamma, np_):
    d = solve_regularized(H, np_, gd / gamma, g)
    T = x - d
    return T, oracle.value(T), oracle.gradient(T), primal_norm(d, np_)


def adaptive_step(oracle: Oracle, strategy: HessianStrategy, x, gamma_prev,
                  np_: NormPair, max_backtracks: int = 60,
                  f_x: float | None = None, g_x: np.ndarray | None = None) -> _Trial:
    """Find the smallest t >= 0 with gamma = 2^-t * gamma_prev passing
    check_progress; one gradient evaluation per trial."""
    x = np.asarray(x, dtype=float)
    f = oracle.value(x) if f_x is None else f_x
    g = oracle.gradient(x) if g_x is None else g_x
    gd = dual_norm(g, np_)
    if gd == 0.0:
        raise ValueError("gradient is zero; nothing to step along")
    H = strategy.at(oracle, x)
    for t in range(max_backtracks + 1):
        gamma = math.ldexp(gamma_prev, -t)
        T, f_T, g_T, step = _solve_trial(oracle, H, x, g, gd, gamma, np_)
        gd_T = dual_norm(g_T, np_)
        if check_progress(f, f_T, gd, gd_T, gamma):
            return _Trial(x=T, f=f_T, g=g_T, g_dual=gd_T, step_norm=step,
                          gamma=gamma, backtracks=t, calls=t + 1)
    raise StalledError(
        f"no gamma in [{math.ldexp(gamma_prev, -max_backtracks):.3e}, "
        f"{gamma_prev:.3e}] satisfies the progress condition")


def adaptive_step_grad_search(oracle: Oracle, strategy: HessianStrategy, x,
                              M_prev: float, l: float, np_: NormPair,
                              max_doublings: int = 60,
                              f_x: float | None = None,
                              g_x: np.ndarray | None = None) -> _Trial:
    """Double M until <grad f(T), x - T> >= ||grad f(T)||_*^2/(4 M ||g||_*^l)."""
    x = np.asarray(x, dtype=float)
    f = oracle.value(x) if f_x is None else f_x
    g = oracle.gradient(x) if g_x is None else g_x
    gd = dual_norm(g, np_)
    if gd == 0.0:
        raise ValueError("gradient is zero; nothing to step along")
    H = strategy.at(oracle, x)
    for t in range(max_doublings + 1):
        M = math.ldexp(M_prev, t)
        gamma = gd ** (1.0 - l) / M
        T, f_T, g_T, step = _solve_trial(oracle, H, x, g, gd, gamma, np_)
        gd_T = dual_norm(g_T, np_)
        lhs = g_T @ (x - T)
        rhs = gd_T ** 2 / (4.0 * M * gd ** l)
        if lhs >= rhs - 1e-15 * (1.0 + abs(lhs)):
            return _Trial(x=T, f=f_T, g=g_T, g_dual=gd_T, step_norm=step,
                          gamma=gamma, backtracks=t, calls=t + 1)
    raise StalledError("grad-search condition unmet after max doublings")


class StalledError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# The outer loop


def _rule_gamma(rule, oracle, strategy, x, g, gd, np_):
    if isinstance(rule, FixedGamma):
        return rule.gamma
    if isinstance(rule, TheoreticalGamma):
        return min(pi_bound(rule.spec, gd), GAMMA_MAX)
    if isinstance(rule, EmpiricalGamma):
        return estimate_gamma(oracle, strategy, x, g, np_, rule.cfg)
    raise TypeError(f"unsupported gamma rule {rule!r}")


def run(oracle: Oracle, cfg: SolverConfig, x0) -> RunResult:
    """Iterate until a stop rule fires; deterministic given the config."""
    x = np.asarray(x0, dtype=float).copy()
    if not np.isfinite(x).all():
        raise ValueError("x0 must be finite")
    np_ = cfg.norm
    stop = cfg.stop
    t_start = time.perf_counter()

    f = oracle.value(x)
    g = oracle.gradient(x)
    gd = dual_norm(g, np_)
    calls = 0
    trace = [StepTrace(k=0, f=f, grad_dual_norm=gd, gamma=0.0, backtracks=0,
                       step_primal_norm=0.0, oracle_calls_cum=0,
                       wall_seconds=time.perf_counter() - t_start)]
    iterates = [x.copy()]

    searching = isinstance(cfg.gamma_rule, (FuncSearch, GradSearch))
    func_search = isinstance(cfg.gamma_rule, FuncSearch)
    gamma0 = cfg.gamma_rule.gamma0 if func_search else None
    gamma_seed = gamma0
    seed_exp = 0
    exp_cap = int(math.floor(math.log2(GAMMA_MAX / gamma0))) if func_search else 0
    M_seed = cfg.gamma_rule.M0 if isinstance(cfg.gamma_rule, GradSearch) else None
    capped = False

    status = "max_iters"
    k = 0
    while True:
        if stop.grad_tol is not None and gd <= stop.grad_tol:
            status = "converged"
            break
        if stop.f_tol is not None and f <= stop.f_tol:
            status = "converged"
            break
        if stop.max_iters is not None and k >= stop.max_iters:
            status = "max_iters"
            break
        if stop.max_oracle_calls is not None and calls >= stop.max_oracle_calls:
            status = "max_iters"
            break
        try:
            if func_search:
                trial = adaptive_step(oracle, cfg.strategy, x, gamma_seed, np_,
                                      cfg.max_backtracks, f_x=f, g_x=g)
                used_exp = seed_exp - trial.backtracks
                if used_exp + 1 > exp_cap:
                    seed_exp = exp_cap
                    capped = True
                else:
                    seed_exp = used_exp + 1
                gamma_seed = math.ldexp(gamma0, seed_exp)
            elif isinstance(cfg.gamma_rule, GradSearch):
                trial = adaptive_step_grad_search(oracle, cfg.strategy, x,
                                                  M_seed, cfg.gamma_rule.l, np_,
                                                  cfg.max_backtracks, f_x=f, g_x=g)
                M_used = math.ldexp(M_seed, trial.backtracks)
                M_seed = max(M_used / 2.0, cfg.gamma_rule.M0 * 2.0 ** -60)
            else:
                gamma = _rule_gamma(cfg.gamma_rule, oracle, cfg.strategy,
                                    x, g, gd, np_)
                x_next, step_vec = take_step(oracle, cfg.strategy, x, gamma, np_)
                f_next = oracle.value(x_next)
                g_next = oracle.gradient(x_next)
                trial = _Trial(x=x_next, f=f_next, g=g_next,
                               g_dual=dual_norm(g_next, np_),
                               step_norm=primal_norm(step_vec, np_),
                               gamma=gamma, backtracks=0, calls=1)
        except StalledError:
            status = "stalled"
            break
        except FactorizationError:
            status = "failed-linalg"
            break

        x, f, g, gd = trial.x, trial.f, trial.g, trial.g_dual
        calls += trial.calls
        k += 1
        trace.append(StepTrace(
            k=k, f=f, grad_dual_norm=gd, gamma=trial.gamma,
            backtracks=trial.backtracks, step_primal_norm=trial.step_norm,
            oracle_calls_cum=calls,
            wall_seconds=time.perf_counter() - t_start))
        iterates.append(x.copy())

    return RunResult(status=status, x=x, trace=trace, iterates=iterates,
                     oracle_calls=calls, gamma0=gamma0,
                     gamma_seed_final=gamma_seed, gamma_capped=capped,
                     seed_exponent_final=seed_exp if searching else 0)
