"""Closed-form iteration-count predictors for envelope validation.

These evaluate the complexity bounds with their explicit constants (8, 2, d,
1/eta) so that observed iteration counts can be checked against them
one-sidedly: predictors may be loose, never exceeded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from gnewton.gns import GammaBoundSpec
from gnewton.strategies import InexactnessBound

_ETA_SWITCH = 1e-6


@dataclass(frozen=True)
class ProblemClassParams:
    spec: GammaBoundSpec
    D: float                 # sublevel-set diameter, primal-norm units
    F0: float                # initial gap f(x0) - f*
    grad0_dual: float
    dominance: tuple | None = None       # (c, D_c)
    inexactness: InexactnessBound | None = None

    def __post_init__(self):
        if self.D <= 0 or self.F0 <= 0 or self.grad0_dual <= 0:
            raise ValueError("D, F0 and grad0_dual must be positive")
        if self.dominance is not None:
            c, D_c = self.dominance
            if not 0.0 <= c <= 1.0 or D_c <= 0:
                raise ValueError(f"bad dominance parameters {self.dominance}")


def _branch_factor(eta: float, eps: float, F0: float) -> float:
    """(1/eta)(eps^-eta - F0^-eta), continuous log(F0/eps) limit at eta = 0."""
    if eta < _ETA_SWITCH:
        return math.log(F0 / eps)
    return (eps ** -eta - F0 ** -eta) / eta


def _class_complexity(spec: GammaBoundSpec, D_c: float, c: float, F0: float,
                      eps: float) -> float:
    """8d/eta * max_i(M_i [D_c^(1+a_i)/eps^(a_i - alpha)]^(1/(1+c))) * branch."""
    terms = [(M, a) for M, a in spec.terms if M > 0]
    alpha = min(a for _, a in terms)
    if c > alpha + 1e-12:
        raise ValueError(f"dominance degree c={c} exceeds smoothness "
                         f"degree alpha={alpha}")
    eta = (alpha - c) / (1.0 + c)
    d = len(terms)
    peak = max(M * (D_c ** (1.0 + a) / eps ** (a - alpha)) ** (1.0 / (1.0 + c))
               for M, a in terms)
    return 8.0 * d * peak * _branch_factor(eta, eps, F0)


def k_nonconvex(params: ProblemClassParams, epsilon: float) -> int:
    """Iterations to drive min_i ||grad f(x_i)||_* below epsilon."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    terms = [(M, a) for M, a in params.spec.terms if M > 0]
    d = len(terms)
    core = d * max(M / epsilon ** (1.0 + a) for M, a in terms)
    if params.inexactness is not None:
        ib = params.inexactness
        core += ib.C1 / epsilon ** 2 + ib.C2 / epsilon ** (1.0 + ib.beta)
    total = 8.0 * params.F0 * core
    total += math.log(params.grad0_dual / epsilon)
    return math.ceil(max(total, 0.0))


def k_convex(params: ProblemClassParams, epsilon: float) -> int:
    """Iterations to reach f(x_K) - f* <= epsilon for convex objectives."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    logs = 2.0 * math.log(params.grad0_dual * params.D / epsilon)
    if epsilon >= params.F0:
        return math.ceil(max(logs, 0.0))
    core = _class_complexity(params.spec, params.D, 0.0, params.F0, epsilon)
    return math.ceil(max(core + logs, 0.0))


def k_grad_dominated(params: ProblemClassParams, epsilon: float) -> int:
    """Convex rate improved by gradient dominance ||g||^(1+c) D_c >= f - f*.

    c = alpha gives the global linear rate; the bound is only valid for
    c <= alpha, so larger c is reported as an error, not clamped.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    c, D_c = params.dominance if params.dominance is not None else (0.0, params.D)
    logs = 2.0 * math.log(params.grad0_dual * params.D / epsilon)
    if epsilon >= params.F0:
        return math.ceil(max(logs, 0.0))
    core = _class_complexity(params.spec, D_c, c, params.F0, epsilon)
    return math.ceil(max(core + logs, 0.0))


def k_inexact_convex(params: ProblemClassParams, epsilon: float) -> int:
    """Exact-class predictor plus the two inexactness terms.

    The inexactness enters the harmonic gamma bound as extra monomials
    (C1, degree 1) and (C2, degree beta); their contributions carry the
    branch factor of the combined smallest degree, so a beta = 0
    approximation of a linear-rate class keeps the log(F0/eps) factor.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if params.inexactness is None:
        raise ValueError("inexactness bound not set")
    ib = params.inexactness
    c, D_c = params.dominance if params.dominance is not None else (0.0, params.D)
    base = k_convex(params, epsilon) if c == 0.0 else k_grad_dominated(params, epsilon)
    if epsilon >= params.F0:
        return base
    alpha = params.spec.alpha
    alpha_comb = min(alpha, ib.beta) if ib.C2 > 0 else alpha
    if c > alpha_comb + 1e-12:
        raise ValueError(f"dominance degree c={c} exceeds combined degree "
                         f"{alpha_comb}")
    eta = (alpha_comb - c) / (1.0 + c)
    phi = _branch_factor(eta, epsilon, params.F0)
    extra = 0.0
    if ib.C1 > 0:
        extra += 8.0 * ib.C1 * (D_c ** 2 / epsilon ** (1.0 - alpha_comb)) \
            ** (1.0 / (1.0 + c)) * phi
    if ib.C2 > 0:
        extra += 8.0 * ib.C2 * (D_c ** (1.0 + ib.beta)
                                / epsilon ** (ib.beta - alpha_comb)) \
            ** (1.0 / (1.0 + c)) * phi
    return base + math.ceil(max(extra, 0.0))


def pnorm_problem_params(p: float, D: float, F0: float,
                         grad0_dual: float) -> ProblemClassParams:
    """Class parameters of f(x) = (1/p)||x||^p, p > 2.

    Generalized self-concordance gives the monomial degree
    alpha = 1/(p-1) with coefficient [(p-1)(p-2) 2^(3p-7)]^((p-2)/(p-1)); the
    objective is also uniformly convex of degree p, so gradient dominance
    holds with c = 1/(p-1) and D_c = (p-1)/p * 2^((p-2)/(p-1)).  alpha = c
    yields the global linear rate.
    """
    if p <= 2:
        raise ValueError("p must exceed 2")
    alpha = 1.0 / (p - 1.0)
    M = ((p - 1.0) * (p - 2.0) * 2.0 ** (3.0 * p - 7.0)) ** ((p - 2.0) / (p - 1.0))
    c = 1.0 / (p - 1.0)
    D_c = (p - 1.0) / p * 2.0 ** ((p - 2.0) / (p - 1.0))
    return ProblemClassParams(
        spec=GammaBoundSpec(terms=((M, alpha),)),
        D=D, F0=F0, grad0_dual=grad0_dual, dominance=(c, D_c))
