"""Curvature approximations H(x) and diagnostics for their accuracy.

Each strategy turns an oracle evaluation at a point into a PsdOperator that
the regularized solve consumes.  The exact Hessian of a non-convex objective
may be indefinite; it is passed through untouched so that factorization
failures surface where the method genuinely breaks down.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from gnewton.datasets import Dataset
from gnewton.linalg import NormPair, PsdOperator
from gnewton.objectives import Oracle


@dataclass(frozen=True)
class InexactnessBound:
    """Coefficients of the envelope e(x) <= C1 + C2 * ||grad f(x)||_*^(1-beta)."""

    C1: float
    C2: float
    beta: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")
        if self.C1 < 0 or self.C2 < 0:
            raise ValueError("C1 and C2 must be nonnegative")

    def value(self, gnorm: float) -> float:
        return self.C1 + self.C2 * gnorm ** (1.0 - self.beta)


# ---------------------------------------------------------------------------
# Point-wise operator constructors


def exact_hessian(oracle: Oracle, x: np.ndarray) -> PsdOperator:
    if not oracle.has_hessian:
        raise ValueError(f"{type(oracle).__name__} provides no Hessian")
    return PsdOperator.from_dense(oracle.hessian(x))


def zero_strategy() -> PsdOperator:
    return PsdOperator.zero()


def fisher_strategy(oracle: Oracle, x: np.ndarray) -> PsdOperator:
    """Sum of outer products of the per-term gradients; PSD by construction."""
    s = oracle.structure(x)
    if s is None or s.per_term_gradients is None:
        raise ValueError("oracle structure lacks per-term gradients")
    P = s.per_term_gradients
    return PsdOperator.from_dense(P.T @ P)


def gauss_newton_constant(data: Dataset) -> PsdOperator:
    """The constant Gram operator A^T A of the linear model."""
    return PsdOperator.from_dense(data.gram(), constant=True)


def weighted_gauss_newton(oracle: Oracle, x: np.ndarray) -> PsdOperator:
    """(1/mu) A^T Diag(softmax) A for a soft-maximum oracle."""
    s = oracle.structure(x)
    if s is None or s.softmax is None or s.smoothing_mu is None:
        raise ValueError("weighted Gauss-Newton needs a soft-maximum oracle")
    A = s.jacobian
    return PsdOperator.from_dense((A.T * s.softmax) @ A / s.smoothing_mu)


def nonlinear_power_full(oracle: Oracle, x: np.ndarray) -> PsdOperator:
    """||u||^(p-2) J^T G J + (p-2)/||u||^p * grad f grad f^T.

    Exact for linear residuals; at u(x) = 0 returns the zero operator with a
    degeneracy flag.
    """
    s = oracle.structure(x)
    if s is None or s.residuals is None or s.power_p is None:
        raise ValueError("nonlinear_power_full needs a power-residual oracle")
    u, J, G, p = s.residuals, s.jacobian, s.metric_G, s.power_p
    nrm2 = float(u @ (G @ u))
    if nrm2 == 0.0 and p > 2.0:
        return PsdOperator(kind="zero", degenerate=True)
    nrm = np.sqrt(nrm2)
    H = nrm ** (p - 2.0) * (J.T @ G @ J)
    if p > 2.0 and nrm > 0.0:
        g = oracle.gradient(x)
        H = H + (p - 2.0) / nrm ** p * np.outer(g, g)
    return PsdOperator.from_dense(H)


def fisher_rank_one(oracle: Oracle, x: np.ndarray) -> PsdOperator:
    """(p-2)/||u||^p * grad f grad f^T as a fast rank-one operator.

    Meant to be paired with B := A^T A so the regularized solve goes through
    the Sherman-Morrison path.  For p = 2 the coefficient vanishes and the
    zero operator is returned.
    """
    s = oracle.structure(x)
    if s is None or s.residuals is None or s.power_p is None:
        raise ValueError("fisher_rank_one needs a power-residual oracle")
    p = s.power_p
    if p == 2.0:
        return PsdOperator.zero()
    u, G = s.residuals, s.metric_G
    nrm2 = float(u @ (G @ u))
    if nrm2 == 0.0:
        return PsdOperator(kind="zero", degenerate=True)
    c = (p - 2.0) / nrm2 ** (p / 2.0)
    return PsdOperator.rank_one(c, oracle.gradient(x))


# ---------------------------------------------------------------------------
# Strategy objects the solver configuration carries


class HessianStrategy:
    """A rule producing H(x) at each iterate."""

    kind: str

    def at(self, oracle: Oracle, x: np.ndarray) -> PsdOperator:
        raise NotImplementedError


class ExactHessian(HessianStrategy):
    kind = "exact"

    def at(self, oracle, x):
        return exact_hessian(oracle, x)


class ZeroCurvature(HessianStrategy):
    kind = "zero"

    def at(self, oracle, x):
        return zero_strategy()


class FisherCurvature(HessianStrategy):
    kind = "fisher"

    def at(self, oracle, x):
        return fisher_strategy(oracle, x)


class ConstantGaussNewton(HessianStrategy):
    kind = "gauss_newton_constant"

    def __init__(self, data: Dataset):
        self._op = gauss_newton_constant(data)

    def at(self, oracle, x):
        return self._op


class WeightedGaussNewton(HessianStrategy):
    kind = "weighted_gauss_newton"

    def at(self, oracle, x):
        return weighted_gauss_newton(oracle, x)


class PowerResidualCurvature(HessianStrategy):
    kind = "nonlinear_power_full"

    def at(self, oracle, x):
        return nonlinear_power_full(oracle, x)


class PowerResidualRankOne(HessianStrategy):
    kind = "nonlinear_power_fisher_rank_one"

    def at(self, oracle, x):
        return fisher_rank_one(oracle, x)


STRATEGY_KINDS = {
    "exact": ExactHessian,
    "zero": ZeroCurvature,
    "fisher": FisherCurvature,
    "weighted_gauss_newton": WeightedGaussNewton,
    "nonlinear_power_full": PowerResidualCurvature,
    "fisher_rank_one": PowerResidualRankOne,
}


# ---------------------------------------------------------------------------
# Inexactness diagnostics


def whitened_spectral_norm(E: np.ndarray, np_: NormPair, iters: int = 50,
                           tol: float = 1e-8, seed: int = 0) -> float:
    """Spectral norm of B^(-1/2) E B^(-1/2) for symmetric E, by power iteration.

    Uses the triangular factor of B: the norm equals that of L^-1 E L^-T.
    """
    L = np_.chol_B
    W = solve_triangular(L, solve_triangular(L, E, lower=True).T, lower=True)
    W = 0.5 * (W + W.T)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(W.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iters):
        w = W @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v_new = w / nw
        lam_new = abs(v_new @ (W @ v_new))
        if abs(lam_new - lam) <= tol * max(1.0, lam_new):
            return lam_new
        v, lam = v_new, lam_new
    return lam


def _fit_envelope(e: np.ndarray, z: np.ndarray) -> tuple[float, float]:
    """Smallest valid line e <= C1 + C2*z with C1, C2 >= 0.

    "Smallest" is the mean envelope value over the sample; candidates are
    lines through point pairs plus the two axis-aligned ones.
    """
    candidates = [(float(e.max()), 0.0)]
    pos = z > 0
    if pos.any():
        candidates.append((0.0, float((e[pos] / z[pos]).max())))
    m = len(e)
    for i in range(m):
        for j in range(i + 1, m):
            if z[i] == z[j]:
                continue
            c2 = (e[i] - e[j]) / (z[i] - z[j])
            c1 = e[i] - c2 * z[i]
            if c1 < 0 or c2 < 0:
                continue
            candidates.append((float(c1), float(c2)))
    best, best_cost = None, np.inf
    for c1, c2 in candidates:
        env = c1 + c2 * z
        if (env + 1e-12 * (1.0 + np.abs(e)) < e).any():
            continue
        cost = env.mean()
        if cost < best_cost:
            best, best_cost = (c1, c2), cost
    return best


@dataclass
class InexactnessReport:
    bound: InexactnessBound
    residuals: np.ndarray          # e(x_i), B-whitened spectral norms
    grad_dual_norms: np.ndarray
    envelope_values: np.ndarray    # fitted C1 + C2 g^(1-beta) at each point
    theoretical_ok: bool | None    # supplied bound majorizes measurements


def measure_inexactness(oracle: Oracle, strategy: HessianStrategy,
                        points, np_: NormPair, beta: float = 0.0,
                        theoretical_bound=None) -> InexactnessReport:
    """Measure e(x) = ||grad^2 f(x) - H(x)|| in the B-geometry and fit (C1, C2).

    ``theoretical_bound``, when given, is a callable point -> scalar whose
    values must majorize the measured residuals; the report records whether
    they do.
    """
    from gnewton.linalg import dual_norm

    if not oracle.has_hessian:
        raise ValueError("inexactness measurement needs the exact Hessian")
    es, gs = [], []
    for x in points:
        x = np.asarray(x, dtype=float)
        E = oracle.hessian(x) - strategy.at(oracle, x).dense(np_)
        es.append(whitened_spectral_norm(E, np_))
        gs.append(dual_norm(oracle.gradient(x), np_))
    e = np.array(es)
    g = np.array(gs)
    scale = 1.0 + max(whitened_spectral_norm(oracle.hessian(points[0]), np_), 1.0)
    if e.max(initial=0.0) <= 1e-10 * scale:
        c1, c2 = 0.0, 0.0
    else:
        c1, c2 = _fit_envelope(e, g ** (1.0 - beta))
    bound = InexactnessBound(C1=c1, C2=c2, beta=beta)
    ok = None
    if theoretical_bound is not None:
        ok = bool(all(theoretical_bound(x) + 1e-10 >= ei
                      for x, ei in zip(points, e)))
    return InexactnessReport(
        bound=bound,
        residuals=e,
        grad_dual_norms=g,
        envelope_values=bound.C1 + bound.C2 * g ** (1.0 - beta),
        theoretical_ok=ok,
    )
