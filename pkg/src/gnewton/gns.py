"""Gradient-normalized smoothness: local region, empirical estimator, bounds.

gamma(x, g) is the largest ball radius around x within which the linearized
gradient field grad f(x) + H(x) h approximates grad f(x + h) with relative
error ||g||_* ||h|| / gamma, over directions restricted to the local region.
The estimator samples directions, exploits monotonicity in gamma and bisects;
the closed-form bounds translate classical smoothness classes into gamma
lower bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from gnewton.linalg import GAMMA_MAX, FactorizationError, NormPair, dual_norm, \
    primal_norm, solve_regularized
from gnewton.objectives import Oracle
from gnewton.strategies import HessianStrategy

_REGION_TOL = 1e-12


@dataclass
class LocalRegionQuery:
    """Membership data for the region {h : <hess(x) h, h> + <g, h> <= 0}."""

    x: np.ndarray
    g: np.ndarray
    hessian_quadratic: "callable"


def in_local_region(q: LocalRegionQuery, h: np.ndarray) -> bool:
    """True iff <hess(x) h, h> + <g, h> <= tol; h = 0 always qualifies.

    Works for indefinite Hessians, for which the region may be unbounded.
    """
    h = np.asarray(h, dtype=float)
    return float(q.hessian_quadratic(h) + q.g @ h) <= _REGION_TOL * (1.0 + h @ h)


@dataclass
class GammaEstimatorConfig:
    n_dirs: int = 64
    n_radii: int = 16
    grid_points: int = 2048
    tol: float = 1e-3          # relative bisection tolerance
    seed: int = 0
    gamma_lo: float | None = None   # default 1e-8 * (1 + ||x||)
    gamma_hi: float = GAMMA_MAX


class _GammaProbe:
    """Shared state for the per-gamma violation scans of one estimate."""

    def __init__(self, oracle: Oracle, strategy: HessianStrategy, x, g,
                 np_: NormPair, cfg: GammaEstimatorConfig):
        self.oracle = oracle
        self.np_ = np_
        self.cfg = cfg
        self.x = np.asarray(x, dtype=float)
        self.g = np.asarray(g, dtype=float)
        self.g_dual = dual_norm(self.g, np_)
        if self.g_dual == 0.0:
            raise ValueError("gamma is undefined for a zero direction g")
        self.H = strategy.at(oracle, self.x)
        self.H_dense = self.H.dense(np_)
        self.hess = oracle.hessian(self.x)
        self.grad_x = oracle.gradient(self.x)
        self.n = self.x.size
        self.dirs = self._directions()
        # magnitudes below this anchor carry no information; residuals at
        # rounding level are cancellation noise, not signal
        self.mag_anchor = 1e-8 * (1.0 + primal_norm(self.x, np_))
        self.noise_floor = 1e-12 * (self.g_dual + dual_norm(self.grad_x, np_))

    def _directions(self) -> np.ndarray:
        """Unit-primal-norm rows: random sphere plus steepest/Newton/step."""
        if self.n == 1:
            return np.array([[1.0]])
        rng = np.random.default_rng(self.cfg.seed)
        D = rng.standard_normal((self.cfg.n_dirs, self.n))
        specials = [self.np_.solve_B(self.g)]
        try:
            specials.append(np.linalg.lstsq(self.hess, self.g, rcond=None)[0])
        except np.linalg.LinAlgError:
            pass
        try:
            specials.append(solve_regularized(self.H, self.np_,
                                              self.g_dual, self.g))
        except FactorizationError:
            pass
        D = np.vstack([D] + [-np.asarray(s)[None, :] for s in specials
                             if np.all(np.isfinite(s))])
        norms = np.sqrt(np.einsum("ij,ij->i", D @ self.np_.B, D))
        keep = norms > 0
        return D[keep] / norms[keep, None]

    def _magnitudes(self, gamma: float) -> np.ndarray:
        k = self.cfg.grid_points if self.n == 1 else self.cfg.n_radii
        lin = gamma * np.arange(1, k + 1) / k
        log = np.geomspace(min(self.mag_anchor, 0.5 * gamma), gamma, k)
        return np.unique(np.concatenate([lin, log]))

    def violation(self, gamma: float) -> float:
        """max over sampled feasible h of residual * gamma / (||g||_* ||h||)."""
        mags = self._magnitudes(gamma)
        C = (mags[None, :, None] * self.dirs[:, None, :]).reshape(-1, self.n)
        C = np.vstack([C, -C])
        # feasible if h or -h lies in the local region (the reported
        # closed-form value for e^x corresponds to this symmetrized set;
        # every class lower bound remains valid for it)
        quad = np.einsum("ij,ij->i", C @ self.hess, C)
        lin = C @ self.g
        tol = _REGION_TOL * (1.0 + np.einsum("ij,ij->i", C, C))
        feasible = (quad + lin <= tol) | (quad - lin <= tol)
        if not feasible.any():
            return 0.0
        C = C[feasible]
        with np.errstate(over="ignore", invalid="ignore"):
            G = self.oracle.gradient_batch(self.x[None, :] + C)
            R = G - self.grad_x - C @ self.H_dense.T
        bad = ~np.isfinite(R).all(axis=1)
        if bad.any():
            return np.inf
        r_dual = np.linalg.norm(
            solve_triangular(self.np_.chol_B, R.T, lower=True), axis=0)
        r_dual = np.where(r_dual <= self.noise_floor, 0.0, r_dual)
        h_primal = np.sqrt(np.einsum("ij,ij->i", C @ self.np_.B, C))
        ratios = r_dual * gamma / (self.g_dual * h_primal)
        return float(ratios.max())


def gamma_violation(oracle, strategy, x, g, np_: NormPair, gamma: float,
                    cfg: GammaEstimatorConfig | None = None) -> float:
    """One violation scan at a fixed gamma (same sampling as estimate_gamma)."""
    cfg = cfg or GammaEstimatorConfig()
    return _GammaProbe(oracle, strategy, x, g, np_, cfg).violation(gamma)


def estimate_gamma(oracle, strategy, x, g, np_: NormPair,
                   cfg: GammaEstimatorConfig | None = None) -> float:
    """Sampled estimate of gamma(x, g), capped at GAMMA_MAX.

    Bisects on {gamma : violation(gamma) <= 1} in log space; if no sampled
    gamma up to the cap produces a violation, returns GAMMA_MAX.  The
    direction sampling can miss the worst h, so the estimate is upper-biased;
    comparisons against theoretical lower bounds should leave a margin.
    """
    cfg = cfg or GammaEstimatorConfig()
    probe = _GammaProbe(oracle, strategy, x, g, np_, cfg)
    lo = cfg.gamma_lo
    if lo is None:
        lo = 1e-8 * (1.0 + primal_norm(probe.x, np_))
    hi = cfg.gamma_hi
    if probe.violation(hi) <= 1.0:
        return float(hi)
    if probe.violation(lo) > 1.0:
        return float(lo)
    while hi / lo > 1.0 + cfg.tol:
        mid = math.sqrt(lo * hi)
        if probe.violation(mid) <= 1.0:
            lo = mid
        else:
            hi = mid
    return float(lo)


# ---------------------------------------------------------------------------
# Structural bound pi(.) and harmonic combination


@dataclass(frozen=True)
class GammaBoundSpec:
    """Monomial terms (M, alpha); each contributes M / ||g||_*^alpha to the
    harmonic denominator."""

    terms: tuple

    def __post_init__(self):
        terms = tuple((float(M), float(a)) for M, a in self.terms)
        if not terms:
            raise ValueError("at least one term is required")
        for M, a in terms:
            if M < 0 or not 0.0 <= a <= 1.0:
                raise ValueError(f"bad term (M={M}, alpha={a})")
        if all(M == 0 for M, _ in terms):
            raise ValueError("at least one coefficient must be positive")
        object.__setattr__(self, "terms", terms)

    @property
    def alpha(self) -> float:
        """Smallest degree among terms with positive coefficient."""
        return min(a for M, a in self.terms if M > 0)


def pi_bound(spec: GammaBoundSpec, gnorm: float) -> float:
    """(sum_i M_i / gnorm^alpha_i)^-1, monotone nondecreasing in gnorm."""
    if gnorm <= 0:
        raise ValueError("gnorm must be positive")
    denom = sum(M / gnorm ** a for M, a in spec.terms if M > 0)
    return 1.0 / denom


def combine_harmonic(bounds) -> float:
    """(sum_i gamma_i^-1)^-1, with values >= GAMMA_MAX treated as infinite."""
    denom = 0.0
    for gv in bounds:
        if gv < 0:
            raise ValueError("gamma values must be nonnegative")
        if gv < GAMMA_MAX:
            if gv == 0.0:
                return 0.0
            denom += 1.0 / gv
    return 1.0 / denom if denom > 0 else GAMMA_MAX


def affine_transform_bound(gamma: float, A_norm: float) -> float:
    """gamma bound for g(x) = f(Ax + b): scales by 1 / ||A||."""
    if A_norm <= 0:
        raise ValueError("A_norm must be positive")
    return min(gamma / A_norm, GAMMA_MAX)


# ---------------------------------------------------------------------------
# Closed-form class bounds (constants are user-supplied inputs)


def gamma_bound_holder_hessian(L: float, nu: float, gnorm: float) -> float:
    """Hoelder-continuous Hessian of degree nu."""
    return ((1.0 + nu) * gnorm / L) ** (1.0 / (1.0 + nu))


def gamma_bound_holder_third(L3: float, nu: float, gnorm: float) -> float:
    """Convex objective with Hoelder-continuous third derivative."""
    return ((1.0 + nu) * gnorm / (2.0 ** (1.0 + nu) * L3)) ** (1.0 / (2.0 + nu))


def gamma_bound_qsc(M: float) -> float:
    """Quasi-self-concordant objective: constant bound 1/M."""
    return 1.0 / M


def gamma_bound_l0l1(L0: float, L1: float, gnorm: float,
                     gradnorm_at_x: float) -> float:
    """(L0, L1)-smooth objectives; for g = grad f this is g/((1+e)(L0+L1 g))."""
    return (gnorm / (L0 + L1 * gradnorm_at_x)
            / (1.0 + math.exp(gnorm / gradnorm_at_x)))


def gamma_bound_m0m1(M0: float, M1: float, gnorm: float,
                     gradnorm_at_x: float) -> float:
    """Second-order (M0, M1)-smooth objectives."""
    return math.sqrt(2.0 * gnorm / (M0 + M1 * gradnorm_at_x))


def gamma_bound_gen_sc(Gq: float, q: float, gnorm: float) -> float:
    """Generalized self-concordant objectives of degree q in [0, 2)."""
    if not 0.0 <= q < 2.0:
        raise ValueError(f"q must lie in [0, 2), got {q}")
    exponent = (8.0 + 2.0 * q) / ((2.0 - q) * (4.0 - q))
    return 0.5 ** exponent * (gnorm ** (2.0 - q) / Gq ** 2) ** (1.0 / (4.0 - q))


def pnorm_gen_sc_params(p: float) -> tuple[float, float]:
    """(q, Gq) of f(x) = (1/p)||x||^p for p > 2: q = 2(p-3)/(p-2), Gq=(p-1)(p-2)."""
    if p <= 2:
        raise ValueError("p must exceed 2 (p = 2 is quadratic, gamma = inf)")
    return 2.0 * (p - 3.0) / (p - 2.0), (p - 1.0) * (p - 2.0)
