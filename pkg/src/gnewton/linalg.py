"""Norm pairs and regularized linear solves.

Every step of the method reduces to solving (H + lam*B) d = g for a fixed
symmetric positive-definite preconditioner B.  B also induces the primal
norm ||h|| = <Bh, h>^(1/2) used for steps and the dual norm
||s||_* = <s, B^-1 s>^(1/2) used for gradients.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular

# Finite stand-in for gamma = +infinity (the pure-Newton regime near strict
# minimizers).  lam = ||grad||_* / gamma stays tiny but positive.
GAMMA_MAX = 1e12

_SYM_TOL = 1e-12


class FactorizationError(RuntimeError):
    """Cholesky failed even after one jitter retry.

    Signals severe indefiniteness of H + lam*B.  Deliberately not patched
    further: the failure-region experiment depends on observing these.
    """


@dataclass(frozen=True)
class NormPair:
    """A fixed SPD matrix B with its cached lower Cholesky factor."""

    B: np.ndarray
    chol_B: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        B = np.asarray(self.B, dtype=float)
        if B.ndim != 2 or B.shape[0] != B.shape[1]:
            raise ValueError(f"B must be square, got shape {B.shape}")
        scale = np.abs(B).max()
        if scale == 0 or np.abs(B - B.T).max() > _SYM_TOL * scale:
            raise ValueError("B must be symmetric to relative tolerance 1e-12")
        B = 0.5 * (B + B.T)
        try:
            L = cholesky(B, lower=True)
        except np.linalg.LinAlgError as exc:
            raise ValueError("B must be positive definite") from exc
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "chol_B", L)

    @property
    def dim(self) -> int:
        return self.B.shape[0]

    @staticmethod
    def identity(n: int) -> "NormPair":
        return NormPair(np.eye(n))

    def solve_B(self, s: np.ndarray) -> np.ndarray:
        """Return B^-1 s via two triangular solves against the cached factor."""
        return cho_solve((self.chol_B, True), np.asarray(s, dtype=float))


def _check_dim(v: np.ndarray, np_: NormPair, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (np_.dim,):
        raise ValueError(f"{name} has shape {v.shape}, expected ({np_.dim},)")
    return v


def primal_norm(v: np.ndarray, np_: NormPair) -> float:
    """<Bv, v>^(1/2); zero iff v = 0."""
    v = _check_dim(v, np_, "v")
    return float(np.sqrt(max(v @ (np_.B @ v), 0.0)))


def dual_norm(s: np.ndarray, np_: NormPair) -> float:
    """<s, B^-1 s>^(1/2), computed as ||L^-1 s||_2 from the cached factor."""
    s = _check_dim(s, np_, "s")
    y = solve_triangular(np_.chol_B, s, lower=True)
    return float(np.linalg.norm(y))


@dataclass(frozen=True)
class PsdOperator:
    """A positive-semidefinite curvature operator H(x).

    kind is one of:
      * "zero"            -- H = 0
      * "dense"           -- H = matrix (point-dependent; the exact Hessian of a
                             non-convex objective may be indefinite, which is
                             passed through on purpose)
      * "constant-dense"  -- H = matrix, fixed across iterations (e.g. a Gram
                             matrix A^T A)
      * "rank-one"        -- H = coeff * v v^T + base_scale * B, solved by the
                             fast Sherman-Morrison path
    """

    kind: str
    matrix: np.ndarray | None = None
    coeff: float = 0.0
    vector: np.ndarray | None = None
    base_scale: float = 0.0
    degenerate: bool = False

    @staticmethod
    def zero() -> "PsdOperator":
        return PsdOperator(kind="zero")

    @staticmethod
    def from_dense(M: np.ndarray, constant: bool = False) -> "PsdOperator":
        kind = "constant-dense" if constant else "dense"
        return PsdOperator(kind=kind, matrix=np.asarray(M, dtype=float))

    @staticmethod
    def rank_one(coeff: float, v: np.ndarray, base_scale: float = 0.0,
                 degenerate: bool = False) -> "PsdOperator":
        if coeff < 0 or base_scale < 0:
            raise ValueError("rank-one operator needs coeff >= 0 and base_scale >= 0")
        return PsdOperator(kind="rank-one", coeff=float(coeff),
                           vector=np.asarray(v, dtype=float),
                           base_scale=float(base_scale), degenerate=degenerate)

    def apply(self, h: np.ndarray, np_: NormPair | None = None) -> np.ndarray:
        h = np.asarray(h, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(h)
        if self.kind in ("dense", "constant-dense"):
            return self.matrix @ h
        out = self.coeff * (self.vector @ h) * self.vector
        if self.base_scale != 0.0:
            if np_ is None:
                raise ValueError("base-scaled rank-one operator needs the NormPair")
            out = out + self.base_scale * (np_.B @ h)
        return out

    def dense(self, np_: NormPair) -> np.ndarray:
        """Materialize the operator as a dense matrix."""
        if self.kind == "zero":
            return np.zeros((np_.dim, np_.dim))
        if self.kind in ("dense", "constant-dense"):
            return self.matrix
        M = self.coeff * np.outer(self.vector, self.vector)
        if self.base_scale != 0.0:
            M = M + self.base_scale * np_.B
        return M


def _chol_solve_with_jitter(K: np.ndarray, g: np.ndarray) -> np.ndarray:
    try:
        L = cholesky(K, lower=True)
    except np.linalg.LinAlgError:
        jitter = 1e-12 * np.trace(K)
        try:
            L = cholesky(K + jitter * np.eye(K.shape[0]), lower=True)
        except np.linalg.LinAlgError as exc:
            raise FactorizationError(
                "regularized system is numerically indefinite") from exc
    d = cho_solve((L, True), g)
    # one step of iterative refinement keeps the relative residual ~1e-14
    d += cho_solve((L, True), g - K @ d)
    return d


def solve_regularized(H: PsdOperator, np_: NormPair, lam: float,
                      g: np.ndarray) -> np.ndarray:
    """Solve (H + lam*B) d = g.

    lam > 0 makes the system positive definite whenever H is PSD.  Refactors
    per call; B's factor lives in the NormPair, H + lam*B changes with lam
    every iteration and desk-scale n keeps a fresh Cholesky cheap.
    """
    if lam <= 0:
        raise ValueError(f"lam must be positive, got {lam}")
    g = _check_dim(g, np_, "g")
    if H.kind == "zero":
        return np_.solve_B(g) / lam
    if H.kind == "rank-one":
        return solve_rank_one_regularized(H.coeff, H.vector,
                                          lam + H.base_scale, np_, g)
    K = H.matrix + lam * np_.B
    return _chol_solve_with_jitter(K, g)


def solve_rank_one_regularized(c: float, v: np.ndarray, lam: float,
                               np_: NormPair, g: np.ndarray) -> np.ndarray:
    """Solve (c*v v^T + lam*B) d = g by the Sherman-Morrison identity.

    d = (1/lam) B^-1 g
        - (c/lam^2) <v, B^-1 g> / (1 + (c/lam) <v, B^-1 v>) * B^-1 v

    The denominator is >= 1, so no branch is needed.
    """
    if lam <= 0:
        raise ValueError(f"lam must be positive, got {lam}")
    if c < 0:
        raise ValueError(f"c must be nonnegative, got {c}")
    g = _check_dim(g, np_, "g")
    v = _check_dim(v, np_, "v")
    Binv_g = np_.solve_B(g)
    if c == 0.0:
        return Binv_g / lam
    Binv_v = np_.solve_B(v)
    denom = 1.0 + (c / lam) * (v @ Binv_v)
    return Binv_g / lam - (c / lam**2) * (v @ Binv_g) / denom * Binv_v
