"""Benchmark objectives exposed as first/second-order oracles.

Each oracle provides value/gradient, optionally the exact Hessian, and
optionally structural data (residuals, Jacobians, softmax weights, per-term
gradients) that the curvature approximations feed on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gnewton.datasets import Dataset
from gnewton.linalg import NormPair


@dataclass
class StructuralData:
    """Problem structure attached to an oracle evaluation."""

    residuals: np.ndarray | None = None
    jacobian: np.ndarray | None = None
    per_term_gradients: np.ndarray | None = None  # rows are grad f_i(x)
    softmax: np.ndarray | None = None
    smoothing_mu: float | None = None
    power_p: float | None = None
    metric_G: np.ndarray | None = None


class Oracle:
    """Evaluation interface of an objective.

    Subclasses must set ``dim`` and implement ``value`` and ``gradient``;
    ``hessian`` and ``structure`` are optional.  ``gradient_batch`` has a
    generic row-loop fallback and is overridden where a vectorized form is
    cheap (the gamma estimator leans on it).
    """

    dim: int
    has_hessian = False

    def value(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def gradient(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hessian(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError(f"{type(self).__name__} provides no Hessian")

    def structure(self, x: np.ndarray) -> StructuralData | None:
        return None

    def gradient_batch(self, X: np.ndarray) -> np.ndarray:
        return np.stack([self.gradient(row) for row in X])

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"x has shape {x.shape}, expected ({self.dim},)")
        return x


# ---------------------------------------------------------------------------
# Soft maximum with a linear model


class LogSumExpOracle(Oracle):
    """f(x) = mu * log sum_i exp((<a_i, x> - b_i) / mu).

    The softmax is computed with max-subtraction; mu down to 0.05 appears in
    the experiments and naive exponentials overflow there.
    """

    has_hessian = True

    def __init__(self, data: Dataset, mu: float):
        if mu <= 0:
            raise ValueError(f"mu must be positive, got {mu}")
        self.data = data
        self.mu = float(mu)
        self.dim = data.n_features

    def _z(self, x):
        return (self.data.A @ x - self.data.b) / self.mu

    def _softmax(self, z):
        w = np.exp(z - z.max())
        return w / w.sum()

    def value(self, x) -> float:
        z = self._z(self._check(x))
        m = z.max()
        return float(self.mu * (m + np.log(np.exp(z - m).sum())))

    def gradient(self, x) -> np.ndarray:
        return self.data.A.T @ self._softmax(self._z(self._check(x)))

    def hessian(self, x) -> np.ndarray:
        s = self._softmax(self._z(self._check(x)))
        A = self.data.A
        return (A.T * s) @ A / self.mu - np.outer(A.T @ s, A.T @ s) / self.mu

    def structure(self, x) -> StructuralData:
        x = self._check(x)
        return StructuralData(
            residuals=self.data.A @ x - self.data.b,
            jacobian=self.data.A,
            softmax=self._softmax(self._z(x)),
            smoothing_mu=self.mu,
        )

    def gradient_batch(self, X) -> np.ndarray:
        Z = (np.asarray(X, dtype=float) @ self.data.A.T - self.data.b) / self.mu
        W = np.exp(Z - Z.max(axis=1, keepdims=True))
        W /= W.sum(axis=1, keepdims=True)
        return W @ self.data.A


def logsumexp_oracle(data: Dataset, mu: float) -> LogSumExpOracle:
    return LogSumExpOracle(data, mu)


# ---------------------------------------------------------------------------
# Logistic regression


def _softplus(t):
    return np.logaddexp(0.0, t)


def _sigmoid(t):
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


class LogisticOracle(Oracle):
    """f(x) = sum_i log(1 + exp(<a_i, x> - b_i)), softplus/log1p formulation."""

    has_hessian = True

    def __init__(self, data: Dataset):
        self.data = data
        self.dim = data.n_features

    def _t(self, x):
        return self.data.A @ x - self.data.b

    def value(self, x) -> float:
        return float(_softplus(self._t(self._check(x))).sum())

    def gradient(self, x) -> np.ndarray:
        return self.data.A.T @ _sigmoid(self._t(self._check(x)))

    def hessian(self, x) -> np.ndarray:
        s = _sigmoid(self._t(self._check(x)))
        return (self.data.A.T * (s * (1.0 - s))) @ self.data.A

    def structure(self, x) -> StructuralData:
        x = self._check(x)
        s = _sigmoid(self._t(x))
        return StructuralData(
            residuals=self._t(x),
            jacobian=self.data.A,
            per_term_gradients=s[:, None] * self.data.A,
        )

    def gradient_batch(self, X) -> np.ndarray:
        T = np.asarray(X, dtype=float) @ self.data.A.T - self.data.b
        return _sigmoid(T) @ self.data.A


def logistic_oracle(data: Dataset) -> LogisticOracle:
    return LogisticOracle(data)


# ---------------------------------------------------------------------------
# Nonlinear-equations objectives f(x) = (1/p) <G u(x), u(x)>^(p/2)


class ResidualOperator:
    """A smooth operator u: R^n -> R^d with Jacobian and optional 2nd derivatives."""

    dim: int
    out_dim: int
    has_second_derivatives = False

    def residuals(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def second_derivative_contraction(self, x: np.ndarray,
                                      w: np.ndarray) -> np.ndarray:
        """sum_i w_i * hess(u_i)(x), an n-by-n matrix."""
        raise NotImplementedError


class LinearResidualOperator(ResidualOperator):
    """u(x) = A x - b."""

    has_second_derivatives = True

    def __init__(self, A: np.ndarray, b: np.ndarray):
        self.A = np.asarray(A, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.out_dim, self.dim = self.A.shape

    @staticmethod
    def from_dataset(data: Dataset) -> "LinearResidualOperator":
        return LinearResidualOperator(data.A, data.b)

    def residuals(self, x):
        return self.A @ x - self.b

    def jacobian(self, x):
        return self.A

    def second_derivative_contraction(self, x, w):
        return np.zeros((self.dim, self.dim))


class RosenbrockResidualOperator(ResidualOperator):
    """u(x) = (1 - x1, 10 (x2 - x1^2)), the two Rosenbrock residuals."""

    dim = 2
    out_dim = 2
    has_second_derivatives = True

    def residuals(self, x):
        return np.array([1.0 - x[0], 10.0 * (x[1] - x[0] ** 2)])

    def jacobian(self, x):
        return np.array([[-1.0, 0.0], [-20.0 * x[0], 10.0]])

    def second_derivative_contraction(self, x, w):
        M = np.zeros((2, 2))
        M[0, 0] = -20.0 * w[1]
        return M


class ChebyshevResidualOperator(ResidualOperator):
    """u_1 = (1 - x1)/2 and u_i = x_i - p2(x_{i-1}) with p2(t) = 2t^2 - 1."""

    has_second_derivatives = True

    def __init__(self, d: int):
        if d < 1:
            raise ValueError(f"d must be >= 1, got {d}")
        self.dim = d
        self.out_dim = d

    def residuals(self, x):
        u = np.empty(self.dim)
        u[0] = 0.5 * (1.0 - x[0])
        if self.dim > 1:
            u[1:] = x[1:] - (2.0 * x[:-1] ** 2 - 1.0)
        return u

    def jacobian(self, x):
        J = np.zeros((self.dim, self.dim))
        J[0, 0] = -0.5
        for i in range(1, self.dim):
            J[i, i] = 1.0
            J[i, i - 1] = -4.0 * x[i - 1]
        return J

    def second_derivative_contraction(self, x, w):
        M = np.zeros((self.dim, self.dim))
        for i in range(1, self.dim):
            M[i - 1, i - 1] += -4.0 * w[i]
        return M


def rosenbrock_residuals() -> RosenbrockResidualOperator:
    return RosenbrockResidualOperator()


def chebyshev_residuals(d: int) -> ChebyshevResidualOperator:
    return ChebyshevResidualOperator(d)


class PowerResidualOracle(Oracle):
    """f(x) = (1/p) <G u(x), u(x)>^(p/2) for a residual operator u.

    At u(x) = 0 with p > 2, gradient and Hessian are the analytic limits
    (zero); for p < 4 the ||u||^(p-4) Hessian term is singular there but the
    assembled limit is still zero, and the solver never lands exactly on the
    minimizer in finite precision anyway.
    """

    def __init__(self, op: ResidualOperator, p: float,
                 G: np.ndarray | None = None):
        if p < 2:
            raise ValueError(f"p must be >= 2, got {p}")
        self.op = op
        self.p = float(p)
        self.dim = op.dim
        self.G = np.eye(op.out_dim) if G is None else np.asarray(G, dtype=float)
        self.has_hessian = op.has_second_derivatives

    def _parts(self, x):
        u = self.op.residuals(x)
        Gu = self.G @ u
        return u, Gu, float(np.sqrt(max(u @ Gu, 0.0)))

    def value(self, x) -> float:
        _, _, nrm = self._parts(self._check(x))
        return float(nrm ** self.p / self.p)

    def gradient(self, x) -> np.ndarray:
        x = self._check(x)
        u, Gu, nrm = self._parts(x)
        if nrm == 0.0:
            return np.zeros(self.dim)
        return nrm ** (self.p - 2.0) * (self.op.jacobian(x).T @ Gu)

    def hessian(self, x) -> np.ndarray:
        x = self._check(x)
        u, Gu, nrm = self._parts(x)
        if nrm == 0.0:
            if self.p == 2.0:
                J = self.op.jacobian(x)
                return J.T @ self.G @ J
            return np.zeros((self.dim, self.dim))
        J = self.op.jacobian(x)
        JtGu = J.T @ Gu
        H = nrm ** (self.p - 2.0) * (J.T @ self.G @ J)
        H += (self.p - 2.0) * nrm ** (self.p - 4.0) * np.outer(JtGu, JtGu)
        H += nrm ** (self.p - 2.0) * self.op.second_derivative_contraction(x, Gu)
        return H

    def structure(self, x) -> StructuralData:
        x = self._check(x)
        return StructuralData(
            residuals=self.op.residuals(x),
            jacobian=self.op.jacobian(x),
            power_p=self.p,
            metric_G=self.G,
        )


def power_residual_oracle(op: ResidualOperator, p: float,
                          G: np.ndarray | None = None) -> PowerResidualOracle:
    return PowerResidualOracle(op, p, G)


# ---------------------------------------------------------------------------
# Power of the norm itself


class PNormOracle(Oracle):
    """f(x) = (1/p) ||x||^p in the primal norm of a NormPair."""

    has_hessian = True

    def __init__(self, p: float, norm: NormPair):
        if p < 2:
            raise ValueError(f"p must be >= 2, got {p}")
        self.p = float(p)
        self.norm = norm
        self.dim = norm.dim

    def _nrm(self, x):
        return float(np.sqrt(max(x @ (self.norm.B @ x), 0.0)))

    def value(self, x) -> float:
        return self._nrm(self._check(x)) ** self.p / self.p

    def gradient(self, x) -> np.ndarray:
        x = self._check(x)
        nrm = self._nrm(x)
        if nrm == 0.0:
            return np.zeros(self.dim)
        return nrm ** (self.p - 2.0) * (self.norm.B @ x)

    def hessian(self, x) -> np.ndarray:
        x = self._check(x)
        nrm = self._nrm(x)
        if nrm == 0.0:
            if self.p == 2.0:
                return self.norm.B.copy()
            return np.zeros((self.dim, self.dim))
        Bx = self.norm.B @ x
        return ((self.p - 2.0) * nrm ** (self.p - 4.0) * np.outer(Bx, Bx)
                + nrm ** (self.p - 2.0) * self.norm.B)

    def gradient_batch(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        BX = X @ self.norm.B.T
        nrm = np.sqrt(np.maximum(np.einsum("ij,ij->i", X, BX), 0.0))
        scale = np.where(nrm > 0.0, nrm, 1.0) ** (self.p - 2.0)
        scale = np.where(nrm > 0.0, scale, 0.0 if self.p > 2.0 else 1.0)
        return scale[:, None] * BX


def pnorm_oracle(p: float, norm: NormPair) -> PNormOracle:
    return PNormOracle(p, norm)


# ---------------------------------------------------------------------------
# One-dimensional exponential (the textbook gamma test function)


class ExpScalarOracle(Oracle):
    """f(x) = e^x on R; value, gradient and Hessian all coincide."""

    dim = 1
    has_hessian = True

    def value(self, x) -> float:
        return float(np.exp(self._check(x)[0]))

    def gradient(self, x) -> np.ndarray:
        return np.exp(self._check(x))

    def hessian(self, x) -> np.ndarray:
        return np.exp(self._check(x)).reshape(1, 1)

    def gradient_batch(self, X) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(np.asarray(X, dtype=float))


def exp_scalar_oracle() -> ExpScalarOracle:
    return ExpScalarOracle()


# ---------------------------------------------------------------------------
# Quadratic smoke objective


class QuadraticOracle(Oracle):
    """f(x) = 1/2 (x - c)^T Q (x - c) for SPD Q."""

    has_hessian = True

    def __init__(self, Q: np.ndarray, center: np.ndarray | None = None):
        self.Q = np.asarray(Q, dtype=float)
        self.dim = self.Q.shape[0]
        self.center = (np.zeros(self.dim) if center is None
                       else np.asarray(center, dtype=float))

    def value(self, x) -> float:
        d = self._check(x) - self.center
        return float(0.5 * d @ (self.Q @ d))

    def gradient(self, x) -> np.ndarray:
        return self.Q @ (self._check(x) - self.center)

    def hessian(self, x) -> np.ndarray:
        return self.Q.copy()

    def gradient_batch(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.center) @ self.Q.T
