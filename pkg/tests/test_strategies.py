import numpy as np
import pytest
from numpy.testing import assert_allclose

from gnewton.datasets import synthetic_dataset
from gnewton.linalg import NormPair, solve_rank_one_regularized, solve_regularized
from gnewton.objectives import (
    LinearResidualOperator,
    QuadraticOracle,
    logistic_oracle,
    logsumexp_oracle,
    power_residual_oracle,
    rosenbrock_residuals,
)
from gnewton.strategies import (
    ExactHessian,
    FisherCurvature,
    WeightedGaussNewton,
    exact_hessian,
    fisher_rank_one,
    fisher_strategy,
    gauss_newton_constant,
    measure_inexactness,
    nonlinear_power_full,
    weighted_gauss_newton,
    whitened_spectral_norm,
    zero_strategy,
)
from helpers import fd_hessian, random_spd


def min_rayleigh(op, np_, rng, n, trials=100):
    scale = max(np.abs(op.dense(np_)).max(), 1.0)
    worst = np.inf
    for _ in range(trials):
        h = rng.standard_normal(n)
        worst = min(worst, (h @ op.apply(h, np_)) / (h @ h))
    return worst, scale


class TestExactHessian:
    def test_quadratic_returns_Q(self):
        rng = np.random.default_rng(0)
        Q = random_spd(rng, 4)
        oracle = QuadraticOracle(Q)
        op = exact_hessian(oracle, rng.standard_normal(4))
        assert_allclose(op.dense(NormPair.identity(4)), Q)

    def test_logsumexp_matches_fd(self):
        data = synthetic_dataset(6, 3, seed=1)
        oracle = logsumexp_oracle(data, mu=0.8)
        x = np.random.default_rng(2).standard_normal(3)
        H = exact_hessian(oracle, x).dense(NormPair.identity(3))
        assert_allclose(H, fd_hessian(oracle.gradient, x), rtol=1e-4, atol=1e-5)

    def test_rosenbrock_p2_is_half_classic(self):
        # f = 1/2 ||u||^2 has Hessian equal to half the classic Rosenbrock's
        oracle = power_residual_oracle(rosenbrock_residuals(), p=2)
        x = np.zeros(2)
        H = exact_hessian(oracle, x).dense(NormPair.identity(2))

        def classic_grad(y):
            return np.array([
                -2.0 * (1 - y[0]) - 400.0 * y[0] * (y[1] - y[0] ** 2),
                200.0 * (y[1] - y[0] ** 2),
            ])

        assert_allclose(H, 0.5 * fd_hessian(classic_grad, x), rtol=1e-5,
                        atol=1e-4)

    def test_requires_hessian(self):
        class GradOnly(QuadraticOracle):
            has_hessian = False

        with pytest.raises(ValueError, match="Hessian"):
            exact_hessian(GradOnly(np.eye(2)), np.zeros(2))


class TestZero:
    def test_apply_is_zero(self):
        op = zero_strategy()
        np_ = NormPair.identity(3)
        assert_allclose(op.apply(np.ones(3), np_), np.zeros(3))

    def test_step_is_normalized_gradient(self):
        # with B = I and lam = ||g||/gamma the step has norm gamma and points
        # along -g
        np_ = NormPair.identity(3)
        g = np.array([3.0, 0.0, 4.0])
        gamma = 1.0
        d = solve_regularized(zero_strategy(), np_, np.linalg.norm(g) / gamma, g)
        assert np.linalg.norm(d) == pytest.approx(gamma)
        assert_allclose(d, g / np.linalg.norm(g))

    def test_direction_matches_preconditioned_gradient(self):
        rng = np.random.default_rng(3)
        np_ = NormPair(random_spd(rng, 4))
        g = rng.standard_normal(4)
        d = solve_regularized(zero_strategy(), np_, 2.0, g)
        assert_allclose(d, np_.solve_B(g) / 2.0)


class TestFisher:
    def test_single_term_rank_one(self):
        data = synthetic_dataset(1, 3, seed=4)
        oracle = logistic_oracle(data)
        x = np.zeros(3)
        g1 = oracle.structure(x).per_term_gradients[0]
        H = fisher_strategy(oracle, x).dense(NormPair.identity(3))
        assert_allclose(H, np.outer(g1, g1))

    def test_bounded_by_f_in_gram_geometry(self):
        data = synthetic_dataset(12, 4, seed=5)
        oracle = logistic_oracle(data)
        np_ = NormPair(data.gram())
        rng = np.random.default_rng(6)
        for _ in range(5):
            x = rng.standard_normal(4)
            E = oracle.hessian(x) - fisher_strategy(oracle, x).dense(np_)
            assert whitened_spectral_norm(E, np_) <= oracle.value(x) + 1e-10

    def test_psd(self):
        data = synthetic_dataset(10, 4, seed=7)
        oracle = logistic_oracle(data)
        rng = np.random.default_rng(8)
        op = fisher_strategy(oracle, rng.standard_normal(4))
        assert np.linalg.eigvalsh(op.dense(NormPair.identity(4))).min() >= -1e-12

    def test_requires_structure(self):
        with pytest.raises(ValueError, match="per-term"):
            fisher_strategy(QuadraticOracle(np.eye(2)), np.zeros(2))


class TestGaussNewtonConstant:
    def test_identity_design(self):
        data = synthetic_dataset(3, 3, seed=9)
        data = type(data)(A=np.eye(3), b=data.b)
        op = gauss_newton_constant(data)
        assert_allclose(op.dense(NormPair.identity(3)), np.eye(3))

    def test_psd_and_singular_accepted(self):
        # d < n makes A^T A singular; the lam*B regularization keeps solves OK
        data = synthetic_dataset(2, 5, seed=10)
        op = gauss_newton_constant(data)
        w = np.linalg.eigvalsh(op.dense(NormPair.identity(5)))
        assert w.min() >= -1e-12
        d = solve_regularized(op, NormPair.identity(5), 0.5, np.ones(5))
        assert np.isfinite(d).all()


class TestWeightedGaussNewton:
    def test_uniform_weights_at_symmetry(self):
        data = synthetic_dataset(8, 4, seed=11)
        data = type(data)(A=data.A, b=np.zeros(8))
        mu = 0.6
        oracle = logsumexp_oracle(data, mu=mu)
        H = weighted_gauss_newton(oracle, np.zeros(4)).dense(NormPair.identity(4))
        assert_allclose(H, data.gram() / (mu * 8), atol=1e-12)

    def test_identity_vs_exact_hessian(self):
        data = synthetic_dataset(20, 10, seed=12)
        oracle = logsumexp_oracle(data, mu=1.0)
        rng = np.random.default_rng(13)
        for _ in range(5):
            x = rng.standard_normal(10)
            H = weighted_gauss_newton(oracle, x).dense(NormPair.identity(10))
            g = oracle.gradient(x)
            reconstructed = H - np.outer(g, g) / 1.0
            exact = oracle.hessian(x)
            denom = np.abs(exact).max()
            assert np.abs(exact - reconstructed).max() <= 1e-8 * denom

    def test_psd(self):
        data = synthetic_dataset(9, 5, seed=14)
        oracle = logsumexp_oracle(data, mu=0.3)
        rng = np.random.default_rng(15)
        op = weighted_gauss_newton(oracle, rng.standard_normal(5))
        assert np.linalg.eigvalsh(op.dense(NormPair.identity(5))).min() >= -1e-12

    def test_wrong_oracle_kind(self):
        with pytest.raises(ValueError, match="soft-maximum"):
            weighted_gauss_newton(QuadraticOracle(np.eye(2)), np.zeros(2))


class TestNonlinearPowerFull:
    def test_linear_p2_is_gram(self):
        rng = np.random.default_rng(16)
        A = rng.standard_normal((6, 4))
        op_lin = LinearResidualOperator(A, rng.standard_normal(6))
        oracle = power_residual_oracle(op_lin, p=2)
        x = rng.standard_normal(4)
        H = nonlinear_power_full(oracle, x).dense(NormPair.identity(4))
        assert_allclose(H, A.T @ A, atol=1e-12)
        assert_allclose(H, oracle.hessian(x), atol=1e-12)

    @pytest.mark.parametrize("p", [2, 3, 4, 5])
    def test_linear_equals_exact(self, p):
        rng = np.random.default_rng(17)
        op_lin = LinearResidualOperator(rng.standard_normal((6, 4)),
                                        rng.standard_normal(6))
        oracle = power_residual_oracle(op_lin, p=p)
        x = rng.standard_normal(4)
        H = nonlinear_power_full(oracle, x).dense(NormPair.identity(4))
        exact = oracle.hessian(x)
        assert np.abs(H - exact).max() <= 1e-10 * np.abs(exact).max()

    def test_rosenbrock_error_bound(self):
        # ||hess f - H|| <= xi_1 ||u||^(p-1) with xi_1 = 20 for the
        # Rosenbrock residuals at p = 2
        oracle = power_residual_oracle(rosenbrock_residuals(), p=2)
        rng = np.random.default_rng(18)
        np_ = NormPair.identity(2)
        for _ in range(20):
            x = rng.uniform(-2, 2, size=2)
            u = oracle.structure(x).residuals
            E = oracle.hessian(x) - nonlinear_power_full(oracle, x).dense(np_)
            assert whitened_spectral_norm(E, np_) <= 20.0 * np.linalg.norm(u) + 1e-9

    def test_degenerate_point(self):
        oracle = power_residual_oracle(rosenbrock_residuals(), p=3)
        op = nonlinear_power_full(oracle, np.array([1.0, 1.0]))
        assert op.kind == "zero" and op.degenerate

    def test_psd(self):
        oracle = power_residual_oracle(rosenbrock_residuals(), p=4)
        rng = np.random.default_rng(19)
        np_ = NormPair.identity(2)
        for _ in range(20):
            op = nonlinear_power_full(oracle, rng.uniform(-2, 2, size=2))
            worst, scale = min_rayleigh(op, np_, rng, 2)
            assert worst >= -1e-10 * scale


class TestFisherRankOne:
    def test_p2_gives_zero(self):
        oracle = power_residual_oracle(rosenbrock_residuals(), p=2)
        assert fisher_rank_one(oracle, np.zeros(2)).kind == "zero"

    def test_fast_path_matches_dense(self):
        rng = np.random.default_rng(20)
        A = rng.standard_normal((8, 4))
        op_lin = LinearResidualOperator(A, rng.standard_normal(8))
        oracle = power_residual_oracle(op_lin, p=4)
        np_ = NormPair(A.T @ A)
        for _ in range(10):
            x = rng.standard_normal(4)
            H = fisher_rank_one(oracle, x)
            lam = float(rng.uniform(0.1, 2.0))
            g = oracle.gradient(x)
            fast = solve_rank_one_regularized(H.coeff, H.vector, lam, np_, g)
            dense = np.linalg.solve(H.dense(np_) + lam * np_.B, g)
            assert_allclose(fast, dense, rtol=0,
                            atol=1e-10 * np.linalg.norm(dense))

    def test_psd_coefficient(self):
        rng = np.random.default_rng(21)
        op_lin = LinearResidualOperator(rng.standard_normal((5, 3)),
                                        rng.standard_normal(5))
        oracle = power_residual_oracle(op_lin, p=3)
        H = fisher_rank_one(oracle, rng.standard_normal(3))
        assert H.coeff >= 0.0


class TestMeasureInexactness:
    def test_exact_strategy_gives_zero(self):
        data = synthetic_dataset(8, 4, seed=22)
        oracle = logsumexp_oracle(data, mu=1.0)
        pts = [np.zeros(4), np.ones(4) * 0.2]
        rep = measure_inexactness(oracle, ExactHessian(), pts,
                                  NormPair.identity(4))
        assert rep.bound.C1 == 0.0 and rep.bound.C2 == 0.0
        assert rep.residuals.max() <= 1e-10

    def test_logsumexp_wgn_residual_identity(self):
        # hess f - H = -(1/mu) grad grad^T, so e(x) = (1/mu) ||grad||_*^2
        data = synthetic_dataset(15, 6, seed=23)
        mu = 0.5
        oracle = logsumexp_oracle(data, mu=mu)
        np_ = NormPair.identity(6)
        rng = np.random.default_rng(24)
        pts = [rng.standard_normal(6) for _ in range(5)]
        rep = measure_inexactness(oracle, WeightedGaussNewton(), pts, np_)
        for e, g in zip(rep.residuals, rep.grad_dual_norms):
            assert e == pytest.approx(g ** 2 / mu, rel=1e-8)

    def test_envelope_is_valid_and_small(self):
        data = synthetic_dataset(15, 6, seed=25)
        oracle = logsumexp_oracle(data, mu=1.0)
        np_ = NormPair.identity(6)
        rng = np.random.default_rng(26)
        pts = [rng.standard_normal(6) * s for s in (0.2, 0.5, 1.0, 2.0)]
        rep = measure_inexactness(oracle, WeightedGaussNewton(), pts, np_)
        assert (rep.envelope_values + 1e-9 >= rep.residuals).all()

    def test_logistic_fisher_theoretical_bound(self):
        data = synthetic_dataset(12, 4, seed=27)
        oracle = logistic_oracle(data)
        np_ = NormPair(data.gram())
        rng = np.random.default_rng(28)
        pts = [rng.standard_normal(4) for _ in range(6)]
        rep = measure_inexactness(oracle, FisherCurvature(), pts, np_,
                                  theoretical_bound=oracle.value)
        assert rep.theoretical_ok


class TestWhitenedSpectralNorm:
    def test_identity_geometry_matches_eigh(self):
        rng = np.random.default_rng(29)
        E = random_spd(rng, 6) - 5.0 * np.eye(6)
        np_ = NormPair.identity(6)
        expected = np.abs(np.linalg.eigvalsh(E)).max()
        assert whitened_spectral_norm(E, np_) == pytest.approx(expected, rel=1e-6)

    def test_general_geometry(self):
        rng = np.random.default_rng(30)
        np_ = NormPair(random_spd(rng, 5))
        E = random_spd(rng, 5, scale=0.3) - np.eye(5)
        Binv_sqrt = np.linalg.inv(np.linalg.cholesky(np_.B))
        W = Binv_sqrt @ E @ Binv_sqrt.T
        expected = np.abs(np.linalg.eigvalsh(0.5 * (W + W.T))).max()
        assert whitened_spectral_norm(E, np_) == pytest.approx(expected, rel=1e-6)
