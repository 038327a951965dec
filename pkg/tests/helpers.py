"""Shared numerical-check utilities for the test suite."""

import numpy as np


def fd_gradient(f, x, step=None):
    """Central finite-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    h = step if step is not None else 1e-6 * (1.0 + np.linalg.norm(x))
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def fd_hessian(grad, x, step=None):
    """Central finite-difference Jacobian of a gradient function."""
    x = np.asarray(x, dtype=float)
    h = step if step is not None else 1e-6 * (1.0 + np.linalg.norm(x))
    n = x.size
    H = np.zeros((n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        H[:, i] = (grad(x + e) - grad(x - e)) / (2.0 * h)
    return 0.5 * (H + H.T)


def assert_gradient_matches(oracle, x, rtol=1e-5):
    g = oracle.gradient(x)
    g_fd = fd_gradient(oracle.value, x)
    err = np.linalg.norm(g - g_fd)
    assert err <= rtol * (1.0 + np.linalg.norm(g)), \
        f"gradient FD mismatch: {err:.3e} at x={x}"


def assert_hessian_matches(oracle, x, rtol=1e-5):
    H = oracle.hessian(x)
    assert np.abs(H - H.T).max() <= 1e-10 * max(1.0, np.abs(H).max()), \
        "Hessian is not symmetric"
    H_fd = fd_hessian(oracle.gradient, x)
    err = np.abs(H - H_fd).max()
    assert err <= rtol * (1.0 + np.abs(H).max()), \
        f"Hessian FD mismatch: {err:.3e} at x={x}"


def random_spd(rng, n, scale=1.0):
    M = rng.standard_normal((n, n))
    return scale * (M @ M.T + n * np.eye(n))
