"""Dense spectral kernels: PSD inverse square root and a randomized power method."""

import math

import numpy as np

from .errors import NotPsd, SingularSigma, ZeroMatrix

SYM_RTOL = 1e-12
EIGEN_FLOOR = 1e-10


def check_symmetric(a, rtol=SYM_RTOL):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotPsd(f"expected a square matrix, got shape {a.shape}")
    scale = max(np.abs(a).max(), 1.0)
    if np.abs(a - a.T).max() > rtol * scale * a.shape[0]:
        raise NotPsd("matrix is not symmetric")
    return 0.5 * (a + a.T)


def inv_sqrt_psd(sigma, eigen_floor=EIGEN_FLOOR):
    """Inverse square root of a well-conditioned PSD matrix.

    `eigen_floor` is a fraction of the largest eigenvalue; any eigenvalue
    below it makes the call fail loudly (the whitened geometry downstream
    assumes an invertible second-moment matrix).
    """
    if eigen_floor <= 0:
        raise ValueError("eigen_floor must be positive")
    sigma = check_symmetric(sigma)
    evals, evecs = np.linalg.eigh(sigma)
    lam_max = evals[-1]
    if lam_max <= 0:
        raise SingularSigma("matrix has no positive eigenvalue")
    if evals[0] < -1e-10 * lam_max:
        raise NotPsd(f"negative eigenvalue {evals[0]:.3e}")
    if evals[0] < eigen_floor * lam_max:
        raise SingularSigma(
            f"eigenvalue {evals[0]:.3e} below floor {eigen_floor:.1e} * lambda_max"
        )
    root = evecs * (1.0 / np.sqrt(evals)) @ evecs.T
    return 0.5 * (root + root.T)


def default_power_iters(d, k):
    """Iteration budget O(log(d + k)); enough for spectral gaps >= 1.5."""
    return 10 * max(1, math.ceil(math.log2(d + k + 1)))


def power_method(rows, num_iters, rng):
    """Approximate top right singular vector of the matrix with the given rows.

    Runs power iteration on the d x d Gram matrix with a fresh Gaussian
    start; deterministic given the rng state.  The Rayleigh quotient of the
    iterates is non-decreasing, which `rayleigh_trace` exposes for checking.
    """
    return _power_method_impl(rows, num_iters, rng, track=False)[0]


def rayleigh_trace(rows, num_iters, rng):
    """Power method returning (unit vector, per-iteration Rayleigh quotients)."""
    return _power_method_impl(rows, num_iters, rng, track=True)


def _power_method_impl(rows, num_iters, rng, track):
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if num_iters < 1:
        raise ValueError("num_iters must be >= 1")
    if not np.any(rows):
        raise ZeroMatrix("all rows are zero")
    d = rows.shape[1]
    gram = rows.T @ rows
    v = rng.standard_normal(d)
    norm = math.sqrt(float(v @ v))
    while norm == 0.0:  # measure-zero, but the rng could be degenerate
        v = rng.standard_normal(d)
        norm = math.sqrt(float(v @ v))
    v /= norm
    quotients = []
    for _ in range(num_iters):
        w = gram @ v
        nw = math.sqrt(float(w @ w))
        if nw == 0.0:
            # started exactly in the null space; restart
            v = rng.standard_normal(d)
            v /= math.sqrt(float(v @ v))
            continue
        v = w / nw
        if track:
            quotients.append(float(v @ gram @ v))
    return v, quotients
