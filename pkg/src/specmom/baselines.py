"""Reference estimators: OLS, Huber IRLS, RANSAC, and geometric-median-of-blocks."""

from dataclasses import dataclass, field

import numpy as np

from .errors import NoConsensus, SingularGram


@dataclass
class BaselineResult:
    method: str
    beta: np.ndarray
    meta: dict = field(default_factory=dict)


def _solve_normal_equations(X, y, weights=None):
    if weights is None:
        gram = X.T @ X
        rhs = X.T @ y
    else:
        Xw = X * weights[:, None]
        gram = Xw.T @ X
        rhs = Xw.T @ y
    try:
        coef = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularGram(str(exc)) from exc
    if not np.all(np.isfinite(coef)):
        raise SingularGram("non-finite solution")
    return coef


def ols(data):
    beta = _solve_normal_equations(data.X, data.y)
    return BaselineResult("ols", beta)


def huber(data, delta=1.35, max_iters=100, tol=1e-8):
    """IRLS on the Huber loss with weights min(1, delta / |r_i|)."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    beta = _solve_normal_equations(data.X, data.y)
    for it in range(1, max_iters + 1):
        resid = np.abs(data.y - data.X @ beta)
        with np.errstate(divide="ignore"):
            w = np.minimum(1.0, delta / np.where(resid > 0, resid, np.inf))
        new_beta = _solve_normal_equations(data.X, data.y, weights=w)
        change = np.linalg.norm(new_beta - beta)
        beta = new_beta
        if change < tol * max(np.linalg.norm(beta), 1.0):
            break
    return BaselineResult("huber", beta, {"iterations": it})


def ransac(data, trials=100, inlier_tol=None, rng=None):
    """Classic consensus scheme: fit on d+1 random rows, refit on the best inlier set."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n, d = data.X.shape
    if n <= d:
        raise ValueError("RANSAC needs N > d")
    rng = rng if rng is not None else np.random.default_rng(0)
    if inlier_tol is None:
        base = ols(data).beta
        resid = np.abs(data.y - data.X @ base)
        mad = np.median(np.abs(resid - np.median(resid)))
        inlier_tol = 3.0 * max(mad, 1e-12)
    best_count, best_inliers = 0, None
    for _ in range(trials):
        rows = rng.choice(n, size=d + 1, replace=False)
        try:
            cand = _solve_normal_equations(data.X[rows], data.y[rows])
        except SingularGram:
            continue
        inliers = np.abs(data.y - data.X @ cand) <= inlier_tol
        count = int(inliers.sum())
        if count > best_count:
            best_count, best_inliers = count, inliers
    if best_inliers is None or best_count < d + 1:
        raise NoConsensus(f"no trial reached {d + 1} inliers")
    beta = _solve_normal_equations(data.X[best_inliers], data.y[best_inliers])
    return BaselineResult("ransac", beta, {"inliers": best_count, "tol": inlier_tol})


def geometric_median(points, tol=1e-9, max_iters=200):
    """Weiszfeld iteration; exact for a single point or identical points."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    z = points.mean(axis=0)
    for _ in range(max_iters):
        dists = np.linalg.norm(points - z, axis=1)
        at_point = dists < 1e-15
        if np.any(at_point):
            # Vardi-Zhang adjustment: stay unless the pull away dominates
            others = ~at_point
            if not np.any(others):
                return points[at_point][0]
            inv = 1.0 / dists[others]
            pull = ((points[others] - z) * inv[:, None]).sum(axis=0)
            if np.linalg.norm(pull) <= at_point.sum():
                return z
            z_new = (points[others] * inv[:, None]).sum(axis=0) / inv.sum()
        else:
            inv = 1.0 / dists
            z_new = (points * inv[:, None]).sum(axis=0) / inv.sum()
        if np.linalg.norm(z_new - z) < tol * max(np.linalg.norm(z), 1.0):
            return z_new
        z = z_new
    return z


def metric_mom(data, K, max_iters=200):
    """Geometric median of per-block OLS fits (blocks are contiguous chunks)."""
    n, d = data.X.shape
    if K < 1 or K > n:
        raise ValueError(f"K={K} outside [1, {n}]")
    m = n // K
    estimates, dropped = [], 0
    for k in range(K):
        rows = slice(k * m, (k + 1) * m)
        try:
            estimates.append(_solve_normal_equations(data.X[rows], data.y[rows]))
        except SingularGram:
            dropped += 1
    if dropped > K / 2:
        raise SingularGram(f"{dropped} of {K} blocks were singular")
    beta = geometric_median(np.array(estimates), max_iters=max_iters)
    return BaselineResult("metric-mom", beta, {"blocks": K - dropped, "dropped": dropped})
