"""Independent reference implementations used to cross-check fast code paths.

These are deliberately written with different algorithms than the library
(projected gradient instead of closed-form fixpoints, dense factorizations
instead of iterative methods) so agreement is meaningful.
"""

import numpy as np


def euclidean_project_capped_simplex(v, cap):
    """Euclidean projection onto {p : 0 <= p_i <= cap_b, sum_i p_i = 1}.

    Batched: v has shape (B, K), cap shape (B,). Bisection on the shift tau
    in p = clip(v - tau, 0, cap); sum(p) is continuous and non-increasing
    in tau.
    """
    v = np.atleast_2d(np.asarray(v, dtype=float))
    cap = np.asarray(cap, dtype=float)
    if cap.ndim < 2:
        cap = np.broadcast_to(cap.reshape(-1, 1) if cap.ndim == 1 else cap, v.shape)
    lo = v.min(axis=1) - cap.max(axis=1) - 1.0
    hi = v.max(axis=1) + 1.0
    for _ in range(60):
        tau = 0.5 * (lo + hi)
        s = np.clip(v - tau[:, None], 0.0, cap).sum(axis=1)
        grow = s > 1.0
        lo = np.where(grow, tau, lo)
        hi = np.where(grow, hi, tau)
    return np.clip(v - (0.5 * (lo + hi))[:, None], 0.0, cap)


def kl_project_oracle(w, cap, iters=4000):
    """Accelerated projected-gradient minimization of KL(p || w) over the
    capped simplex (batched like euclidean_project_capped_simplex).

    Uses FISTA with restart-on-increase; the objective is 1-strongly convex
    (Hessian diag(1/p) with p <= 1), so this converges well past 1e-6 for
    weight vectors bounded away from zero.

    cap may be scalar, per-row (B,), or per-entry (B, K). A per-entry cap of
    zero pins that coordinate to zero, which lets callers pad ragged batches.
    """
    squeeze = np.asarray(w).ndim == 1
    w = np.atleast_2d(np.asarray(w, dtype=float))
    cap = np.asarray(cap, dtype=float)
    if cap.ndim < 2:
        cap = np.broadcast_to(cap.reshape(-1, 1) if cap.ndim == 1 else cap, w.shape)
    live = cap > 0.0
    p = live / live.sum(axis=1, keepdims=True)
    p = np.minimum(p, cap)
    p /= p.sum(axis=1, keepdims=True)
    z = p.copy()
    t_mom = 1.0
    wmin = np.min(np.where(live, w, np.inf))
    floor = max(wmin * 1e-3, 1e-300)
    step = 0.5 * max(wmin, 1e-6)  # ~1/L with L = 1/p_min
    prev_obj = np.full(w.shape[0], np.inf)
    for _ in range(iters):
        grad = np.log(np.maximum(z, floor) / np.maximum(w, 1e-300)) + 1.0
        p_new = euclidean_project_capped_simplex(z - step * grad, cap)
        obj = np.sum(p_new * np.log(np.maximum(p_new, 1e-300) / np.maximum(w, 1e-300)), axis=1)
        restart = obj > prev_obj
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_mom * t_mom))
        mom = (t_mom - 1.0) / t_next
        z = p_new + mom * (p_new - p)
        z[restart] = p_new[restart]
        t_mom = 1.0 if np.all(restart) else t_next
        p = p_new
        prev_obj = obj
    return p[0] if squeeze else p


def lstsq_oracle(X, y):
    """Least squares via dense QR, independent of normal equations."""
    q, r = np.linalg.qr(X)
    return np.linalg.solve(r, q.T @ y)


def top_direction_oracle(rows):
    """Top right singular vector and eigenvalue of rows^T rows via eigh."""
    gram = rows.T @ rows
    vals, vecs = np.linalg.eigh(gram)
    return vecs[:, -1], vals[-1]


def margin_net_max_count(pruned, theta, grid=20000):
    """Exhaustive angular-grid search (d=2 only) for the direction maximizing
    the number of blocks with margin above theta/10."""
    angles = np.linspace(0.0, 2.0 * np.pi, grid, endpoint=False)
    dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    counts = (pruned @ dirs.T > theta / 10.0).sum(axis=0)
    return int(counts.max())
