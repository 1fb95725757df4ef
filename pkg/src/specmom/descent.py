"""Outer estimator: binary-search step size, whitened descent direction, descent loop."""

import json
import math
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .blocks import block_statistics, partition_blocks, prune
from .direction import MARGIN_SHRINK, MwuTrajectory, accept_threshold, bregman_regression
from .errors import DirectionSearchFailed
from .linalg import inv_sqrt_psd

# Step multiplier from the source analysis: (2/100) * (1/10) * (100/102).
# Contraction with it is ~2e-5 per iteration, far too slow for desk-scale
# runs, so the default is a larger multiplier; see DescentConfig.step_scale.
ANALYSIS_STEP_SCALE = (2.0 / 100.0) * (1.0 / 10.0) * (100.0 / 102.0)
DEFAULT_STEP_SCALE = 0.05

# Auto bisection depth: log2(K) steps resolve a well-scaled radius, but under
# 1e9-magnitude attacks the pruned radius can sit ~14 decades above the clean
# scale, so the auto rule adds enough halvings to walk down through them.
MIN_AUTO_BISECTION = 48


@dataclass
class ProblemSpec:
    """Known second-moment matrix and block count."""

    sigma: np.ndarray
    K: int
    sigma_inv_sqrt: np.ndarray = None

    def __post_init__(self):
        self.sigma = np.asarray(self.sigma, dtype=float)
        if self.sigma_inv_sqrt is None:
            self.sigma_inv_sqrt = inv_sqrt_psd(self.sigma)

    def sigma_norm(self, v):
        v = np.asarray(v, dtype=float)
        return float(np.sqrt(max(v @ self.sigma @ v, 0.0)))


@dataclass
class DescentConfig:
    T_des: int = 100
    mwu_T: Optional[int] = None  # None: ceil(6 ln(K') K), the analysis budget
    bisection_steps: Optional[int] = None  # None: max(ceil(log2 K), 48)
    round_trials: int = 50
    early_stop_rel: float = 0.0  # 0 disables early stopping
    early_stop_abs: float = 0.0
    seed: int = 0
    step_scale: float = DEFAULT_STEP_SCALE
    adaptive_T: bool = True  # cap MWU budget by ceil(2 ln(K') R^2 / theta^2)
    num_power_iters: Optional[int] = None
    early_accept: bool = True
    compensated: bool = True


@dataclass
class TraceRecord:
    iter: int
    beta: np.ndarray
    theta: float
    step: float
    direction: Optional[np.ndarray]
    mwu_status: str
    dist_to_truth: Optional[float]
    wall_ms: float


@dataclass
class DescentTrace:
    records: List[TraceRecord] = field(default_factory=list)
    beta_hat: Optional[np.ndarray] = None
    early_stopped: bool = False

    def to_jsonl(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for rec in self.records:
                row = {
                    "iter": rec.iter,
                    "theta": rec.theta,
                    "step": rec.step,
                    "mwu_status": rec.mwu_status,
                    "wall_ms": rec.wall_ms,
                }
                if rec.dist_to_truth is not None:
                    row["dist_to_truth"] = rec.dist_to_truth
                fh.write(json.dumps(row) + "\n")


def _mwu_budget(cfg, k_prime, K, radius, theta):
    log_kp = math.log(max(k_prime, 2))
    budget = cfg.mwu_T if cfg.mwu_T is not None else math.ceil(6.0 * log_kp * K)
    if cfg.adaptive_T and theta > 0:
        data_bound = math.ceil(2.0 * log_kp * (radius / theta) ** 2)
        budget = min(budget, max(data_bound, 1))
    return max(budget, 1)


def _bisection_steps(cfg, K):
    if cfg.bisection_steps is not None:
        return cfg.bisection_steps
    return max(math.ceil(math.log2(max(K, 2))), MIN_AUTO_BISECTION)


def step_size(data, beta_c, spec, cfg, rng, partition=None):
    """Binary search over [0, R] for the largest margin the direction search
    certifies, scaled down to a step length."""
    if partition is None:
        partition = partition_blocks(data.n, spec.K, rng)
    stats = block_statistics(
        data, beta_c, spec.sigma_inv_sqrt, partition, compensated=cfg.compensated
    )
    bv = prune(stats.raw)
    radius = bv.radius
    if radius == 0.0:
        return 0.0
    k_prime = bv.pruned.shape[0]
    # One MWU trajectory serves every midpoint: the weight dynamics do not
    # depend on the probed margin, only the acceptance scan does.
    traj = MwuTrajectory(bv, rng, num_power_iters=cfg.num_power_iters)
    # A block's margin along any unit direction is at most its norm, so no
    # theta above MARGIN_SHRINK times the accept-count-th largest pruned norm
    # can ever be certified.  Starting the bisection there (instead of at the
    # radius) keeps the search within reach of the inlier scale even when a
    # few kept blocks carry astronomically large norms.
    norms = np.sort(np.linalg.norm(bv.pruned, axis=1))
    ceiling = MARGIN_SHRINK * norms[k_prime - accept_threshold(k_prime)]
    d_high, d_low = min(radius, ceiling), 0.0
    for _ in range(_bisection_steps(cfg, spec.K)):
        d_mid = 0.5 * (d_high + d_low)
        if d_mid <= 0.0 or d_mid == d_low or d_mid == d_high:
            break
        result = traj.probe(
            d_mid,
            _mwu_budget(cfg, k_prime, spec.K, radius, d_mid),
            early_accept=True,
        )
        if result.ok:
            d_low = d_mid
        else:
            d_high = d_mid
    return d_low * cfg.step_scale


def descent_direction(data, beta_c, spec, cfg, theta, rng, partition=None):
    """Direction search at the unscaled margin; returns g with ||g||_Sigma = 1.

    Retries once on failure (the search is randomized with a small failure
    probability), then raises DirectionSearchFailed so the caller can skip
    the iteration.
    """
    if theta <= 0:
        raise ValueError("theta must be positive")
    if partition is None:
        partition = partition_blocks(data.n, spec.K, rng)
    stats = block_statistics(
        data, beta_c, spec.sigma_inv_sqrt, partition, compensated=cfg.compensated
    )
    bv = prune(stats.raw)
    margin = theta / cfg.step_scale
    k_prime = bv.pruned.shape[0]
    last = None
    for _ in range(2):
        result = bregman_regression(
            bv,
            margin,
            _mwu_budget(cfg, k_prime, spec.K, bv.radius, margin),
            rng,
            num_power_iters=cfg.num_power_iters,
            round_trials=cfg.round_trials,
            early_accept=cfg.early_accept,
        )
        last = result
        if result.ok:
            # The certified u aligns with the block mean, i.e. with beta* -
            # beta_c in whitened coordinates; negate so the caller's
            # beta - step * g update walks toward beta*.
            g = -(spec.sigma_inv_sqrt @ result.direction)
            norm = spec.sigma_norm(g)
            if norm > 0:
                return g / norm
    raise DirectionSearchFailed(
        f"no direction certified at margin {margin:.3e}", diagnostics=last
    )


def robust_regression(data, spec, cfg, beta0=None):
    """Spectral median-of-means descent; returns (beta_hat, trace)."""
    rng = np.random.default_rng(cfg.seed)
    partition = partition_blocks(data.n, spec.K, rng)
    beta = np.zeros(data.d) if beta0 is None else np.asarray(beta0, dtype=float).copy()
    trace = DescentTrace()
    stall = 0
    for t in range(1, cfg.T_des + 1):
        t0 = time.perf_counter()
        d_t = step_size(data, beta, spec, cfg, rng, partition=partition)
        g = None
        if d_t == 0.0:
            status = "zero-step"
        else:
            try:
                g = descent_direction(
                    data, beta, spec, cfg, d_t, rng, partition=partition
                )
                beta = beta - d_t * g
                status = "success"
            except DirectionSearchFailed:
                status = "fail"
        dist = spec.sigma_norm(beta - data.truth) if data.truth is not None else None
        trace.records.append(
            TraceRecord(
                iter=t,
                beta=beta.copy(),
                theta=d_t / cfg.step_scale,
                step=d_t if status == "success" else 0.0,
                direction=g,
                mwu_status=status,
                dist_to_truth=dist,
                wall_ms=(time.perf_counter() - t0) * 1e3,
            )
        )
        if d_t < cfg.early_stop_rel * spec.sigma_norm(beta) + cfg.early_stop_abs:
            stall += 1
            if stall >= 3:
                trace.early_stopped = True
                break
        else:
            stall = 0
    trace.beta_hat = beta
    return beta, trace
