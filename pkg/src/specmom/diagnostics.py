"""Monte-Carlo checks of the three per-block concentration events that the
estimator's guarantees rest on (multiplier, quadratic and initial-statistic
bounds).

Direction probing replaces the "for all u" quantifier with `num_dirs` random
directions, so a passing report is a necessary condition only.  The noise
and kurtosis constants are estimated from a large calibration sample of the
generator instead of closed forms, which keeps the checks generator-agnostic.
"""

import math
from dataclasses import dataclass, field
from typing import List

import numpy as np

from .blocks import block_statistics, partition_blocks
from .datagen import contaminate, generate_clean, second_moment_matrix
from .linalg import inv_sqrt_psd

BLOCK_ALLOWANCE = 1.0 / 20.0  # a trial tolerates K/20 violating blocks
SANDWICH_M = 360_000.0  # sandwich clause applies when m >= 360000 gamma^2
DEFAULT_CALIBRATION_N = 1_000_000


@dataclass
class EventReport:
    event: str
    trials: int
    pass_fraction: float
    worst_fail_fractions: List[float] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "event": self.event,
            "trials": self.trials,
            "pass_fraction": self.pass_fraction,
            "worst_fail_fractions": list(self.worst_fail_fractions),
            "meta": {k: float(v) for k, v in self.meta.items()},
        }


def _sigma_directions(sigma, num_dirs, rng):
    """Directions on the boundary of the ellipsoid {u : <u, sigma u> <= 1}."""
    d = sigma.shape[0]
    V = rng.standard_normal((num_dirs, d))
    norms = np.sqrt(np.einsum("ij,jk,ik->i", V, sigma, V))
    return V / norms[:, None]


@dataclass
class Calibration:
    sigma_proc: float  # sup_u sqrt(E[xi^2 <u, X>^2]) over probed directions
    gamma: float  # sup_u sqrt(E<u,X>^4) / E<u,X>^2
    init_term: float  # E[xi^2 ||Sigma^{-1/2} X||^2]


def calibrate(spec, rng, num_dirs=50, n_cal=DEFAULT_CALIBRATION_N):
    sigma = second_moment_matrix(spec)
    s_inv_sqrt = inv_sqrt_psd(sigma)
    cal = generate_clean(
        type(spec)(
            n=n_cal,
            d=spec.d,
            sigma=spec.sigma,
            student_df=spec.student_df,
            epsilon=0.0,
            seed=spec.seed,
            dist=spec.dist,
        ),
        rng,
    )
    xi = cal.y - cal.X @ cal.truth
    U = _sigma_directions(sigma, num_dirs, rng)
    proj = cal.X @ U.T  # (n_cal, num_dirs)
    sigma_proc = float(np.sqrt(np.max(np.mean(xi[:, None] ** 2 * proj**2, axis=0))))
    second = np.mean(proj**2, axis=0)
    fourth = np.mean(proj**4, axis=0)
    gamma = float(np.max(np.sqrt(fourth) / second))
    white = cal.X @ s_inv_sqrt
    init_term = float(np.mean(xi**2 * np.einsum("ij,ij->i", white, white)))
    return Calibration(sigma_proc=sigma_proc, gamma=gamma, init_term=init_term)


def _trial_data(spec, rng):
    data = generate_clean(spec, rng)
    if spec.epsilon > 0:
        data = contaminate(data, spec.epsilon, spec.attack, rng)
    return data


def check_multiplier_event(spec, K, num_dirs, trials, rng, calibration=None):
    """Per-block residual-times-direction averages against r = 8 sigma sqrt(K/N)."""
    sigma = second_moment_matrix(spec)
    cal = calibration or calibrate(spec, rng, num_dirs=num_dirs)
    m = spec.n // K
    n_used = K * m
    r = 8.0 * cal.sigma_proc * math.sqrt(K / n_used)
    allowance = BLOCK_ALLOWANCE * K
    worst, passed = [], 0
    for _ in range(trials):
        data = _trial_data(spec, rng)
        part = partition_blocks(data.n, K, rng)
        xi = data.y - data.X @ data.truth
        U = _sigma_directions(sigma, num_dirs, rng)
        proj = data.X @ U.T
        per_sample = xi[:, None] * proj
        block_means = per_sample[part.assignment].mean(axis=1)  # (K, num_dirs)
        violations = (np.abs(block_means) > r).sum(axis=0)  # per direction
        worst_frac = float(violations.max() / K)
        worst.append(worst_frac)
        if violations.max() <= allowance:
            passed += 1
    return EventReport(
        "multiplier",
        trials,
        passed / trials,
        worst,
        meta={"r": r, "sigma_proc": cal.sigma_proc, "m": m},
    )


def check_quadratic_event(spec, K, num_dirs, trials, rng, calibration=None):
    """Per-block quadratic forms against the 6 gamma / sqrt(m) deviation bound,
    plus the 1 +/- 1/100 sandwich when m is large enough for it to apply."""
    sigma = second_moment_matrix(spec)
    cal = calibration or calibrate(spec, rng, num_dirs=num_dirs)
    m = spec.n // K
    bound = 6.0 * cal.gamma / math.sqrt(m)
    check_sandwich = m >= SANDWICH_M * cal.gamma**2
    allowance = BLOCK_ALLOWANCE * K
    worst, passed = [], 0
    for _ in range(trials):
        data = _trial_data(spec, rng)
        part = partition_blocks(data.n, K, rng)
        U = _sigma_directions(sigma, num_dirs, rng)
        V = _sigma_directions(sigma, num_dirs, rng)
        pu = data.X @ U.T
        pv = data.X @ V.T
        cross = (pu * pv)[part.assignment].mean(axis=1)  # (K, num_dirs)
        target = np.einsum("ij,jk,ik->i", U, sigma, V)  # <u, sigma v>, unit norms
        violations = (np.abs(cross - target[None, :]) > bound).sum(axis=0)
        max_viol = violations.max()
        if check_sandwich:
            quad = (pu**2)[part.assignment].mean(axis=1)  # <u, sigma u> = 1
            sand = ((quad < 0.99) | (quad > 1.01)).sum(axis=0)
            max_viol = max(max_viol, sand.max())
        worst_frac = float(max_viol / K)
        worst.append(worst_frac)
        if max_viol <= allowance:
            passed += 1
    return EventReport(
        "quadratic",
        trials,
        passed / trials,
        worst,
        meta={
            "bound": bound,
            "gamma": cal.gamma,
            "m": m,
            "sandwich_checked": float(check_sandwich),
        },
    )


def check_init_event(spec, K, beta_grid, trials, rng, calibration=None):
    """Norms of the whitened block statistics at candidate coefficients against
    the noise-plus-distance bound."""
    sigma = second_moment_matrix(spec)
    s_inv_sqrt = inv_sqrt_psd(sigma)
    cal = calibration or calibrate(spec, rng)
    m = spec.n // K
    beta_grid = [np.asarray(b, dtype=float) for b in beta_grid]
    noise_term = 8.0 * math.sqrt(cal.init_term / m)
    allowance = BLOCK_ALLOWANCE * K
    worst, passed = [], 0
    for _ in range(trials):
        data = _trial_data(spec, rng)
        part = partition_blocks(data.n, K, rng)
        max_viol = 0
        for beta_c in beta_grid:
            diff = beta_c - data.truth
            dist = math.sqrt(max(diff @ sigma @ diff, 0.0))
            bound = noise_term + math.sqrt(spec.d) * dist
            stats = block_statistics(data, beta_c, s_inv_sqrt, part)
            norms = np.linalg.norm(stats.raw, axis=1)
            max_viol = max(max_viol, int((norms > bound).sum()))
        worst.append(float(max_viol / K))
        if max_viol <= allowance:
            passed += 1
    return EventReport(
        "init",
        trials,
        passed / trials,
        worst,
        meta={"noise_term": noise_term, "m": m},
    )
