"""Spectral direction search: multiplicative weights over pruned block vectors,
KL projection onto the capped simplex, and Gaussian rounding of the iterates."""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .blocks import BlockVectors
from .errors import Infeasible, ZeroMatrix
from .linalg import default_power_iters, power_method

CAP_SPREAD = 0.8  # weights are forced to spread over >= 0.8 K' blocks
MARGIN_SHRINK = 10.0  # accepted directions certify margin theta / 10
ACCEPT_FRAC = 0.4  # acceptance needs margins on >= ceil(0.4 K') blocks


@dataclass
class DirectionResult:
    status: str  # "success" | "fail"
    direction: Optional[np.ndarray] = None
    margin_count: int = 0
    iterations_used: int = 0

    @property
    def ok(self):
        return self.status == "success"


def kl_project_capped(w, cap):
    """KL projection of a probability vector onto {sum = 1, 0 <= w_i <= cap}.

    The minimizer is w'_i = min(cap, c * w_i) with c fixing the total mass;
    computed by the cap-and-rescale fixpoint, which terminates in <= K'
    rounds because the capped set only grows.
    """
    w = np.asarray(w, dtype=float)
    k = w.size
    if cap * k < 1.0 - 1e-12:
        raise Infeasible(f"cap {cap} * {k} < 1")
    out = w / w.sum()
    capped = np.zeros(k, dtype=bool)
    for _ in range(k):
        over = out > cap
        if not np.any(over & ~capped):
            break
        capped |= over
        out[capped] = cap
        free = ~capped
        budget = 1.0 - cap * capped.sum()
        free_mass = w[free].sum()
        if free_mass <= 0.0 or budget <= 0.0:
            out[free] = max(budget, 0.0) / max(free.sum(), 1)
            break
        out[free] = w[free] * (budget / free_mass)
    return out


def margin_count(pruned, u, theta):
    return int(np.count_nonzero(pruned @ u > theta / MARGIN_SHRINK))

def accept_threshold(k_prime):
    return math.ceil(ACCEPT_FRAC * k_prime)


def _pruned_rows(blocks):
    if isinstance(blocks, BlockVectors):
        if blocks.pruned is None:
            raise ValueError("blocks must be pruned first")
        return np.asarray(blocks.pruned, dtype=float)
    return np.atleast_2d(np.asarray(blocks, dtype=float))


def round_directions(blocks, theta, directions, max_trials, rng):
    """Sample random unit combinations of the iterates until one certifies
    margins theta/10 on >= ceil(0.4 K') pruned blocks, or give up."""
    pruned = _pruned_rows(blocks)
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    if dirs.size == 0:
        raise ValueError("directions must be nonempty")
    need = accept_threshold(pruned.shape[0])
    for trial in range(1, max_trials + 1):
        g = rng.standard_normal(dirs.shape[0])
        u = g @ dirs
        norm = np.linalg.norm(u)
        if norm == 0.0:
            continue
        u /= norm
        count = margin_count(pruned, u, theta)
        if count >= need:
            return DirectionResult("success", u, count, trial)
    return DirectionResult("fail", None, 0, max_trials)


class MwuTrajectory:
    """Lazily extended multiplicative-weights iterate sequence.

    Each step extracts the approximate top singular direction of the
    sqrt(weight)-scaled block matrix, scores blocks by their squared margins
    (normalized by a robust norm scale and clamped to [0, 1] so the update
    keeps weights nonnegative), downweights, renormalizes and KL-projects
    onto the capped simplex.  The weight dynamics never see the probed margin, so a single
    trajectory can serve every midpoint of a binary search over theta.
    """

    def __init__(self, blocks, rng, num_power_iters=None):
        pruned = _pruned_rows(blocks)
        self.pruned = pruned
        self.rng = rng
        k_prime, d = pruned.shape
        self.norms = np.linalg.norm(pruned, axis=1)
        self.radius = float(self.norms.max())
        self.need = accept_threshold(k_prime)
        # Normalizing scores by the global max norm stalls the dynamics when a
        # few kept blocks carry norms orders of magnitude above the rest: every
        # other block's score collapses toward zero.  Use the need-th largest
        # norm instead -- the largest scale any certifiable margin can involve
        # -- and clamp scores at 1 so outsized blocks decay at the fastest
        # rate.  On well-behaved data the two scales coincide.
        scale = float(np.sort(self.norms)[k_prime - self.need])
        self.scale = scale if scale > 0.0 else self.radius
        self.num_power_iters = num_power_iters or default_power_iters(d, k_prime)
        self.cap = 1.0 / (CAP_SPREAD * k_prime)
        self.w = np.full(k_prime, 1.0 / k_prime)
        self.iterates = []
        self.margins = []  # pruned @ u_t for each iterate
        self.dead = self.radius == 0.0

    def _step(self):
        try:
            u_t = power_method(
                np.sqrt(self.w)[:, None] * self.pruned, self.num_power_iters, self.rng
            )
        except ZeroMatrix:
            self.dead = True
            return
        margins = self.pruned @ u_t
        self.iterates.append(u_t)
        self.margins.append(margins)
        scores = np.minimum(margins**2 / (self.scale * self.scale), 1.0)
        w = self.w * (1.0 - scores / 2.0)
        total = w.sum()
        if total <= 0.0:
            self.dead = True
            return
        self.w = kl_project_capped(w / total, self.cap)

    def probe(self, theta, T, early_accept=True, round_trials=0):
        """Search the first T iterates for one certifying margins theta/10 on
        >= ceil(0.4 K') blocks; optionally fall back to Gaussian rounding."""
        if theta <= 0:
            raise ValueError("theta must be positive")
        if T < 1:
            raise ValueError("T must be >= 1")
        cutoff = theta / MARGIN_SHRINK
        # A block can only reach margin theta/10 if its norm exceeds it.
        if np.count_nonzero(self.norms > cutoff) < self.need:
            return DirectionResult("fail", None, 0, 0)
        best = None
        for t in range(T):
            if t >= len(self.iterates):
                if self.dead:
                    break
                self._step()
                if t >= len(self.iterates):
                    break
            if early_accept:
                count = int(np.count_nonzero(self.margins[t] > cutoff))
                if count >= self.need:
                    best = DirectionResult("success", self.iterates[t], count, t + 1)
                    break
        if best is not None:
            return best
        used = min(T, len(self.iterates))
        if round_trials and used:
            result = round_directions(
                self.pruned, theta, self.iterates[:used], round_trials, self.rng
            )
            return DirectionResult(
                result.status, result.direction, result.margin_count, used
            )
        return DirectionResult("fail", None, 0, used)


def bregman_regression(
    blocks,
    theta,
    T,
    rng,
    num_power_iters=None,
    round_trials=50,
    early_accept=True,
):
    """Multiplicative-weights search for a unit direction aligned with most
    blocks: run the MWU trajectory, accept an iterate that certifies the
    acceptance condition (when `early_accept`), else round the iterates."""
    traj = MwuTrajectory(blocks, rng, num_power_iters=num_power_iters)
    return traj.probe(theta, T, early_accept=early_accept, round_trials=round_trials)
