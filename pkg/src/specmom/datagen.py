"""Synthetic heavy-tailed regression data with adversarial contamination."""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .blocks import Dataset

ATTACK_MAGNITUDE = 1e9


class AttackKind(enum.Enum):
    COORD_ADD = "coord-add"  # add 1e9 to some coordinates
    COORD_MUL = "coord-mul"  # multiply some coordinates by 1e9
    RESP_ZERO = "resp-zero"  # zero out responses
    RESP_HUGE = "resp-huge"  # set responses to 1e9
    MIXED = "mixed"  # cycle through the four above


@dataclass
class GenSpec:
    n: int
    d: int
    sigma: float = 1.0  # inverse SNR
    student_df: float = 3.0
    epsilon: float = 0.0
    attack: AttackKind = AttackKind.MIXED
    seed: int = 0
    # "multivariate Student" is ambiguous; default is independent per-coordinate
    # t draws, "elliptical" is a Gaussian vector with a shared inverse-chi-square
    # scale, "gaussian" is the light-tailed control used by the diagnostics.
    dist: str = "student"

    def __post_init__(self):
        if not 0.0 <= self.epsilon < 0.5:
            raise ValueError("epsilon must be in [0, 1/2)")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if self.student_df <= 2:
            raise ValueError("student_df must exceed 2 (finite second moment)")
        if self.dist not in ("student", "elliptical", "gaussian"):
            raise ValueError(f"unknown dist {self.dist!r}")


def second_moment_matrix(spec):
    """The covariate second-moment matrix implied by the generator.

    Per-coordinate and elliptical t(nu) draws both have variance nu/(nu-2)
    per coordinate (3 for nu = 3), so the estimator must be handed that
    scaling, not the identity.
    """
    if spec.dist == "gaussian":
        scale = 1.0
    else:
        scale = spec.student_df / (spec.student_df - 2.0)
    return scale * np.eye(spec.d)


def _draw_noise(spec, size, rng):
    if spec.dist == "gaussian":
        return rng.standard_normal(size)
    return rng.standard_t(spec.student_df, size=size)


def generate_clean(spec, rng):
    """All-ones coefficients, heavy-tailed design, y = <beta*, x> + sigma * xi."""
    if spec.dist == "gaussian":
        X = rng.standard_normal((spec.n, spec.d))
    elif spec.dist == "student":
        X = rng.standard_t(spec.student_df, size=(spec.n, spec.d))
    else:  # elliptical multivariate t
        Z = rng.standard_normal((spec.n, spec.d))
        s = np.sqrt(spec.student_df / rng.chisquare(spec.student_df, size=spec.n))
        X = Z * s[:, None]
    beta_star = np.ones(spec.d)
    xi = _draw_noise(spec, spec.n, rng)
    y = X @ beta_star + spec.sigma * xi
    return Dataset(
        X=X, y=y, truth=beta_star, outlier_mask=np.zeros(spec.n, dtype=bool)
    )


def contaminate(data, epsilon, attack, rng):
    """Apply the attack to floor(epsilon * N) uniformly random rows."""
    if not 0.0 <= epsilon < 0.5:
        raise ValueError("epsilon must be in [0, 1/2)")
    n, d = data.X.shape
    n_bad = int(epsilon * n)
    X = data.X.copy()
    y = data.y.copy()
    mask = (
        data.outlier_mask.copy()
        if data.outlier_mask is not None
        else np.zeros(n, dtype=bool)
    )
    rows = rng.choice(n, size=n_bad, replace=False)
    kinds = [
        AttackKind.COORD_ADD,
        AttackKind.COORD_MUL,
        AttackKind.RESP_ZERO,
        AttackKind.RESP_HUGE,
    ]
    n_coords = max(1, math.ceil(d / 4))
    for j, row in enumerate(rows):
        kind = kinds[j % 4] if attack is AttackKind.MIXED else attack
        if kind is AttackKind.COORD_ADD:
            cols = rng.choice(d, size=n_coords, replace=False)
            X[row, cols] += ATTACK_MAGNITUDE
        elif kind is AttackKind.COORD_MUL:
            cols = rng.choice(d, size=n_coords, replace=False)
            X[row, cols] *= ATTACK_MAGNITUDE
        elif kind is AttackKind.RESP_ZERO:
            y[row] = 0.0
        else:
            y[row] = ATTACK_MAGNITUDE
        mask[row] = True
    return Dataset(X=X, y=y, truth=data.truth, outlier_mask=mask)


def generate(spec):
    """Clean generation followed by contamination, all from the spec's seed."""
    rng = np.random.default_rng(spec.seed)
    data = generate_clean(spec, rng)
    if spec.epsilon > 0:
        data = contaminate(data, spec.epsilon, spec.attack, rng)
    return data
