"""Tests for the baseline estimators."""

import numpy as np
import pytest

from _oracles import lstsq_oracle
from specmom.baselines import geometric_median, huber, metric_mom, ols, ransac
from specmom.blocks import Dataset
from specmom.datagen import ATTACK_MAGNITUDE, AttackKind, GenSpec, contaminate, generate_clean
from specmom.errors import NoConsensus, SingularGram


def gaussian_data(n, d, sigma=1.0, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, d))
    beta = rng.standard_normal(d)
    y = X @ beta + sigma * rng.standard_normal(n)
    return Dataset(X=X, y=y, truth=beta)


class TestOls:
    def test_interpolates_square_system(self):
        data = gaussian_data(3, 3, sigma=0.0)
        res = ols(data)
        np.testing.assert_allclose(res.beta, data.truth, atol=1e-8)

    def test_zero_response(self):
        data = gaussian_data(50, 3)
        data.y[:] = 0.0
        res = ols(data)
        np.testing.assert_allclose(res.beta, np.zeros(3), atol=1e-10)

    @pytest.mark.parametrize("seed", range(5))
    def test_against_qr_oracle(self, seed):
        data = gaussian_data(100, 6, seed=seed)
        res = ols(data)
        np.testing.assert_allclose(res.beta, lstsq_oracle(data.X, data.y), atol=1e-8)

    def test_singular_design(self):
        X = np.ones((10, 2))  # collinear columns
        with pytest.raises(SingularGram):
            ols(Dataset(X=X, y=np.ones(10)))


class TestHuber:
    def test_noiseless_recovery(self):
        data = gaussian_data(200, 4, sigma=0.0)
        res = huber(data)
        np.testing.assert_allclose(res.beta, data.truth, atol=1e-8)

    def test_large_delta_matches_ols(self):
        data = gaussian_data(150, 4, seed=2)
        res = huber(data, delta=1e12)
        np.testing.assert_allclose(res.beta, ols(data).beta, atol=1e-8)

    def test_single_outlier_bounded_influence(self):
        data = gaussian_data(200, 3, sigma=0.1, seed=3)
        data.y[0] = 1e6
        err_huber = np.linalg.norm(huber(data).beta - data.truth)
        err_ols = np.linalg.norm(ols(data).beta - data.truth)
        assert err_huber < 0.1 * err_ols
        assert err_huber < 0.5


class TestRansac:
    def test_noiseless_recovery(self):
        data = gaussian_data(100, 3, sigma=0.0, seed=4)
        res = ransac(data, rng=np.random.default_rng(0))
        np.testing.assert_allclose(res.beta, data.truth, atol=1e-8)

    def test_ten_percent_huge_responses(self):
        data = gaussian_data(300, 3, sigma=0.0, seed=5)
        bad = np.random.default_rng(1).choice(300, 30, replace=False)
        data.y[bad] = ATTACK_MAGNITUDE
        res = ransac(data, rng=np.random.default_rng(2))
        np.testing.assert_allclose(res.beta, data.truth, atol=1e-6)

    def test_zero_trials_rejected(self):
        data = gaussian_data(50, 3)
        with pytest.raises((ValueError, NoConsensus)):
            ransac(data, trials=0, rng=np.random.default_rng(0))


class TestGeometricMedian:
    def test_single_point(self):
        pts = np.array([[1.0, 2.0]])
        np.testing.assert_allclose(geometric_median(pts), [1.0, 2.0], atol=1e-9)

    def test_symmetric_cloud(self):
        pts = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
        np.testing.assert_allclose(geometric_median(pts), [0.0, 0.0], atol=1e-7)

    def test_majority_resistant(self):
        pts = np.vstack([np.zeros((7, 2)), np.full((3, 2), 1e6)])
        np.testing.assert_allclose(geometric_median(pts), [0.0, 0.0], atol=1e-6)


class TestMetricMom:
    def test_single_block_is_ols(self):
        data = gaussian_data(120, 4, seed=6)
        res = metric_mom(data, K=1)
        np.testing.assert_allclose(res.beta, ols(data).beta, atol=1e-8)

    def test_identical_blocks_fixed_point(self):
        # Tiling the same rows across blocks makes every per-block estimate
        # equal, so the geometric median is that shared estimate.
        base = gaussian_data(30, 3, sigma=0.0, seed=7)
        X = np.tile(base.X, (4, 1))
        y = np.tile(base.y, 4)
        data = Dataset(X=X, y=y, truth=base.truth)
        res = metric_mom(data, K=4)
        np.testing.assert_allclose(res.beta, base.truth, atol=1e-7)

    def test_resists_response_attack(self):
        spec = GenSpec(n=2000, d=5, sigma=1.0, seed=8)
        data = generate_clean(spec, np.random.default_rng(8))
        data = contaminate(data, 0.01, AttackKind.RESP_HUGE, np.random.default_rng(9))
        res = metric_mom(data, K=40)
        err = np.linalg.norm(res.beta - data.truth)
        err_ols = np.linalg.norm(ols(data).beta - data.truth)
        assert err < 1.0
        assert err_ols > 100.0
