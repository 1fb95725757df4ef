"""Tests for block partitioning, block statistics, and pruning."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from specmom.blocks import (
    Dataset,
    block_statistics,
    partition_blocks,
    prune,
)
from specmom.errors import DimensionMismatch, InvalidK, TooFewBlocks
from specmom.linalg import inv_sqrt_psd


def make_data(n, d, seed=0, sigma=1.0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, d))
    beta = rng.standard_normal(d)
    y = X @ beta + sigma * rng.standard_normal(n)
    return Dataset(X=X, y=y, truth=beta)


class TestPartition:
    def test_even_split(self):
        p = partition_blocks(10, 5, np.random.default_rng(0))
        assert p.K == 5 and p.m == 2
        assert p.assignment.shape == (5, 2)
        assert sorted(p.assignment.ravel().tolist()) == list(range(10))

    def test_trailing_discarded(self):
        p = partition_blocks(11, 5, np.random.default_rng(0))
        assert p.m == 2
        used = p.assignment.ravel()
        assert len(used) == 10 and len(set(used.tolist())) == 10

    def test_singleton_blocks(self):
        p = partition_blocks(10, 10, np.random.default_rng(0))
        assert p.m == 1
        assert sorted(p.assignment.ravel().tolist()) == list(range(10))

    def test_k_larger_than_n(self):
        with pytest.raises(InvalidK):
            partition_blocks(5, 6, np.random.default_rng(0))

    def test_k_nonpositive(self):
        with pytest.raises(InvalidK):
            partition_blocks(5, 0, np.random.default_rng(0))

    @given(st.integers(20, 200), st.integers(1, 19), st.integers(0, 100))
    @settings(max_examples=30, deadline=None)
    def test_blocks_disjoint_and_sized(self, n, K, seed):
        p = partition_blocks(n, K, np.random.default_rng(seed))
        flat = p.assignment.ravel()
        assert len(set(flat.tolist())) == K * p.m == flat.size
        assert p.m == n // K


class TestBlockStatistics:
    def test_zero_residuals(self):
        data = make_data(40, 3, sigma=0.0)
        part = partition_blocks(40, 8, np.random.default_rng(1))
        bv = block_statistics(data, data.truth, np.eye(3), part)
        np.testing.assert_allclose(bv.raw, np.zeros((8, 3)), atol=1e-12)

    def test_single_sample_1d(self):
        # One block, one sample: X=2, y=6, beta_c=1 -> residual 4, stat 8.
        data = Dataset(X=np.array([[2.0]]), y=np.array([6.0]), truth=np.array([3.0]))
        part = partition_blocks(1, 1, np.random.default_rng(0))
        bv = block_statistics(data, np.array([1.0]), np.eye(1), part)
        np.testing.assert_allclose(bv.raw, np.array([[8.0]]), atol=1e-14)

    @pytest.mark.parametrize("seed", range(5))
    def test_against_naive_loop(self, seed):
        data = make_data(60, 4, seed=seed)
        part = partition_blocks(60, 6, np.random.default_rng(seed))
        beta_c = np.zeros(4)
        S = inv_sqrt_psd(np.diag([1.0, 2.0, 3.0, 4.0]))
        bv = block_statistics(data, beta_c, S, part).raw
        expect = np.zeros((6, 4))
        for k in range(6):
            for i in part.assignment[k]:
                resid = data.y[i] - beta_c @ data.X[i]
                expect[k] += resid * (S @ data.X[i])
            expect[k] /= part.m
        np.testing.assert_allclose(bv, expect, atol=1e-10)

    def test_compensated_matches_naive(self):
        data = make_data(100, 3, seed=7)
        part = partition_blocks(100, 10, np.random.default_rng(7))
        a = block_statistics(data, np.zeros(3), np.eye(3), part, compensated=True).raw
        b = block_statistics(data, np.zeros(3), np.eye(3), part, compensated=False).raw
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)

    def test_within_block_permutation_invariant(self):
        data = make_data(40, 3, seed=2)
        part = partition_blocks(40, 4, np.random.default_rng(2))
        bv1 = block_statistics(data, np.zeros(3), np.eye(3), part).raw
        part.assignment[:] = part.assignment[:, ::-1]
        bv2 = block_statistics(data, np.zeros(3), np.eye(3), part).raw
        np.testing.assert_allclose(bv1, bv2, atol=1e-12)

    def test_scale_equivariance(self):
        # X -> cX with Sigma -> c^2 Sigma and beta_c -> beta_c / c leaves
        # residuals fixed and the whitened covariates fixed.
        c = 2.0
        data = make_data(30, 3, seed=3)
        part = partition_blocks(30, 3, np.random.default_rng(3))
        beta_c = np.array([0.5, -1.0, 2.0])
        bv1 = block_statistics(data, beta_c, np.eye(3), part).raw
        scaled = Dataset(X=c * data.X, y=data.y, truth=data.truth / c)
        bv2 = block_statistics(scaled, beta_c / c, inv_sqrt_psd(c**2 * np.eye(3)), part).raw
        np.testing.assert_allclose(bv1, bv2, rtol=1e-12)

    def test_dimension_mismatch(self):
        data = make_data(20, 3)
        part = partition_blocks(20, 4, np.random.default_rng(0))
        with pytest.raises(DimensionMismatch):
            block_statistics(data, np.zeros(4), np.eye(3), part)


class TestPrune:
    def test_keeps_smallest_tenths(self):
        # Norms 1..20: keep 18, radius 18.
        raw = np.arange(1.0, 21.0)[:, None] * np.array([[1.0, 0.0]])
        rng = np.random.default_rng(0)
        raw = raw[rng.permutation(20)]
        bv = prune(raw)
        assert len(bv.kept_indices) == 18
        assert bv.radius == pytest.approx(18.0)
        norms = np.linalg.norm(bv.pruned, axis=1)
        assert np.max(norms) == pytest.approx(18.0)

    def test_ties_keep_count(self):
        raw = np.ones((20, 3))
        bv = prune(raw)
        assert len(bv.kept_indices) == 18
        assert bv.radius == pytest.approx(np.sqrt(3.0))

    def test_too_few_blocks(self):
        with pytest.raises(TooFewBlocks):
            prune(np.ones((9, 2)))

    @pytest.mark.parametrize("seed", range(5))
    def test_against_sort_oracle(self, seed):
        rng = np.random.default_rng(seed)
        raw = rng.standard_normal((200, 5))
        bv = prune(raw)
        norms = np.linalg.norm(raw, axis=1)
        kept_norms = np.sort(norms)[:180]
        np.testing.assert_allclose(
            np.sort(np.linalg.norm(bv.pruned, axis=1)), kept_norms, rtol=1e-12
        )
        assert bv.radius == pytest.approx(kept_norms[-1])

    def test_outlier_block_never_kept(self):
        rng = np.random.default_rng(4)
        raw = rng.standard_normal((20, 3))
        raw[7] = 1e9
        bv = prune(raw)
        assert 7 not in bv.kept_indices

    def test_adding_large_block_keeps_set(self):
        # Going from K=20 to K=21 keeps floor(9K/10)=18 either way, so a
        # new block with norm above the radius cannot enter the kept set.
        rng = np.random.default_rng(5)
        raw = rng.standard_normal((20, 3))
        bv1 = prune(raw)
        big = np.full((1, 3), 100.0)
        bv2 = prune(np.vstack([raw, big]))
        assert bv1.kept_indices.tolist() == bv2.kept_indices.tolist()
        assert bv1.radius == pytest.approx(bv2.radius)

    @given(st.integers(0, 500))
    @settings(max_examples=30, deadline=None)
    def test_radius_is_max_kept_norm(self, seed):
        rng = np.random.default_rng(seed)
        raw = rng.standard_normal((30, 4)) * rng.uniform(0.1, 10.0)
        bv = prune(raw)
        norms = np.linalg.norm(bv.pruned, axis=1)
        assert bv.radius == pytest.approx(np.max(norms))
        assert np.all(norms <= bv.radius + 1e-12)
