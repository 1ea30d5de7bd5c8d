"""Sparse vectors and the seeded projection."""

import itertools
import math

import numpy as np
import pytest

import hashtrick.projection as projection
from hashtrick.projection import (
    FeatureHasher,
    SparseVector,
    project,
    projected_norm_sq,
)


def _random_vector(rng, nnz, key_space=2**40):
    keys = sorted(rng.choice(key_space, size=nnz, replace=False).tolist())
    values = rng.standard_normal(nnz)
    values[values == 0] = 1.0
    return SparseVector(zip(keys, values))


class TestSparseVector:
    def test_norms_match_numpy(self):
        rng = np.random.default_rng(1)
        for nnz in (1, 2, 17, 200):
            vec = _random_vector(rng, nnz)
            dense = np.array([v for _, v in vec.entries])
            assert vec.nnz == nnz
            assert vec.norm2 == pytest.approx(np.linalg.norm(dense), rel=1e-12)
            assert vec.norm_inf == pytest.approx(np.abs(dense).max(), rel=1e-12)

    def test_empty_vector_is_allowed(self):
        vec = SparseVector([])
        assert vec.nnz == 0 and vec.norm2 == 0.0 and vec.norm_inf == 0.0

    def test_rejects_unsorted_duplicate_and_bad_values(self):
        with pytest.raises(ValueError):
            SparseVector([(2, 1.0), (1, 1.0)])
        with pytest.raises(ValueError):
            SparseVector([(1, 1.0), (1, 2.0)])
        with pytest.raises(ValueError):
            SparseVector([(1, 0.0)])
        with pytest.raises(ValueError):
            SparseVector([(1, float("nan"))])
        with pytest.raises(ValueError):
            SparseVector([(1, float("inf"))])
        with pytest.raises(ValueError):
            SparseVector([(-1, 1.0)])
        with pytest.raises(ValueError):
            SparseVector([(2**64, 1.0)])

    def test_from_pairs_sorts_but_rejects_duplicates(self):
        vec = SparseVector.from_pairs([(5, 1.0), (2, -1.0)])
        assert vec.entries == ((2, -1.0), (5, 1.0))
        with pytest.raises(ValueError):
            SparseVector.from_pairs([(5, 1.0), (5, 2.0)])

    def test_from_text_parses_and_names_bad_lines(self):
        vec = SparseVector.from_text(["# comment", "", "3 1.5", "1 -2.0"])
        assert vec.entries == ((1, -2.0), (3, 1.5))
        with pytest.raises(ValueError, match="line 2"):
            SparseVector.from_text(["1 1.0", "oops"])
        with pytest.raises(ValueError, match="line 1"):
            SparseVector.from_text(["1 notanumber"])


class TestFeatureHasher:
    def test_m_validation(self):
        with pytest.raises(ValueError):
            FeatureHasher(0, lambda k: 0, lambda k: 1)
        with pytest.raises(ValueError):
            FeatureHasher(-4, lambda k: 0, lambda k: 1)

    def test_from_seed_ranges_and_determinism(self):
        hasher = FeatureHasher.from_seed(123, 16)
        again = FeatureHasher.from_seed(123, 16)
        for key in range(500):
            b = hasher.bucket_fn(key)
            s = hasher.sign_fn(key)
            assert 0 <= b < 16
            assert s in (-1, 1)
            assert again.bucket_fn(key) == b
            assert again.sign_fn(key) == s

    def test_bucket_and_sign_draw_from_distinct_tables(self):
        hasher = FeatureHasher.from_seed(9, 8, 3)
        assert not np.array_equal(hasher.bucket_tab.outer, hasher.sign_tab.outer)


def test_two_key_distribution_exhausts_all_sixteen_maps():
    """All (bucket, sign) assignments for k=2, m=2 give norms {0, 1, 2}
    with probabilities 1/4, 1/2, 1/4."""
    value = 1.0 / math.sqrt(2.0)
    x = SparseVector([(0, value), (1, value)])
    outcomes = []
    for b0, b1, s0, s1 in itertools.product((0, 1), (0, 1), (1, -1), (1, -1)):
        hasher = FeatureHasher(2, {0: b0, 1: b1}.__getitem__, {0: s0, 1: s1}.__getitem__)
        outcomes.append(projected_norm_sq(hasher, x))
    assert len(outcomes) == 16
    zeros = sum(1 for v in outcomes if v == pytest.approx(0.0, abs=1e-12))
    ones = sum(1 for v in outcomes if v == pytest.approx(1.0, rel=1e-12))
    twos = sum(1 for v in outcomes if v == pytest.approx(2.0, rel=1e-12))
    assert (zeros, ones, twos) == (4, 8, 4)


def test_projection_places_each_key_in_one_bucket():
    hasher = FeatureHasher.from_seed(5, 32)
    for key in (0, 17, 2**33):
        out = project(hasher, SparseVector([(key, 2.5)]))
        nonzero = np.flatnonzero(out)
        assert len(nonzero) == 1
        assert nonzero[0] == hasher.bucket_fn(key)
        assert out[nonzero[0]] == pytest.approx(hasher.sign_fn(key) * 2.5)


def test_projection_is_linear_over_disjoint_supports():
    rng = np.random.default_rng(7)
    hasher = FeatureHasher.from_seed(21, 64)
    x = _random_vector(rng, 30, key_space=10**6)
    y_keys = sorted(set(range(10**6, 10**6 + 40)))
    y = SparseVector((k, float(rng.standard_normal() + 2.0)) for k in y_keys)
    combined = SparseVector(sorted(x.entries + y.entries))
    assert project(hasher, combined) == pytest.approx(
        project(hasher, x) + project(hasher, y), rel=1e-12, abs=1e-14
    )


def test_projected_norm_sq_matches_materialized_projection():
    rng = np.random.default_rng(3)
    for seed, m, nnz in ((1, 8, 5), (2, 64, 100), (3, 512, 1000)):
        hasher = FeatureHasher.from_seed(seed, m)
        vec = _random_vector(rng, nnz)
        direct = projected_norm_sq(hasher, vec)
        materialized = float((project(hasher, vec) ** 2).sum())
        assert direct == pytest.approx(materialized, rel=1e-12)


def test_compensated_path_agrees_with_plain_path(monkeypatch):
    rng = np.random.default_rng(11)
    hasher = FeatureHasher.from_seed(4, 16)
    vec = _random_vector(rng, 500)
    plain = projected_norm_sq(hasher, vec)
    monkeypatch.setattr(projection, "KAHAN_THRESHOLD", 10)
    compensated = projected_norm_sq(hasher, vec)
    assert compensated == pytest.approx(plain, rel=1e-12)
