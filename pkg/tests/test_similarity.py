import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cwsketch.errors import IncomparableFingerprintsError, InvalidParameterError, UndefinedSimilarityError
from cwsketch.sets import SparseWeightedSet
from cwsketch.similarity import (
    derive_seed,
    estimate_similarity,
    generalized_jaccard,
    mse_experiment,
    mse_sweep,
    pair_estimate,
    sample_pairs,
    _summarize,
)
from cwsketch.sketchers import Fingerprint
from cwsketch.synthgen import SynthConfig, UniformLaw, gen_uniform_corpus
from cwsketch.variates import VariateScheme

W = SparseWeightedSet.from_mapping

weighted_sets = st.dictionaries(st.integers(0, 50), st.floats(1e-3, 1e3), min_size=1, max_size=15).map(W)


@pytest.fixture(scope="module")
def small_corpus():
    return gen_uniform_corpus(SynthConfig(30, 400, 0.1, UniformLaw(0.0, 1.0), gen_seed=5))


class TestGeneralizedJaccard:
    def test_worked_example(self):
        assert generalized_jaccard(W({1: 2, 2: 1}), W({1: 1, 2: 3})) == pytest.approx(0.4)

    def test_disjoint(self):
        assert generalized_jaccard(W({1: 1.0}), W({2: 1.0})) == 0.0

    def test_one_side_empty(self):
        assert generalized_jaccard(W({}), W({2: 1.0})) == 0.0

    def test_both_empty(self):
        with pytest.raises(UndefinedSimilarityError):
            generalized_jaccard(W({}), W({}))

    @settings(max_examples=100)
    @given(S=weighted_sets, T=weighted_sets)
    def test_symmetric_and_bounded(self, S, T):
        j = generalized_jaccard(S, T)
        assert j == generalized_jaccard(T, S)
        assert 0.0 <= j <= 1.0

    @settings(max_examples=100)
    @given(S=weighted_sets)
    def test_self_similarity_exactly_one(self, S):
        assert generalized_jaccard(S, S) == 1.0

    @settings(max_examples=100)
    @given(a=st.sets(st.integers(0, 40), min_size=1), b=st.sets(st.integers(0, 40), min_size=1))
    def test_binary_reduces_to_set_jaccard(self, a, b):
        j = generalized_jaccard(SparseWeightedSet.binary(a), SparseWeightedSet.binary(b))
        assert j == len(a & b) / len(a | b)


class TestEstimate:
    def fp(self, k, y=None, **kw):
        args = dict(algorithm="icws", seed=1, param=0.0)
        args.update(kw)
        return Fingerprint(args["algorithm"], args["seed"], k, y, args["param"])

    def test_identical(self):
        a = self.fp([1, 2, 3, 4], [5, 6, 7, 8])
        assert estimate_similarity(a, a) == 1.0

    def test_no_collisions(self):
        assert estimate_similarity(self.fp([1, 2, 3, 4], [0] * 4), self.fp([5, 6, 7, 8], [0] * 4)) == 0.0

    def test_two_of_four(self):
        a = self.fp([1, 2, 3, 4], [9, 9, 9, 9])
        b = self.fp([1, 2, 3, 5], [9, 9, 8, 9])
        assert estimate_similarity(a, b) == 0.5
        assert estimate_similarity(b, a) == 0.5

    @pytest.mark.parametrize(
        "other",
        [
            dict(algorithm="ccws"),
            dict(seed=2),
            dict(param=10.0),
        ],
    )
    def test_incomparable(self, other):
        with pytest.raises(IncomparableFingerprintsError):
            estimate_similarity(self.fp([1, 2], [3, 4]), self.fp([1, 2], [3, 4], **other))

    def test_length_mismatch(self):
        with pytest.raises(IncomparableFingerprintsError):
            estimate_similarity(self.fp([1, 2], [3, 4]), self.fp([1], [3]))

    def test_y_presence_mismatch(self):
        with pytest.raises(IncomparableFingerprintsError):
            estimate_similarity(self.fp([1, 2], [3, 4]), self.fp([1, 2]))


def test_per_pair_unbiased_icws():
    # pairs with sizeable overlap, so the bound is informative
    rng = np.random.default_rng(3)
    D, trials = 64, 200
    for _ in range(3):
        ids = np.arange(20)
        S = SparseWeightedSet(ids, rng.uniform(0.1, 1.0, 20))
        T = SparseWeightedSet(ids, rng.uniform(0.1, 1.0, 20))
        j = generalized_jaccard(S, T)
        est = [pair_estimate(S, T, VariateScheme(derive_seed(3, t), D), "icws").estimated_j for t in range(trials)]
        assert abs(np.mean(est) - j) <= 3 * math.sqrt(j * (1 - j) / (D * trials))


class TestMSE:
    def test_perfect_estimator_has_zero_mse(self, small_corpus):
        row = mse_experiment(small_corpus, "i2cws", 64, 20, 3, 1,
                             estimator=lambda S, T, D, seed: generalized_jaccard(S, T))
        assert row.mse == 0.0 and row.bias == 0.0

    def test_binomial_model_matches_bernoulli_variance(self, small_corpus):
        D = 64

        def binomial(S, T, D, seed):
            j = generalized_jaccard(S, T)
            return np.random.default_rng([seed, S.doc_id, T.doc_id]).binomial(D, j) / D

        row = mse_experiment(small_corpus, "model", D, 50, 200, 2, estimator=binomial)
        assert row.mse == pytest.approx(row.ideal_mse, rel=0.1)
        assert abs(row.bias) < 3 * math.sqrt(row.ideal_mse / (50 * 200))

    def test_more_samples_lower_mse(self, small_corpus):
        rows = mse_sweep(small_corpus, "i2cws", [32, 512], 20, 3, 4, timing=False)
        assert rows[1].mse < rows[0].mse

    def test_prefix_reuse_matches_fresh_sketches(self, small_corpus):
        kw = dict(timing=False)
        a = mse_sweep(small_corpus, "icws", [16, 48], 10, 2, 5, reuse_prefix=True, **kw)
        b = mse_sweep(small_corpus, "icws", [16, 48], 10, 2, 5, reuse_prefix=False, **kw)
        assert [(r.mse, r.bias) for r in a] == [(r.mse, r.bias) for r in b]

    @pytest.mark.parametrize("D", [0, -3, 1 << 17])
    def test_d_out_of_range(self, small_corpus, D):
        with pytest.raises(InvalidParameterError):
            mse_experiment(small_corpus, "i2cws", D, 5, 1, 0)

    def test_reduction_order_free(self):
        rng = random.Random(0)
        exact = [rng.random() for _ in range(200)]
        trials = [[j + rng.gauss(0, 0.1) for j in exact] for _ in range(3)]
        shuffled = list(zip(*trials, exact))
        rng.shuffle(shuffled)
        a = _summarize("x", 8, exact, trials, 0.0)
        b = _summarize("x", 8, [s[-1] for s in shuffled], [[s[t] for s in shuffled] for t in range(3)], 0.0)
        assert (a.mse, a.bias) == (b.mse, b.bias)

    def test_csv_fields(self):
        row = _summarize("i2cws", 32, [0.5], [[0.25]], 1.23456)
        assert row.csv_fields() == ["i2cws", "32", "1", "1", "0.0625", "-0.25", "1.235"]


class TestPairs:
    def test_seeded(self):
        assert sample_pairs(50, 20, 7) == sample_pairs(50, 20, 7)

    def test_distinct_and_ordered(self):
        pairs = sample_pairs(10, 45, 1)
        assert len(set(pairs)) == 45 and all(i < j for i, j in pairs)

    def test_too_many(self):
        with pytest.raises(InvalidParameterError):
            sample_pairs(4, 7, 0)


def test_derive_seed_distinct():
    assert len({derive_seed(1, t) for t in range(100)}) == 100
