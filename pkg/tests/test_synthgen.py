import numpy as np
import pytest

from cwsketch.errors import DegenerateInputError, DomainError, InvalidParameterError
from cwsketch.synthgen import (
    ClusterConfig,
    PowerLaw,
    SynthConfig,
    UniformLaw,
    average_weight_std,
    gen_clustered_corpus,
    gen_corpus,
    gen_powerlaw_corpus,
    gen_uniform_corpus,
)

FULL_SHAPE = dict(doc_count=1000, feature_count=100000, density=0.005)


@pytest.fixture(scope="module")
def uniform_full():
    return gen_uniform_corpus(SynthConfig(**FULL_SHAPE, law=UniformLaw(0.0, 1.0), gen_seed=1))


@pytest.fixture(scope="module")
def pareto_full():
    return gen_powerlaw_corpus(SynthConfig(**FULL_SHAPE, law=PowerLaw(3.0, 1.0), gen_seed=1))


def test_full_shape_support(uniform_full):
    assert len(uniform_full) == 1000
    assert all(len(S) == 500 for S in uniform_full)
    assert all(S.ids.max() < 100000 for S in uniform_full)


def test_uniform_weight_range(uniform_full):
    w = np.concatenate([S.weights for S in uniform_full])
    assert w.min() > 0 and w.max() <= 1.0


def test_uniform_std_near_reference(uniform_full):
    assert average_weight_std(uniform_full) == pytest.approx(0.2637, rel=0.20)


def test_powerlaw_std_near_reference(pareto_full):
    assert average_weight_std(pareto_full) == pytest.approx(0.5189, rel=0.25)


def test_powerlaw_weights_at_least_scale(pareto_full):
    assert min(S.weights.min() for S in pareto_full) >= 1.0


def test_constant_weights_when_lo_equals_hi():
    corpus = gen_uniform_corpus(SynthConfig(5, 100, 0.1, UniformLaw(0.7, 0.7)))
    assert all(np.all(S.weights == 0.7) for S in corpus)


def test_huge_exponent_collapses_to_scale():
    corpus = gen_powerlaw_corpus(SynthConfig(5, 100, 0.1, PowerLaw(1e12, 2.5)))
    w = np.concatenate([S.weights for S in corpus])
    assert np.allclose(w, 2.5, rtol=1e-9)


@pytest.mark.parametrize("exponent", [1.0, 0.5])
def test_exponent_without_mean(exponent):
    with pytest.raises(DomainError):
        gen_powerlaw_corpus(SynthConfig(5, 100, 0.1, PowerLaw(exponent, 1.0)))


def test_density_too_low():
    with pytest.raises(DegenerateInputError):
        gen_uniform_corpus(SynthConfig(5, 100, 0.001, UniformLaw(0.0, 1.0)))


@pytest.mark.parametrize("law", [UniformLaw(-1.0, 1.0), UniformLaw(2.0, 1.0), PowerLaw(2.0, 0.0)])
def test_invalid_laws(law):
    with pytest.raises(InvalidParameterError):
        gen_corpus(SynthConfig(5, 100, 0.1, law))


def test_wrong_generator_for_law():
    with pytest.raises(InvalidParameterError):
        gen_uniform_corpus(SynthConfig(5, 100, 0.1, PowerLaw(2.0, 1.0)))


@pytest.mark.parametrize("law", [UniformLaw(0.0, 1.0), PowerLaw(2.0, 1.0)])
def test_reproducible(law):
    config = SynthConfig(20, 1000, 0.02, law, gen_seed=9)
    a, b = gen_corpus(config), gen_corpus(config)
    assert all(np.array_equal(x.ids, y.ids) and np.array_equal(x.weights, y.weights) for x, y in zip(a, b))
    other = gen_corpus(SynthConfig(20, 1000, 0.02, law, gen_seed=10))
    assert not np.array_equal(a[0].weights, other[0].weights)


def test_support_size_rounding():
    assert SynthConfig(1, 100000, 0.005, UniformLaw(0, 1)).support_size == 500
    assert SynthConfig(1, 10, 0.15, UniformLaw(0, 1)).support_size == 2


class TestClustered:
    def test_shapes_and_labels(self):
        db, queries = gen_clustered_corpus(ClusterConfig(), queries=20)
        assert len(db) == 500 and len(queries) == 20
        assert [S.doc_id for S in db] == list(range(500))
        assert [q.doc_id for q in queries] == list(range(500, 520))
        assert queries[3].label == 3

    def test_group_shares_support(self):
        db, _ = gen_clustered_corpus(ClusterConfig())
        # clusters 0..4 are one group
        assert np.array_equal(db[0].ids, db[49].ids)
        assert not np.array_equal(db[0].ids, db[50].ids)

    def test_weight_spread(self):
        db, _ = gen_clustered_corpus(ClusterConfig())
        assert average_weight_std(db) >= 0.25

    def test_bad_jitter(self):
        with pytest.raises(InvalidParameterError):
            gen_clustered_corpus(ClusterConfig(jitter=1.0))


def test_average_weight_std_oracle():
    from cwsketch.sets import SparseWeightedSet

    corpus = [
        SparseWeightedSet([0, 1], [1.0, 5.0]),
        SparseWeightedSet([0, 2], [3.0, 1.0]),
        SparseWeightedSet([0], [2.0]),
    ]
    # feature 0 holds {1, 3, 2}: sample std 1; features 1 and 2 have one value each
    assert average_weight_std(corpus) == pytest.approx(1.0)
