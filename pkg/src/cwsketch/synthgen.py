"""Synthetic weighted-set corpora.

Two families feed the MSE benchmarks: uniformly distributed weights and
Pareto weights. Both pick each document's support uniformly at random without
replacement. A third clustered family gives retrieval tests a ground truth
that only the weights can recover.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import DegenerateInputError, DomainError, InvalidParameterError
from .sets import SparseWeightedSet


@dataclass(frozen=True)
class UniformLaw:
    lo: float
    hi: float


@dataclass(frozen=True)
class PowerLaw:
    exponent: float
    scale: float


@dataclass(frozen=True)
class SynthConfig:
    doc_count: int
    feature_count: int
    density: float
    law: Union[UniformLaw, PowerLaw]
    gen_seed: int = 0

    @property
    def support_size(self) -> int:
        # tolerate representation error in density * feature_count
        return math.ceil(round(self.density * self.feature_count, 9))

    def validate(self) -> None:
        if self.doc_count < 1 or self.feature_count < 1:
            raise InvalidParameterError("doc_count and feature_count must be positive")
        if not 0 < self.density <= 1:
            raise InvalidParameterError(f"density must lie in (0, 1], got {self.density}")
        if self.density * self.feature_count < 1:
            raise DegenerateInputError("density * feature_count < 1 leaves documents empty")
        law = self.law
        if isinstance(law, UniformLaw):
            if law.lo < 0 or law.hi < law.lo or law.hi <= 0:
                raise InvalidParameterError(f"need 0 <= lo <= hi and hi > 0, got [{law.lo}, {law.hi}]")
        elif isinstance(law, PowerLaw):
            if not law.exponent > 1:
                raise DomainError(f"power-law exponent {law.exponent} <= 1 has no finite mean")
            if not law.scale > 0:
                raise InvalidParameterError("power-law scale must be positive")
        else:
            raise InvalidParameterError(f"unknown weight law {law!r}")


# desk-scale default: 200 docs x 5000 features at density 0.05 (250 nonzeros each)
DESK_UNIFORM = SynthConfig(200, 5000, 0.05, UniformLaw(0.0, 1.0), gen_seed=0)


def _doc_rng(gen_seed: int, doc_id: int) -> np.random.Generator:
    return np.random.default_rng([gen_seed, doc_id])


def _support(rng: np.random.Generator, config: SynthConfig) -> np.ndarray:
    return np.sort(rng.choice(config.feature_count, size=config.support_size, replace=False))


def _uniform_weights(rng, n, law: UniformLaw) -> np.ndarray:
    # (lo, hi]: keeps weights positive when lo == 0
    return law.hi - (law.hi - law.lo) * rng.random(n)


def _pareto_weights(rng, n, law: PowerLaw) -> np.ndarray:
    u = 1.0 - rng.random(n)  # (0, 1]
    return law.scale * u ** (-1.0 / law.exponent)


def _generate(config: SynthConfig, weights_fn) -> list[SparseWeightedSet]:
    config.validate()
    docs = []
    for doc_id in range(config.doc_count):
        rng = _doc_rng(config.gen_seed, doc_id)
        ids = _support(rng, config)
        docs.append(SparseWeightedSet(ids, weights_fn(rng, ids.size, config.law), doc_id=doc_id, label=0))
    return docs


def gen_uniform_corpus(config: SynthConfig) -> list[SparseWeightedSet]:
    if not isinstance(config.law, UniformLaw):
        raise InvalidParameterError("gen_uniform_corpus needs a UniformLaw config")
    return _generate(config, _uniform_weights)


def gen_powerlaw_corpus(config: SynthConfig) -> list[SparseWeightedSet]:
    """Pareto(x_min=scale, alpha=exponent) weights by inverse-CDF sampling."""
    if not isinstance(config.law, PowerLaw):
        raise InvalidParameterError("gen_powerlaw_corpus needs a PowerLaw config")
    return _generate(config, _pareto_weights)


def gen_corpus(config: SynthConfig) -> list[SparseWeightedSet]:
    if isinstance(config.law, PowerLaw):
        return gen_powerlaw_corpus(config)
    return gen_uniform_corpus(config)


@dataclass(frozen=True)
class ClusterConfig:
    groups: int = 10
    clusters_per_group: int = 5
    members_per_cluster: int = 10
    support_size: int = 100
    feature_count: int = 5000
    jitter: float = 0.2
    gen_seed: int = 0


def gen_clustered_corpus(config: ClusterConfig, queries: int = 0):
    """Corpus where documents of one group share a support exactly.

    Each cluster has a centre with Uniform(0,1] weights on its group's
    support; members multiply the centre by Uniform[1-jitter, 1+jitter]
    noise. Binary similarity cannot tell clusters of a group apart, so the
    nearest neighbours of a document are only recoverable from its weights.

    Returns ``(db, query_docs)``. Query ``q`` is an extra member of cluster
    ``q % n_clusters``; labels carry the cluster index.
    """
    if not 0 <= config.jitter < 1:
        raise InvalidParameterError("jitter must lie in [0, 1)")
    if config.support_size > config.feature_count:
        raise InvalidParameterError("support_size exceeds feature_count")
    n_clusters = config.groups * config.clusters_per_group
    rng = np.random.default_rng([config.gen_seed, 0xC1])
    supports = [np.sort(rng.choice(config.feature_count, config.support_size, replace=False))
                for _ in range(config.groups)]
    centres = [1.0 - rng.random(config.support_size) for _ in range(n_clusters)]

    def member(cluster: int, doc_id: int, stream: int) -> SparseWeightedSet:
        mrng = np.random.default_rng([config.gen_seed, stream, doc_id])
        noise = mrng.uniform(1.0 - config.jitter, 1.0 + config.jitter, config.support_size)
        ids = supports[cluster // config.clusters_per_group]
        return SparseWeightedSet(ids, centres[cluster] * noise, doc_id=doc_id, label=cluster)

    db = [member(c, c * config.members_per_cluster + m, 1)
          for c in range(n_clusters) for m in range(config.members_per_cluster)]
    base = len(db)
    qs = [member(q % n_clusters, base + q, 2) for q in range(queries)]
    return db, qs


def average_weight_std(corpus: Sequence[SparseWeightedSet]) -> float:
    """Mean over features of the sample std (ddof=1) of that feature's nonzero weights.

    Features with fewer than two nonzero weights are skipped.
    """
    ids = np.concatenate([S.ids for S in corpus]).astype(np.int64)
    w = np.concatenate([S.weights for S in corpus])
    if ids.size == 0:
        return 0.0
    _, inv = np.unique(ids, return_inverse=True)
    count = np.bincount(inv)
    total = np.bincount(inv, weights=w)
    mean = total / count
    sq = np.bincount(inv, weights=(w - mean[inv]) ** 2)
    keep = count >= 2
    if not keep.any():
        return 0.0
    return float(np.mean(np.sqrt(sq[keep] / (count[keep] - 1))))
