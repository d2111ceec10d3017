"""Exact generalized Jaccard, the collision estimator and the MSE harness."""

from __future__ import annotations

import hashlib
import math
import time
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    IncomparableFingerprintsError,
    InvalidParameterError,
    UndefinedSimilarityError,
)
from .sets import SparseWeightedSet, corpus_max_weight
from .sketchers import EMPTY, Fingerprint, algorithm_info, sketch
from .variates import VariateScheme

MAX_D = 1 << 16

MSE_COLUMNS = ("algorithm", "D", "pairs", "trials", "mse", "bias", "wall_ms")


def generalized_jaccard(S: SparseWeightedSet, T: SparseWeightedSet) -> float:
    """``sum_k min(S_k, T_k) / sum_k max(S_k, T_k)`` over the union of supports."""
    if not len(S) and not len(T):
        raise UndefinedSimilarityError("generalized Jaccard of two empty sets is undefined")
    union = np.union1d(S.ids, T.ids)
    s = np.zeros(union.size)
    t = np.zeros(union.size)
    s[np.searchsorted(union, S.ids)] = S.weights
    t[np.searchsorted(union, T.ids)] = T.weights
    return math.fsum(np.minimum(s, t)) / math.fsum(np.maximum(s, t))


def check_comparable(a: Fingerprint, b: Fingerprint) -> None:
    if a.algorithm != b.algorithm:
        raise IncomparableFingerprintsError(f"algorithms differ: {a.algorithm} vs {b.algorithm}")
    if a.D != b.D:
        raise IncomparableFingerprintsError(f"lengths differ: {a.D} vs {b.D}")
    if a.seed != b.seed:
        raise IncomparableFingerprintsError(f"seeds differ: {a.seed} vs {b.seed}")
    if a.param != b.param:
        raise IncomparableFingerprintsError(f"sketch parameters differ: {a.param} vs {b.param}")
    if (a.y is None) != (b.y is None):
        raise IncomparableFingerprintsError("one fingerprint carries y codes and the other does not")


def collisions(a: Fingerprint, b: Fingerprint) -> np.ndarray:
    """Boolean mask of colliding positions. EMPTY codes never collide."""
    check_comparable(a, b)
    hit = (a.k == b.k) & (a.k != EMPTY)
    if a.y is not None:
        hit &= a.y == b.y
    return hit


def estimate_similarity(a: Fingerprint, b: Fingerprint) -> float:
    return int(np.count_nonzero(collisions(a, b))) / a.D


@dataclass(frozen=True)
class PairEstimate:
    exact_j: float
    estimated_j: float
    D: int
    algorithm: str


@dataclass(frozen=True)
class MSERow:
    algorithm: str
    D: int
    pairs: int
    trials: int
    mse: float
    bias: float
    wall_ms: float
    # mean of J(1-J)/D over the sampled pairs; not written to CSV
    ideal_mse: float = float("nan")

    def csv_fields(self) -> list[str]:
        return [self.algorithm, str(self.D), str(self.pairs), str(self.trials),
                repr(self.mse), repr(self.bias), f"{self.wall_ms:.3f}"]


def derive_seed(master: int, *parts: int) -> int:
    """Child seed for trial/sub-experiment ``parts`` of ``master``."""
    h = hashlib.blake2b(digest_size=8, person=b"cwsketch-seed")
    for v in (master, *parts):
        h.update(int(v).to_bytes(8, "little", signed=False))
    return int.from_bytes(h.digest(), "little")


def sample_pairs(n: int, count: int, seed: int) -> list[tuple[int, int]]:
    """``count`` distinct unordered index pairs from ``range(n)``, seeded."""
    total = n * (n - 1) // 2
    if n < 2:
        raise InvalidParameterError("need at least 2 documents to form pairs")
    if count > total:
        raise InvalidParameterError(f"only {total} distinct pairs exist, asked for {count}")
    rng = np.random.default_rng(seed)
    if count * 4 >= total:
        all_pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        order = rng.permutation(total)[:count]
        return [all_pairs[o] for o in order]
    seen: set[tuple[int, int]] = set()
    pairs = []
    while len(pairs) < count:
        i, j = sorted(int(x) for x in rng.choice(n, size=2, replace=False))
        if (i, j) not in seen:
            seen.add((i, j))
            pairs.append((i, j))
    return pairs


def _check_D(D: int) -> int:
    D = int(D)
    if not 1 <= D <= MAX_D:
        raise InvalidParameterError(f"D={D} outside supported range 1..{MAX_D}")
    return D


PairEstimator = Callable[[SparseWeightedSet, SparseWeightedSet, int, int], float]


def mse_sweep(
    dataset: Sequence[SparseWeightedSet],
    algorithm: str,
    d_list: Sequence[int],
    pair_count: int,
    trial_count: int,
    scheme_seed: int,
    *,
    pair_seed: Optional[int] = None,
    scale: Optional[float] = None,
    reuse_prefix: bool = True,
    timing: bool = True,
) -> list[MSERow]:
    """MSE and bias of ``algorithm`` at every ``D`` in ``d_list``.

    Pairs are drawn once (seeded by ``pair_seed``, default ``scheme_seed``);
    every trial re-seeds the variate scheme. With ``reuse_prefix`` the
    fingerprints are computed once at ``max(d_list)`` and truncated, which
    gives the same codes as sketching at each ``D`` separately because
    variates are keyed by sample index.
    """
    algorithm_info(algorithm)
    d_list = [_check_D(D) for D in d_list]
    if trial_count < 1:
        raise InvalidParameterError("trial_count must be >= 1")
    docs = [S for S in dataset if len(S)]
    pairs = sample_pairs(len(docs), pair_count, scheme_seed if pair_seed is None else pair_seed)
    exact = [generalized_jaccard(docs[i], docs[j]) for i, j in pairs]
    w_max = corpus_max_weight(docs)
    needed = sorted({i for p in pairs for i in p})

    def fingerprints(trial: int, D: int) -> dict[int, Fingerprint]:
        scheme = VariateScheme(derive_seed(scheme_seed, trial), D)
        return {i: sketch(docs[i], scheme, algorithm, D, scale=scale, w_max=w_max) for i in needed}

    estimates: dict[int, list[list[float]]] = {D: [] for D in d_list}
    elapsed: dict[int, float] = {D: 0.0 for D in d_list}
    if reuse_prefix:
        top = max(d_list)
        for trial in range(trial_count):
            t0 = time.perf_counter()
            fps = fingerprints(trial, top)
            spent = time.perf_counter() - t0
            for D in d_list:
                pre = {i: fp.prefix(D) for i, fp in fps.items()}
                estimates[D].append([estimate_similarity(pre[i], pre[j]) for i, j in pairs])
                elapsed[D] += spent * D / top
    else:
        for D in d_list:
            for trial in range(trial_count):
                t0 = time.perf_counter()
                fps = fingerprints(trial, D)
                elapsed[D] += time.perf_counter() - t0
                estimates[D].append([estimate_similarity(fps[i], fps[j]) for i, j in pairs])

    rows = []
    for D in d_list:
        rows.append(_summarize(algorithm, D, exact, estimates[D], 1000.0 * elapsed[D] if timing else 0.0))
    return rows


def _summarize(algorithm, D, exact, per_trial, wall_ms) -> MSERow:
    errors = [est - j for trial in per_trial for est, j in zip(trial, exact)]
    n = len(errors)
    mse = math.fsum(e * e for e in errors) / n
    bias = math.fsum(errors) / n
    ideal = math.fsum(j * (1 - j) / D for j in exact) / len(exact)
    return MSERow(algorithm, D, len(exact), len(per_trial), mse, bias, wall_ms, ideal)


def mse_experiment(
    dataset: Sequence[SparseWeightedSet],
    algorithm: str,
    D: int,
    pair_count: int,
    trial_count: int,
    scheme_seed: int,
    *,
    pair_seed: Optional[int] = None,
    scale: Optional[float] = None,
    estimator: Optional[PairEstimator] = None,
    timing: bool = True,
) -> MSERow:
    """One row of the MSE table.

    ``estimator(S, T, D, trial_seed)`` replaces the sketch-and-compare path
    when given; tests use it to plug in estimators with known error.
    """
    D = _check_D(D)
    if estimator is None:
        return mse_sweep(dataset, algorithm, [D], pair_count, trial_count, scheme_seed,
                         pair_seed=pair_seed, scale=scale, timing=timing)[0]
    docs = [S for S in dataset if len(S)]
    pairs = sample_pairs(len(docs), pair_count, scheme_seed if pair_seed is None else pair_seed)
    exact = [generalized_jaccard(docs[i], docs[j]) for i, j in pairs]
    t0 = time.perf_counter()
    per_trial = [
        [estimator(docs[i], docs[j], D, derive_seed(scheme_seed, trial)) for i, j in pairs]
        for trial in range(trial_count)
    ]
    wall_ms = 1000.0 * (time.perf_counter() - t0) if timing else 0.0
    return _summarize(algorithm, D, exact, per_trial, wall_ms)


def pair_estimate(S, T, scheme: VariateScheme, algorithm: str, **params) -> PairEstimate:
    fs = sketch(S, scheme, algorithm, **params)
    ft = sketch(T, scheme, algorithm, **params)
    return PairEstimate(generalized_jaccard(S, T), estimate_similarity(fs, ft), fs.D, algorithm)
