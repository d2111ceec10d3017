"""Brute-force top-K retrieval over fingerprints, scored against exact similarity."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidParameterError
from .similarity import check_comparable, generalized_jaccard
from .sketchers import EMPTY, Fingerprint, sketch_corpus
from .sets import SparseWeightedSet, corpus_max_weight
from .variates import VariateScheme

log = logging.getLogger(__name__)

RETRIEVAL_COLUMNS = ("algorithm", "D", "K", "precision", "map", "wall_ms")


@dataclass
class RetrievalResult:
    query_id: object
    ranked_ids: list
    k: int
    truncated: bool = False
    scores: list = field(default_factory=list, repr=False)


class FingerprintIndex:
    """Database fingerprints stacked into ``(N, D)`` code matrices."""

    def __init__(self, fps: Sequence[Fingerprint]):
        if not fps:
            raise InvalidParameterError("empty fingerprint database")
        first = fps[0]
        for fp in fps[1:]:
            check_comparable(first, fp)
        self.template = first
        self.doc_ids = [fp.doc_id for fp in fps]
        self.K = np.stack([fp.k for fp in fps])
        self.Y = None if first.y is None else np.stack([fp.y for fp in fps])
        self._order_key = np.argsort(np.argsort(np.array(self.doc_ids, dtype=object), kind="stable"), kind="stable")

    def __len__(self):
        return len(self.doc_ids)

    def similarities(self, query: Fingerprint) -> np.ndarray:
        check_comparable(self.template, query)
        hit = (self.K == query.k[None, :]) & (query.k[None, :] != EMPTY)
        if self.Y is not None:
            hit &= self.Y == query.y[None, :]
        return hit.sum(axis=1) / query.D


def topk(query_fp: Fingerprint, db_fps, K: int, *, exclude_self: bool = True) -> RetrievalResult:
    """Rank the database by estimated similarity; ties go to the smaller doc id.

    A database entry with the query's own ``doc_id`` is skipped unless
    ``exclude_self`` is off. ``K`` larger than the database is truncated and
    flagged.
    """
    if K < 1:
        raise InvalidParameterError("K must be >= 1")
    index = db_fps if isinstance(db_fps, FingerprintIndex) else FingerprintIndex(list(db_fps))
    sims = index.similarities(query_fp)
    rows = np.arange(len(index))
    if exclude_self and query_fp.doc_id is not None:
        rows = np.array([i for i in rows if index.doc_ids[i] != query_fp.doc_id], dtype=np.int64)
    order = rows[np.lexsort((index._order_key[rows], -sims[rows]))]
    truncated = K > order.size
    if truncated:
        log.warning("K=%d exceeds database size %d; returning all documents", K, order.size)
    order = order[:K]
    return RetrievalResult(query_fp.doc_id, [index.doc_ids[i] for i in order], K, truncated,
                           [float(sims[i]) for i in order])


def exact_topk(query: SparseWeightedSet, db: Sequence[SparseWeightedSet], K: int, *, exclude_self: bool = True) -> list:
    """Ground-truth top-K doc ids under generalized Jaccard (ties: smaller doc id)."""
    scored = [
        (-generalized_jaccard(query, S), S.doc_id)
        for S in db
        if not (exclude_self and S.doc_id == query.doc_id)
    ]
    scored.sort()
    return [doc_id for _, doc_id in scored[:K]]


def precision_at_k(result: RetrievalResult, ground_truth_topk, k: Optional[int] = None) -> float:
    k = len(ground_truth_topk) if k is None else k
    if k < 1:
        raise InvalidParameterError("k must be >= 1")
    retrieved = set(result.ranked_ids[:k])
    return len(retrieved & set(ground_truth_topk)) / k


def average_precision(ranked: Sequence, relevant, k: int) -> float:
    """AP@k: mean of precision@i over the ranks i <= k holding a relevant item,
    normalised by ``min(k, |relevant|)``."""
    relevant = set(relevant)
    if not relevant:
        return 0.0
    hits = 0
    total = 0.0
    for i, doc in enumerate(ranked[:k], start=1):
        if doc in relevant:
            hits += 1
            total += hits / i
    return total / min(k, len(relevant))


def map_at_k(results: Sequence[RetrievalResult], ground_truths: Sequence, k: Optional[int] = None) -> float:
    if len(results) != len(ground_truths):
        raise InvalidParameterError("results and ground truths differ in length")
    if not results:
        return 0.0
    aps = [
        average_precision(r.ranked_ids, gt, len(gt) if k is None else k)
        for r, gt in zip(results, ground_truths)
    ]
    return math.fsum(aps) / len(aps)


@dataclass(frozen=True)
class RetrievalRow:
    algorithm: str
    D: int
    K: int
    precision: float
    map: float
    wall_ms: float

    def csv_fields(self) -> list[str]:
        return [self.algorithm, str(self.D), str(self.K), repr(self.precision), repr(self.map), f"{self.wall_ms:.3f}"]


def retrieval_experiment(
    queries: Sequence[SparseWeightedSet],
    db: Sequence[SparseWeightedSet],
    algorithm: str,
    D: int,
    k_list: Sequence[int],
    seed: int,
    *,
    scale: Optional[float] = None,
    timing: bool = True,
    ground_truth: Optional[dict] = None,
) -> list[RetrievalRow]:
    """Precision@K and MAP@K of ``algorithm`` for each K in ``k_list``.

    ``ground_truth`` maps query doc id to its exact top-``max(k_list)`` list;
    pass it to share one exact ranking across several algorithms.
    """
    k_max = max(k_list)
    if ground_truth is None:
        ground_truth = exact_ground_truth(queries, db, k_max)
    scheme = VariateScheme(seed, D)
    w_max = max(corpus_max_weight(db), corpus_max_weight(queries))
    t0 = time.perf_counter()
    index = FingerprintIndex(sketch_corpus(db, scheme, algorithm, scale=scale, w_max=w_max))
    q_fps = sketch_corpus(queries, scheme, algorithm, scale=scale, w_max=w_max)
    results = [topk(q, index, k_max) for q in q_fps]
    wall_ms = 1000.0 * (time.perf_counter() - t0) if timing else 0.0
    rows = []
    for K in k_list:
        gts = [ground_truth[q.doc_id][:K] for q in queries]
        prec = math.fsum(precision_at_k(r, gt, K) for r, gt in zip(results, gts)) / len(results)
        rows.append(RetrievalRow(algorithm, D, K, prec, map_at_k(results, gts, K), wall_ms))
    return rows


def exact_ground_truth(queries, db, k_max: int) -> dict:
    return {q.doc_id: exact_topk(q, db, k_max) for q in queries}
