from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np

from .errors import DomainError, InvalidParameterError


class SparseWeightedSet:
    """A weighted set stored as sorted ``(element_id, weight)`` arrays.

    Zero weights are dropped on construction; negative weights and duplicate
    element ids are rejected. ``doc_id`` and ``label`` are opaque metadata.
    """

    __slots__ = ("ids", "weights", "doc_id", "label")

    def __init__(self, ids, weights, doc_id=0, label=None):
        ids = np.asarray(ids)
        weights = np.asarray(weights, dtype=np.float64)
        if ids.shape != weights.shape or ids.ndim != 1:
            raise InvalidParameterError("ids and weights must be 1-d arrays of equal length")
        if ids.size and ids.min() < 0:
            raise DomainError("element ids must be nonnegative")
        if not np.all(np.isfinite(weights)):
            raise DomainError("weights must be finite")
        if np.any(weights < 0):
            raise DomainError("weights must be nonnegative")
        ids = ids.astype(np.uint64)
        order = np.argsort(ids, kind="stable")
        ids, weights = ids[order], weights[order]
        if ids.size > 1 and np.any(ids[1:] == ids[:-1]):
            raise InvalidParameterError("duplicate element id")
        keep = weights > 0
        self.ids = ids[keep]
        self.weights = weights[keep]
        self.ids.setflags(write=False)
        self.weights.setflags(write=False)
        self.doc_id = doc_id
        self.label = label

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, float], doc_id=0, label=None) -> "SparseWeightedSet":
        items = list(mapping.items())
        ids = np.array([k for k, _ in items], dtype=np.uint64)
        weights = np.array([w for _, w in items], dtype=np.float64)
        return cls(ids, weights, doc_id=doc_id, label=label)

    @classmethod
    def binary(cls, elements: Iterable[int], doc_id=0) -> "SparseWeightedSet":
        elements = sorted(set(elements))
        return cls(np.array(elements, dtype=np.uint64), np.ones(len(elements)), doc_id=doc_id)

    def __len__(self):
        return int(self.ids.size)

    def __bool__(self):
        return self.ids.size > 0

    def __eq__(self, other):
        if not isinstance(other, SparseWeightedSet):
            return NotImplemented
        return np.array_equal(self.ids, other.ids) and np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash((self.ids.tobytes(), self.weights.tobytes()))

    def __repr__(self):
        body = ", ".join(f"{int(k)}: {w:g}" for k, w in zip(self.ids[:6], self.weights[:6]))
        more = ", ..." if len(self) > 6 else ""
        return f"SparseWeightedSet(doc_id={self.doc_id!r}, {{{body}{more}}})"

    def to_dict(self) -> dict[int, float]:
        return {int(k): float(w) for k, w in zip(self.ids, self.weights)}

    def scaled(self, factor: float) -> "SparseWeightedSet":
        return SparseWeightedSet(self.ids, self.weights * factor, doc_id=self.doc_id, label=self.label)

    def max_weight(self) -> float:
        return float(self.weights.max()) if len(self) else 0.0


def corpus_max_weight(corpus: Iterable[SparseWeightedSet]) -> float:
    return max((s.max_weight() for s in corpus), default=0.0)
