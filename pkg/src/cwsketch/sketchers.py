"""Weighted Min-Hash samplers.

Eight algorithms share one calling convention: a non-empty
:class:`~cwsketch.sets.SparseWeightedSet`, a :class:`VariateScheme` and an
array of sample indices ``ds``. Each returns the winning element ids and,
where the algorithm produces one, a second 64-bit code component.

Pair-valued CWS algorithms (``i2cws``, ``icws``, ``ccws``) put the IEEE-754
bits of ``y_{k*}`` in the second component. The quantization algorithms
(``wmh``, ``haeupler``) put the subelement index ``j`` there. ``minhash``,
``gollapudi`` and ``li2015`` are index-only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    DegenerateInputError,
    EmptyInputError,
    InvalidParameterError,
    OutOfRangeError,
)
from .sets import SparseWeightedSet, corpus_max_weight
from .variates import TINY_UNIFORM, Role, VariateScheme

__all__ = [
    "ALGORITHMS",
    "EMPTY",
    "CWSDraw",
    "Fingerprint",
    "HashCode",
    "ccws_sample",
    "cws_draw",
    "gollapudi_active",
    "gollapudi_threshold_sample",
    "haeupler_counts",
    "haeupler_sample",
    "i2cws_sample",
    "icws_sample",
    "li2015_sample",
    "minhash_binary_sample",
    "sketch",
    "sketch_corpus",
    "wmh_quantize_sample",
]

# Reserved element id for "no element survived thresholding"; never collides.
EMPTY = np.uint64(0xFFFFFFFFFFFFFFFF)

DEFAULT_SCALE = 10.0

# Upper bound on (rows x sample indices) materialised at once.
_CHUNK_CELLS = 1 << 21


@dataclass(frozen=True)
class HashCode:
    k_star: int
    y_bits: Optional[int] = None

    @property
    def y(self) -> Optional[float]:
        """``y_{k*}`` decoded from its bit pattern (CWS algorithms only)."""
        if self.y_bits is None:
            return None
        return float(np.array([self.y_bits], dtype=np.uint64).view(np.float64)[0])

    @property
    def is_empty(self) -> bool:
        return self.k_star == int(EMPTY)

    def collides(self, other: "HashCode") -> bool:
        if self.is_empty or other.is_empty:
            return False
        return self.k_star == other.k_star and self.y_bits == other.y_bits


class Fingerprint:
    """Length-D vector of hash codes for one set.

    Codes are held column-wise: ``k`` is a uint64 array of winning element
    ids, ``y`` an optional uint64 array of second components. ``param`` is the
    sketch parameter that affects comparability (quantization scale or
    threshold normalizer; 0.0 when the algorithm has none).
    """

    __slots__ = ("algorithm", "seed", "k", "y", "param", "doc_id")

    def __init__(self, algorithm: str, seed: int, k, y=None, param: float = 0.0, doc_id=None):
        self.algorithm = algorithm
        self.seed = int(seed)
        self.k = np.ascontiguousarray(k, dtype=np.uint64)
        self.y = None if y is None else np.ascontiguousarray(y, dtype=np.uint64)
        if self.y is not None and self.y.shape != self.k.shape:
            raise InvalidParameterError("k and y code arrays differ in length")
        self.param = float(param)
        self.doc_id = doc_id

    @property
    def D(self) -> int:
        return int(self.k.size)

    @property
    def codes(self) -> list[HashCode]:
        if self.y is None:
            return [HashCode(int(k)) for k in self.k]
        return [HashCode(int(k), int(y)) for k, y in zip(self.k, self.y)]

    def prefix(self, D: int) -> "Fingerprint":
        """The first ``D`` codes; equal to sketching with ``D`` directly."""
        if not 1 <= D <= self.D:
            raise OutOfRangeError(f"prefix length {D} outside 1..{self.D}")
        y = None if self.y is None else self.y[:D]
        return Fingerprint(self.algorithm, self.seed, self.k[:D], y, self.param, self.doc_id)

    def __len__(self):
        return self.D

    def __eq__(self, other):
        if not isinstance(other, Fingerprint):
            return NotImplemented
        same_y = (self.y is None and other.y is None) or (
            self.y is not None and other.y is not None and np.array_equal(self.y, other.y)
        )
        return (
            self.algorithm == other.algorithm
            and self.seed == other.seed
            and self.param == other.param
            and self.doc_id == other.doc_id
            and np.array_equal(self.k, other.k)
            and same_y
        )

    def __repr__(self):
        return f"Fingerprint({self.algorithm!r}, D={self.D}, seed={self.seed}, doc_id={self.doc_id!r})"


def _require(S: SparseWeightedSet):
    if not len(S):
        raise EmptyInputError("cannot sample from an empty weighted set")


def _ds(ds) -> np.ndarray:
    return np.atleast_1d(np.asarray(ds, dtype=np.int64))


def _pick(matrix: np.ndarray, idx: np.ndarray) -> np.ndarray:
    return matrix[idx, np.arange(matrix.shape[1])]


def _argmin_rows(values: np.ndarray) -> np.ndarray:
    # np.argmin returns the first minimum; ids are sorted, so ties go to the
    # smallest element id
    return np.argmin(values, axis=0)


@dataclass
class CWSDraw:
    """Intermediate values of one CWS sampling pass over sample indices ``ds``.

    ``ln_a`` and ``ln_z`` have one row per element of the set. ``y`` holds
    ``y_{k*}`` for the winner of each column only.
    """

    winner: np.ndarray
    k: np.ndarray
    y: np.ndarray
    ln_a: np.ndarray
    ln_z: np.ndarray


def _i2cws(S: SparseWeightedSet, scheme: VariateScheme, ds: np.ndarray) -> CWSDraw:
    ids, w = S.ids, S.weights
    e, d = ids[:, None], ds[None, :]
    ln_s = np.log(w)[:, None]
    r2 = scheme.gamma(e, d, Role.R2)
    b2 = scheme.uniform(e, d, Role.BETA2)
    c = scheme.gamma(e, d, Role.C)
    t2 = np.floor(ln_s / r2 + b2)
    ln_z = r2 * (t2 - b2 + 1.0)
    ln_a = np.log(c) - ln_z
    winner = _argmin_rows(ln_a)
    # y is only needed for the winner of each column
    k = ids[winner]
    s_k = w[winner]
    r1 = scheme.gamma(k, ds, Role.R1)
    b1 = scheme.uniform(k, ds, Role.BETA1)
    t1 = np.floor(np.log(s_k) / r1 + b1)
    y = np.minimum(np.exp(r1 * (t1 - b1)), s_k)
    return CWSDraw(winner, k, y, ln_a, ln_z)


def _icws(S: SparseWeightedSet, scheme: VariateScheme, ds: np.ndarray) -> CWSDraw:
    ids, w = S.ids, S.weights
    e, d = ids[:, None], ds[None, :]
    ln_s = np.log(w)[:, None]
    r = scheme.gamma(e, d, Role.R1)
    b = scheme.uniform(e, d, Role.BETA1)
    c = scheme.gamma(e, d, Role.C)
    t = np.floor(ln_s / r + b)
    ln_y = r * (t - b)
    ln_z = ln_y + r
    ln_a = np.log(c) - ln_z
    winner = _argmin_rows(ln_a)
    y = np.minimum(np.exp(_pick(ln_y, winner)), w[winner])
    return CWSDraw(winner, ids[winner], y, ln_a, ln_z)


def _ccws(S: SparseWeightedSet, scheme: VariateScheme, ds: np.ndarray) -> CWSDraw:
    ids, w = S.ids, S.weights
    e, d = ids[:, None], ds[None, :]
    s = w[:, None]
    r = scheme.gamma(e, d, Role.R1)
    b = scheme.uniform(e, d, Role.BETA1)
    c = scheme.gamma(e, d, Role.C)
    t = np.floor(s / r + b)
    y_raw = r * (t - b)
    # t == 0 puts the active index at or below zero; pin it just above zero
    y_pos = np.where(y_raw > 0.0, y_raw, TINY_UNIFORM)
    z = y_pos + r
    ln_z = np.log(z)
    ln_a = np.log(c) - ln_z
    winner = _argmin_rows(ln_a)
    y = np.minimum(_pick(y_pos, winner), w[winner])
    return CWSDraw(winner, ids[winner], y, ln_a, ln_z)


_CWS_IMPL = {"i2cws": _i2cws, "icws": _icws, "ccws": _ccws}


def cws_draw(S: SparseWeightedSet, scheme: VariateScheme, algorithm: str, ds) -> CWSDraw:
    """Run one of the pair-valued CWS samplers and keep its intermediates."""
    _require(S)
    try:
        impl = _CWS_IMPL[algorithm]
    except KeyError:
        raise InvalidParameterError(f"{algorithm!r} is not a pair-valued CWS algorithm") from None
    return impl(S, scheme, _ds(ds))


def _y_bits(y: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(y, dtype=np.float64).view(np.uint64)


def _codes_i2cws(S, scheme, ds, param):
    draw = _i2cws(S, scheme, ds)
    return draw.k, _y_bits(draw.y)


def _codes_icws(S, scheme, ds, param):
    draw = _icws(S, scheme, ds)
    return draw.k, _y_bits(draw.y)


def _codes_li2015(S, scheme, ds, param):
    return _icws(S, scheme, ds).k, None


def _codes_ccws(S, scheme, ds, param):
    draw = _ccws(S, scheme, ds)
    return draw.k, _y_bits(draw.y)


def _codes_minhash(S, scheme, ds, param):
    u = scheme.uniform(S.ids[:, None], ds[None, :], Role.U)
    return S.ids[_argmin_rows(u)], None


def _check_wmax(S: SparseWeightedSet, w_max) -> float:
    if w_max is None:
        raise InvalidParameterError("gollapudi needs w_max (corpus-wide maximum weight)")
    w_max = float(w_max)
    if not w_max > 0:
        raise InvalidParameterError(f"w_max must be positive, got {w_max}")
    if S.max_weight() > w_max * (1.0 + 1e-12):
        raise InvalidParameterError(f"w_max={w_max} is below the set's maximum weight {S.max_weight()}")
    return w_max


def gollapudi_active(S: SparseWeightedSet, scheme: VariateScheme, ds, w_max: float) -> np.ndarray:
    """Boolean (elements x ds) matrix of elements surviving random thresholding."""
    _require(S)
    w_max = _check_wmax(S, w_max)
    ds = _ds(ds)
    u = scheme.uniform(S.ids[:, None], ds[None, :], Role.U)
    return u <= (S.weights / w_max)[:, None]


def _codes_gollapudi(S, scheme, ds, w_max):
    active = gollapudi_active(S, scheme, ds, w_max)
    rank = scheme.uniform(S.ids[:, None], ds[None, :], Role.V)
    rank = np.where(active, rank, np.inf)
    k = S.ids[_argmin_rows(rank)]
    return np.where(active.any(axis=0), k, EMPTY), None


def _check_scale(scale) -> float:
    scale = float(scale)
    if not scale > 0:
        raise InvalidParameterError(f"quantization scale must be positive, got {scale}")
    return scale


def _subelements(ids: np.ndarray, counts: np.ndarray):
    """Expand element ids into (element, j) pairs with j = 1..count."""
    counts = counts.astype(np.int64)
    total = int(counts.sum())
    elem = np.repeat(ids, counts)
    owner = np.repeat(np.arange(ids.size), counts)
    starts = np.cumsum(counts) - counts
    j = np.arange(total) - np.repeat(starts, counts) + 1
    return elem, owner, j.astype(np.uint64)


def _codes_wmh(S, scheme, ds, scale):
    scale = _check_scale(scale)
    counts = np.floor(scale * S.weights)
    if not counts.any():
        raise DegenerateInputError(f"every weight rounds to zero subelements at scale {scale}")
    elem, _, j = _subelements(S.ids, counts)
    u = scheme.uniform(elem[:, None], ds[None, :], Role.U, sub=j[:, None])
    win = _argmin_rows(u)
    return elem[win], j[win]


def haeupler_counts(S: SparseWeightedSet, scheme: VariateScheme, ds, scale: float = DEFAULT_SCALE) -> np.ndarray:
    """Subelement count of every element at every sample index.

    ``floor(scale * S_k)`` plus one more with probability equal to the
    fractional part, decided per ``(k, d)``.
    """
    _require(S)
    scale = _check_scale(scale)
    ds = _ds(ds)
    x = scale * S.weights
    base = np.floor(x)
    frac = (x - base)[:, None]
    extra = scheme.uniform(S.ids[:, None], ds[None, :], Role.V) < frac
    return base[:, None] + extra


def _codes_haeupler(S, scheme, ds, scale):
    scale = _check_scale(scale)
    x = scale * S.weights
    base = np.floor(x)
    has_frac = x > base
    candidates = base + has_frac
    if not candidates.any():
        raise DegenerateInputError(f"every weight rounds to zero subelements at scale {scale}")
    elem, owner, j = _subelements(S.ids, candidates)
    u = scheme.uniform(elem[:, None], ds[None, :], Role.U, sub=j[:, None])
    frac = (x - base)[owner]
    is_extra = j.astype(np.float64) > base[owner]
    if is_extra.any():
        rows = np.flatnonzero(is_extra)
        keep = scheme.uniform(elem[rows][:, None], ds[None, :], Role.V) < frac[rows][:, None]
        u[rows] = np.where(keep, u[rows], np.inf)
    win = _argmin_rows(u)
    if np.isinf(_pick(u, win)).any():
        raise DegenerateInputError("no subelement survived probabilistic inclusion")
    return elem[win], j[win]


@dataclass(frozen=True)
class AlgorithmInfo:
    name: str
    codes: Callable
    pair_valued: bool
    param_kind: Optional[str] = None


ALGORITHMS: dict[str, AlgorithmInfo] = {
    info.name: info
    for info in [
        AlgorithmInfo("minhash", _codes_minhash, False),
        AlgorithmInfo("wmh", _codes_wmh, False, "scale"),
        AlgorithmInfo("haeupler", _codes_haeupler, False, "scale"),
        AlgorithmInfo("gollapudi", _codes_gollapudi, False, "w_max"),
        AlgorithmInfo("icws", _codes_icws, True),
        AlgorithmInfo("li2015", _codes_li2015, False),
        AlgorithmInfo("ccws", _codes_ccws, True),
        AlgorithmInfo("i2cws", _codes_i2cws, True),
    ]
}


def algorithm_info(name: str) -> AlgorithmInfo:
    try:
        return ALGORITHMS[name]
    except KeyError:
        raise InvalidParameterError(f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHMS)}") from None


def _single(algorithm, S, scheme, d, param=None) -> HashCode:
    _require(S)
    k, y = ALGORITHMS[algorithm].codes(S, scheme, _ds([d]), param)
    return HashCode(int(k[0]), None if y is None else int(y[0]))


def i2cws_sample(S: SparseWeightedSet, scheme: VariateScheme, d: int) -> HashCode:
    return _single("i2cws", S, scheme, d)


def icws_sample(S: SparseWeightedSet, scheme: VariateScheme, d: int) -> HashCode:
    return _single("icws", S, scheme, d)


def li2015_sample(S: SparseWeightedSet, scheme: VariateScheme, d: int) -> HashCode:
    """ICWS with the ``y`` component dropped ("0-bit" CWS)."""
    return _single("li2015", S, scheme, d)


def ccws_sample(S: SparseWeightedSet, scheme: VariateScheme, d: int) -> HashCode:
    return _single("ccws", S, scheme, d)


def minhash_binary_sample(S: SparseWeightedSet, scheme: VariateScheme, d: int) -> HashCode:
    return _single("minhash", S, scheme, d)


def wmh_quantize_sample(S: SparseWeightedSet, scheme: VariateScheme, d: int, scale: float = DEFAULT_SCALE) -> HashCode:
    return _single("wmh", S, scheme, d, scale)


def haeupler_sample(S: SparseWeightedSet, scheme: VariateScheme, d: int, scale: float = DEFAULT_SCALE) -> HashCode:
    return _single("haeupler", S, scheme, d, scale)


def gollapudi_threshold_sample(S: SparseWeightedSet, scheme: VariateScheme, d: int, w_max: float) -> HashCode:
    return _single("gollapudi", S, scheme, d, w_max)


def _param_for(info: AlgorithmInfo, scale, w_max) -> float:
    if info.param_kind == "scale":
        return _check_scale(DEFAULT_SCALE if scale is None else scale)
    if info.param_kind == "w_max":
        if w_max is None:
            raise InvalidParameterError("gollapudi needs w_max (corpus-wide maximum weight)")
        return float(w_max)
    return 0.0


def sketch(
    S: SparseWeightedSet,
    scheme: VariateScheme,
    algorithm: str,
    D: Optional[int] = None,
    *,
    scale: Optional[float] = None,
    w_max: Optional[float] = None,
) -> Fingerprint:
    """Fingerprint ``S`` with ``D`` samples (default: ``scheme.D``)."""
    info = algorithm_info(algorithm)
    D = scheme.D if D is None else int(D)
    if D < 1:
        raise InvalidParameterError(f"D must be >= 1, got {D}")
    if D > scheme.D:
        raise OutOfRangeError(f"D={D} exceeds the scheme's sample count {scheme.D}")
    _require(S)
    param = _param_for(info, scale, w_max)

    rows = len(S)
    if info.param_kind == "scale":
        rows = max(rows, int(np.sum(np.floor(param * S.weights) + 1)))
    step = max(1, _CHUNK_CELLS // max(rows, 1))
    ks, ys = [], []
    for start in range(0, D, step):
        ds = np.arange(start, min(D, start + step), dtype=np.int64)
        k, y = info.codes(S, scheme, ds, param)
        ks.append(k)
        ys.append(y)
    k = np.concatenate(ks)
    y = None if ys[0] is None else np.concatenate(ys)
    return Fingerprint(algorithm, scheme.master_seed, k, y, param=param, doc_id=S.doc_id)


def sketch_corpus(
    corpus: Sequence[SparseWeightedSet],
    scheme: VariateScheme,
    algorithm: str,
    D: Optional[int] = None,
    *,
    scale: Optional[float] = None,
    w_max: Optional[float] = None,
) -> list[Fingerprint]:
    """Sketch every document; ``gollapudi`` takes ``w_max`` from the corpus if not given."""
    info = algorithm_info(algorithm)
    if info.param_kind == "w_max" and w_max is None:
        w_max = corpus_max_weight(corpus)
    return [sketch(S, scheme, algorithm, D, scale=scale, w_max=w_max) for S in corpus]
