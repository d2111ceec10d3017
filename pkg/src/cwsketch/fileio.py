"""Sparse-vector text files and binary fingerprint files.

Sparse text: one document per line, ``label idx:val idx:val ...`` with
1-based indices. Internally ids are 0-based.

Fingerprint files (little-endian)::

    magic "WJS1" | version u16 | algorithm u8 | flags u8 | D u32
    master_seed u64 | param f64 | corpus_digest u64 | count u64
    count x (doc_id u64, D x k u64, [D x y u64 if flags & 1])
    checksum u64 (blake2b-64 of every preceding byte)
"""

from __future__ import annotations

import hashlib
import logging
import os
import struct
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, IncompatibleFormatError, IntegrityError, InvalidParameterError, ParseError
from .sets import SparseWeightedSet
from .sketchers import ALGORITHMS, Fingerprint

log = logging.getLogger(__name__)

MAGIC = b"WJS1"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHBBIQdQQ")
_FLAG_Y = 1
_ALGO_CODES = {name: i for i, name in enumerate(ALGORITHMS)}
_ALGO_NAMES = {i: name for name, i in _ALGO_CODES.items()}


def _parse_label(token: str, lineno: int):
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"bad label {token!r}", lineno) from None


def parse_sparse_line(line: str, lineno: int = 0, doc_id=0) -> SparseWeightedSet:
    tokens = line.split()
    if not tokens:
        return SparseWeightedSet([], [], doc_id=doc_id)
    if ":" in tokens[0]:
        label, feats = None, tokens
    else:
        label, feats = _parse_label(tokens[0], lineno), tokens[1:]
    ids, weights = [], []
    seen = set()
    for tok in feats:
        if tok.startswith("qid:"):
            continue
        idx, sep, val = tok.partition(":")
        if not sep:
            raise ParseError(f"malformed token {tok!r}", lineno)
        try:
            i = int(idx)
            w = float(val)
        except ValueError:
            raise ParseError(f"malformed token {tok!r}", lineno) from None
        if i < 1:
            raise ParseError(f"index {i} is not 1-based", lineno)
        if i in seen:
            raise ParseError(f"duplicate index {i}", lineno)
        if w < 0:
            raise DomainError(f"line {lineno}: negative weight {w} at index {i}")
        if not np.isfinite(w):
            raise ParseError(f"non-finite weight at index {i}", lineno)
        seen.add(i)
        ids.append(i - 1)
        weights.append(w)
    return SparseWeightedSet(np.array(ids, dtype=np.uint64), np.array(weights), doc_id=doc_id, label=label)


def iter_sparse_lines(lines: Iterable[str]):
    """Yield non-empty documents; doc ids count the documents kept."""
    doc_id = 0
    for lineno, line in enumerate(lines, start=1):
        if line.lstrip().startswith("#"):
            continue
        S = parse_sparse_line(line, lineno, doc_id)
        if not len(S):
            log.warning("line %d: empty document skipped", lineno)
            continue
        yield S
        doc_id += 1


def parse_sparse_file(path) -> list[SparseWeightedSet]:
    with open(path, encoding="utf-8") as fh:
        return list(iter_sparse_lines(fh))


def _fmt_label(label) -> str:
    if label is None:
        return "0"
    return repr(label) if isinstance(label, float) else str(label)


def write_sparse_file(path, corpus: Iterable[SparseWeightedSet]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for S in corpus:
            feats = " ".join(f"{int(k) + 1}:{float(w)!r}" for k, w in zip(S.ids, S.weights))
            fh.write(f"{_fmt_label(S.label)} {feats}\n".rstrip(" \n") + "\n")


def corpus_digest(corpus: Iterable[SparseWeightedSet]) -> int:
    """64-bit hash of the (doc_id, support) stream sorted by doc_id."""
    h = hashlib.blake2b(digest_size=8, person=b"cwsketch-corp")
    for S in sorted(corpus, key=lambda s: s.doc_id):
        h.update(int(S.doc_id).to_bytes(8, "little"))
        h.update(len(S).to_bytes(8, "little"))
        h.update(np.ascontiguousarray(S.ids, dtype="<u8").tobytes())
    return int.from_bytes(h.digest(), "little")


@dataclass
class FingerprintFile:
    algorithm: str
    D: int
    master_seed: int
    param: float
    corpus_digest: int
    fingerprints: list = field(default_factory=list)
    version: int = FORMAT_VERSION

    def __eq__(self, other):
        if not isinstance(other, FingerprintFile):
            return NotImplemented
        return (
            (self.algorithm, self.D, self.master_seed, self.param, self.corpus_digest, self.version)
            == (other.algorithm, other.D, other.master_seed, other.param, other.corpus_digest, other.version)
            and len(self.fingerprints) == len(other.fingerprints)
            and all(a == b for a, b in zip(self.fingerprints, other.fingerprints))
        )


def _record_dtype(D: int, has_y: bool) -> np.dtype:
    fields = [("doc_id", "<u8"), ("k", "<u8", (D,))]
    if has_y:
        fields.append(("y", "<u8", (D,)))
    return np.dtype(fields)


def _checksum(data: bytes) -> bytes:
    return hashlib.blake2b(data, digest_size=8, person=b"cwsketch-file").digest()


def write_fingerprints(path, fps: Sequence[Fingerprint], corpus_digest_value: int = 0) -> None:
    if not fps:
        raise InvalidParameterError("no fingerprints to write")
    first = fps[0]
    has_y = first.y is not None
    for fp in fps:
        if (fp.algorithm, fp.D, fp.seed, fp.param, fp.y is not None) != (
            first.algorithm, first.D, first.seed, first.param, has_y
        ):
            raise InvalidParameterError("fingerprints in one file must share algorithm, D, seed and param")
        if not isinstance(fp.doc_id, (int, np.integer)) or fp.doc_id < 0:
            raise InvalidParameterError(f"doc_id {fp.doc_id!r} is not an unsigned integer")
    header = _HEADER.pack(
        MAGIC, FORMAT_VERSION, _ALGO_CODES[first.algorithm], _FLAG_Y if has_y else 0,
        first.D, first.seed, first.param, corpus_digest_value, len(fps),
    )
    records = np.zeros(len(fps), dtype=_record_dtype(first.D, has_y))
    records["doc_id"] = [int(fp.doc_id) for fp in fps]
    records["k"] = np.stack([fp.k for fp in fps])
    if has_y:
        records["y"] = np.stack([fp.y for fp in fps])
    body = header + records.tobytes()
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(body)
        fh.write(_checksum(body))
    os.replace(tmp, path)


def read_fingerprints(path) -> FingerprintFile:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size + 8:
        raise IncompatibleFormatError("file too short to be a fingerprint file")
    magic, version, algo, flags, D, seed, param, digest, count = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise IncompatibleFormatError(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise IncompatibleFormatError(f"format version {version} (this reader handles {FORMAT_VERSION})")
    body, stored = data[:-8], data[-8:]
    if _checksum(body) != stored:
        raise IntegrityError("checksum mismatch: file is corrupt or was modified")
    if algo not in _ALGO_NAMES:
        raise IncompatibleFormatError(f"unknown algorithm code {algo}")
    has_y = bool(flags & _FLAG_Y)
    dtype = _record_dtype(D, has_y)
    payload = body[_HEADER.size:]
    if len(payload) != count * dtype.itemsize:
        raise IntegrityError(f"header declares {count} records, payload holds {len(payload) / dtype.itemsize:g}")
    records = np.frombuffer(payload, dtype=dtype, count=count)
    name = _ALGO_NAMES[algo]
    fps = [
        Fingerprint(name, seed, rec["k"].copy(), rec["y"].copy() if has_y else None, param, int(rec["doc_id"]))
        for rec in records
    ]
    return FingerprintFile(name, D, seed, param, digest, fps, version)
