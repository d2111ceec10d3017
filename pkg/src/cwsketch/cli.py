"""Command-line entry point: ``cwsketch <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from contextlib import contextmanager
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .errors import CWSError
from .fileio import corpus_digest, parse_sparse_file, read_fingerprints, write_fingerprints, write_sparse_file
from .retrieval import RETRIEVAL_COLUMNS, exact_ground_truth, retrieval_experiment
from .similarity import MSE_COLUMNS, estimate_similarity, generalized_jaccard, mse_sweep
from .sketchers import ALGORITHMS, sketch_corpus
from .synthgen import (
    DESK_UNIFORM,
    ClusterConfig,
    PowerLaw,
    SynthConfig,
    UniformLaw,
    gen_clustered_corpus,
    gen_corpus,
)
from .variates import VariateScheme

log = logging.getLogger("cwsketch")

U64_MAX = (1 << 64) - 1


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value <= U64_MAX:
        raise argparse.ArgumentTypeError(f"{text} is not an unsigned 64-bit integer")
    return value


def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("list must hold positive integers")
    return values


def _algo_list(text: str) -> list[str]:
    if text == "all":
        return list(ALGORITHMS)
    names = [v.strip() for v in text.split(",") if v.strip()]
    unknown = [n for n in names if n not in ALGORITHMS]
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown algorithm(s) {', '.join(unknown)}; choose from {', '.join(ALGORITHMS)}")
    return names


def _pair(text: str) -> tuple[int, int]:
    a, sep, b = text.partition(":")
    try:
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"pair must look like I:J, got {text!r}") from None


@contextmanager
def _output(path: Optional[str]):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def _write_csv(path, comment: str, columns, rows) -> None:
    with _output(path) as fh:
        fh.write(f"# {comment}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow(row.csv_fields())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cwsketch", description="Weighted Min-Hash / consistent weighted sampling toolkit.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a synthetic corpus in sparse text format")
    g.add_argument("--kind", choices=["uniform", "powerlaw", "clustered"], default="uniform")
    g.add_argument("--docs", type=int, default=DESK_UNIFORM.doc_count)
    g.add_argument("--features", type=int, default=DESK_UNIFORM.feature_count)
    g.add_argument("--density", type=float, default=DESK_UNIFORM.density)
    g.add_argument("--lo", type=float, default=0.0)
    g.add_argument("--hi", type=float, default=1.0)
    g.add_argument("--exponent", type=float, default=3.0)
    g.add_argument("--scale", type=float, default=1.0)
    g.add_argument("--queries", type=int, default=20, help="clustered only: extra query docs")
    g.add_argument("--queries-out", help="clustered only: where to write the query docs")
    g.add_argument("--gen-seed", type=_u64, default=0)
    g.add_argument("--out", required=True)

    s = sub.add_parser("sketch", help="fingerprint every document of a sparse file")
    s.add_argument("input")
    s.add_argument("--algo", required=True, choices=list(ALGORITHMS))
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--seed", type=_u64, required=True)
    s.add_argument("--scale", type=float, default=None, help="quantization scale for wmh/haeupler (default 10)")
    s.add_argument("--w-max", type=float, default=None, help="gollapudi threshold normalizer (default: corpus max)")
    s.add_argument("--out", required=True)

    e = sub.add_parser("estimate", help="print estimated vs exact similarity for document pairs")
    e.add_argument("input")
    e.add_argument("--algo", choices=list(ALGORITHMS), default="i2cws")
    e.add_argument("--d", type=int, default=512)
    e.add_argument("--seed", type=_u64, default=1)
    e.add_argument("--scale", type=float, default=None)
    e.add_argument("--fingerprints", nargs="+", metavar="FILE",
                   help="use precomputed fingerprint file(s); with two files, pair I:J compares doc I of the first with doc J of the second")
    e.add_argument("--pair", type=_pair, action="append", metavar="I:J", help="document pair (repeatable)")

    b = sub.add_parser("bench-mse", help="MSE/bias sweep of estimators over D")
    b.add_argument("input", nargs="?", help="sparse corpus (default: generated desk-scale uniform corpus)")
    b.add_argument("--algos", type=_algo_list, default=list(ALGORITHMS))
    b.add_argument("--d-list", type=_int_list, default=[32, 64, 128, 256, 512])
    b.add_argument("--pairs", type=int, default=50)
    b.add_argument("--trials", type=int, default=5)
    b.add_argument("--seed", type=_u64, default=1)
    b.add_argument("--gen-seed", type=_u64, default=0)
    b.add_argument("--scale", type=float, default=None)
    b.add_argument("--timing", action="store_true", help="record wall_ms (makes output non-reproducible)")
    b.add_argument("--out", default="-")

    r = sub.add_parser("retrieve", help="top-K retrieval Precision@K and MAP@K")
    r.add_argument("input", nargs="?", help="sparse corpus (default: generated clustered corpus)")
    r.add_argument("--queries-file", help="query documents; otherwise queries are drawn from the corpus")
    r.add_argument("--queries", type=int, default=20)
    r.add_argument("--algos", type=_algo_list, default=list(ALGORITHMS))
    r.add_argument("--d-list", type=_int_list, default=[512])
    r.add_argument("--k-list", type=_int_list, default=[1, 20, 50, 100, 500, 1000])
    r.add_argument("--seed", type=_u64, default=1)
    r.add_argument("--gen-seed", type=_u64, default=0)
    r.add_argument("--scale", type=float, default=None)
    r.add_argument("--timing", action="store_true", help="record wall_ms (makes output non-reproducible)")
    r.add_argument("--out", default="-")

    pr = sub.add_parser("props", help="run the statistical property suite")
    pr.add_argument("--seed", type=_u64, default=1)
    return p


def cmd_gen(args) -> int:
    if args.kind == "clustered":
        db, queries = gen_clustered_corpus(ClusterConfig(feature_count=args.features, gen_seed=args.gen_seed),
                                           queries=args.queries)
        write_sparse_file(args.out, db)
        if args.queries_out:
            write_sparse_file(args.queries_out, queries)
        log.info("wrote %d docs to %s", len(db), args.out)
        return 0
    law = UniformLaw(args.lo, args.hi) if args.kind == "uniform" else PowerLaw(args.exponent, args.scale)
    corpus = gen_corpus(SynthConfig(args.docs, args.features, args.density, law, args.gen_seed))
    write_sparse_file(args.out, corpus)
    log.info("wrote %d docs to %s", len(corpus), args.out)
    return 0


def cmd_sketch(args) -> int:
    corpus = parse_sparse_file(args.input)
    scheme = VariateScheme(args.seed, args.d)
    fps = sketch_corpus(corpus, scheme, args.algo, scale=args.scale, w_max=args.w_max)
    write_fingerprints(args.out, fps, corpus_digest(corpus))
    log.info("wrote %d fingerprints (%s, D=%d, seed=%d) to %s", len(fps), args.algo, args.d, args.seed, args.out)
    return 0


def _default_pairs(n: int) -> list[tuple[int, int]]:
    if n <= 8:
        return [(i, j) for i in range(n) for j in range(i + 1, n)]
    return [(i, i + 1) for i in range(min(n - 1, 10))]


def cmd_estimate(args) -> int:
    corpus = parse_sparse_file(args.input)
    if args.fingerprints:
        files = [read_fingerprints(path) for path in args.fingerprints]
        digest = corpus_digest(corpus)
        for path, f in zip(args.fingerprints, files):
            if f.corpus_digest != digest:
                log.warning("%s was sketched from a different corpus (digest mismatch)", path)
        left = files[0].fingerprints
        right = files[-1].fingerprints
        header = f"algorithm={files[0].algorithm} D={files[0].D} seed={files[0].master_seed}"
    else:
        scheme = VariateScheme(args.seed, args.d)
        left = right = sketch_corpus(corpus, scheme, args.algo, scale=args.scale)
        header = f"algorithm={args.algo} D={args.d} seed={args.seed}"
    pairs = args.pair or _default_pairs(len(corpus))
    print(f"# {header}")
    print("doc_a\tdoc_b\texact\testimate")
    for i, j in pairs:
        if not (0 <= i < len(corpus) and 0 <= j < len(corpus)):
            raise CWSError(f"pair {i}:{j} is outside the corpus (0..{len(corpus) - 1})")
        exact = generalized_jaccard(corpus[i], corpus[j])
        est = estimate_similarity(left[i], right[j])
        print(f"{i}\t{j}\t{exact!r}\t{est!r}")
    return 0


def cmd_bench_mse(args) -> int:
    if args.input:
        corpus = parse_sparse_file(args.input)
        source = args.input
    else:
        config = SynthConfig(DESK_UNIFORM.doc_count, DESK_UNIFORM.feature_count, DESK_UNIFORM.density,
                             DESK_UNIFORM.law, args.gen_seed)
        corpus = gen_corpus(config)
        source = f"desk-uniform gen_seed={args.gen_seed}"
    rows = []
    for algo in args.algos:
        rows.extend(mse_sweep(corpus, algo, args.d_list, args.pairs, args.trials, args.seed,
                              scale=args.scale, reuse_prefix=not args.timing, timing=args.timing))
    _write_csv(args.out, f"cwsketch bench-mse seed={args.seed} corpus={source}", MSE_COLUMNS, rows)
    return 0


def cmd_retrieve(args) -> int:
    if args.input:
        corpus = parse_sparse_file(args.input)
        source = args.input
        if args.queries_file:
            db = corpus
            queries = parse_sparse_file(args.queries_file)
            # keep query ids disjoint from database ids
            offset = max(S.doc_id for S in db) + 1
            for q in queries:
                q.doc_id += offset
        else:
            rng = np.random.default_rng(args.seed)
            picked = set(rng.choice(len(corpus), size=min(args.queries, len(corpus) - 1), replace=False).tolist())
            queries = [S for S in corpus if S.doc_id in picked]
            db = [S for S in corpus if S.doc_id not in picked]
    else:
        db, queries = gen_clustered_corpus(ClusterConfig(gen_seed=args.gen_seed), queries=args.queries)
        source = f"clustered gen_seed={args.gen_seed}"
    k_max = max(args.k_list)
    truth = exact_ground_truth(queries, db, k_max)
    rows = []
    for algo in args.algos:
        for D in args.d_list:
            rows.extend(retrieval_experiment(queries, db, algo, D, args.k_list, args.seed,
                                             scale=args.scale, timing=args.timing, ground_truth=truth))
    _write_csv(args.out, f"cwsketch retrieve seed={args.seed} corpus={source} db={len(db)} queries={len(queries)}",
               RETRIEVAL_COLUMNS, rows)
    return 0


def cmd_props(args) -> int:
    from .props import run_all

    print(f"# cwsketch props seed={args.seed}")
    results = run_all(args.seed)
    failed = [r for r in results if not r.passed]
    print(f"# {len(results) - len(failed)}/{len(results)} passed")
    return 1 if failed else 0


COMMANDS = {
    "gen": cmd_gen,
    "sketch": cmd_sketch,
    "estimate": cmd_estimate,
    "bench-mse": cmd_bench_mse,
    "retrieve": cmd_retrieve,
    "props": cmd_props,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (CWSError, OSError) as exc:
        print(f"cwsketch {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
