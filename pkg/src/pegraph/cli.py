"""Command-line entry points: index building, querying, and serving.

Exit codes: 0 success, 2 input/validation problems, 3 query failures,
4 numeric failures.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .chains import QuerySpec
from .engine import EngineConfig, build_index, load_index, save_index
from .errors import NumericError, QueryError, ValidationError
from .peg import export_graph, run_query

EXIT_VALIDATION = 2
EXIT_QUERY = 3
EXIT_NUMERIC = 4


def _parse_weights(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("weights must be three comma-separated numbers")
    try:
        w = tuple(float(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    return w  # validated by EngineConfig


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pegraph",
        description="Structural literature retrieval: build paper evolution graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    index = sub.add_parser("index", help="build an index bundle from a corpus file")
    index.add_argument("--corpus", required=True, help="JSONL corpus file")
    index.add_argument("--out", required=True, help="output bundle directory")
    index.add_argument("--k", type=int, default=30, help="number of communities")
    index.add_argument("--weights", type=_parse_weights, default=(1 / 3, 1 / 3, 1 / 3),
                       help="citation,content,authorship relation weights")
    index.add_argument("--seed", type=int, default=0)
    index.add_argument("--min-doc-freq", type=int, default=2)
    index.add_argument("--max-iters", type=int, default=300)
    index.add_argument("--tol", type=float, default=1e-6)
    index.add_argument("--restart", type=float, default=0.15)
    index.add_argument("--stopwords", default=None, help="optional stop-word file")

    query = sub.add_parser("query", help="run a query against an index bundle")
    query.add_argument("--index", required=True, help="index bundle directory")
    what = query.add_mutually_exclusive_group(required=True)
    what.add_argument("--paper", help="single-paper query: paper id")
    what.add_argument("--papers", help="two-paper query: idA,idB")
    what.add_argument("--keyword", help="keyword query text")
    query.add_argument("--format", choices=("dot", "json"), default="json")
    query.add_argument("--len", type=int, default=None, dest="length", help="chain length")
    query.add_argument("--r", type=float, default=None, help="topic smoothness radius")
    query.add_argument("--com-t", type=float, default=None, help="community threshold")
    query.add_argument("--pool-size", type=int, default=None, help="per-community candidates")
    query.add_argument("--keyword-pool-size", type=int, default=None)
    query.add_argument("--beam", type=int, default=None, help="beam width")
    query.add_argument("--mode", choices=("beam", "exhaustive"), default="beam")
    query.add_argument("--k", type=int, default=None,
                       help="expected community count; must match the index")
    query.add_argument("--seed", type=int, default=None,
                       help="expected factorization seed; must match the index")
    query.add_argument("--out", default=None, help="output file (default: stdout)")

    serve = sub.add_parser("serve", help="serve the query API and explorer UI")
    serve.add_argument("--index", required=True)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8765)
    serve.add_argument("--assets", default=None, help="explorer UI asset directory")
    return parser


def _cmd_index(args) -> int:
    config = EngineConfig(
        n_communities=args.k,
        weights=tuple(args.weights),
        seed=args.seed,
        min_doc_freq=args.min_doc_freq,
        max_iters=args.max_iters,
        tol=args.tol,
        restart=args.restart,
    )
    index = build_index(args.corpus, config, stopwords_path=args.stopwords)
    save_index(index, args.out)
    trace = index.model.objective_trace
    print(f"indexed {len(index.corpus)} papers, {len(index.vocabulary)} terms, "
          f"{len(index.relations.author_index)} authors")
    print(f"objective: {trace[0]:.6f} -> {trace[-1]:.6f} in {len(trace) - 1} iterations")
    sizes = index.community_sizes()
    print("community sizes:", " ".join(str(s) for s in sizes))
    if index.corpus.report.n_dangling:
        print(f"dangling citations dropped: {index.corpus.report.n_dangling}")
    return 0


def _spec_from_args(args) -> QuerySpec:
    common = dict(
        chain_length=args.length,
        r=args.r,
        com_t=args.com_t,
        pool_size=args.pool_size,
        keyword_pool_size=args.keyword_pool_size,
        beam_width=args.beam,
        mode=args.mode,
    )
    if args.paper:
        return QuerySpec(kind="single_paper", paper_a=args.paper, **common)
    if args.papers:
        parts = [p.strip() for p in args.papers.split(",")]
        if len(parts) != 2 or not all(parts):
            raise ValidationError("--papers expects two comma-separated ids")
        return QuerySpec(kind="two_paper", paper_a=parts[0], paper_b=parts[1], **common)
    return QuerySpec(kind="keyword", keyword=args.keyword, **common)


def _cmd_query(args) -> int:
    index = load_index(args.index)
    if args.k is not None and args.k != index.config.n_communities:
        raise ValidationError(
            f"index was built with k={index.config.n_communities}, not {args.k}"
        )
    if args.seed is not None and args.seed != index.config.seed:
        raise ValidationError(
            f"index was built with seed={index.config.seed}, not {args.seed}"
        )
    graph = run_query(_spec_from_args(args), index)
    payload = export_graph(graph, args.format)
    if args.out:
        Path(args.out).write_bytes(payload)
    else:
        sys.stdout.buffer.write(payload)
        sys.stdout.buffer.flush()
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    index = load_index(args.index)
    app = create_app(index, assets_dir=args.assets)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {"index": _cmd_index, "query": _cmd_query, "serve": _cmd_serve}[args.command]
    try:
        return handler(args)
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except QueryError as exc:
        print(f"query error: {exc}", file=sys.stderr)
        return EXIT_QUERY
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
