"""Command-line operations: ingest, search, eval, serve, store-info.

Exit codes: 0 success, 2 domain or usage failure (bad input, unknown game,
missing store, zero accepted videos), 1 unexpected error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .embedding import Embedder, HttpEmbedder, MockEmbedder
from .errors import GpvsError, UnknownGameError
from .evaluation import load_query_set, packaged_query_set, read_judgments, render_text, run_experiment
from .search import (
    DEFAULT_EVIDENCE,
    DEFAULT_POOL_SIZE,
    DEFAULT_TOP_VIDEOS,
    AggregationMethod,
    SearchRequest,
    search,
)
from .store import (
    UNRESOLVED,
    GameCatalog,
    RejectReason,
    SubmissionMeta,
    VideoEntry,
    build_store,
    open_store,
    read_submissions,
    resolve_game_name,
    validate_submission,
)

QUERY_SET_NAMES = ("simple", "compound", "bug")


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


def _fmt_ts(ms: int) -> str:
    return f"{ms // 60000}:{ms % 60000 // 1000:02d}.{ms % 1000:03d}"


def _add_embedder_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--embedder", choices=("mock", "http"), default="mock",
                   help="query embedder backend (default: mock)")
    p.add_argument("--embedder-url", default=os.environ.get("EMBEDDER_URL"),
                   help="base URL of the embedding service (env EMBEDDER_URL)")
    p.add_argument("--seed", type=int, default=0, help="mock embedder seed (default: 0)")


def _make_embedder(args, dim: int) -> Embedder:
    if args.embedder == "http":
        if not args.embedder_url:
            raise GpvsError("--embedder http requires --embedder-url or EMBEDDER_URL")
        return HttpEmbedder(args.embedder_url)
    return MockEmbedder(dim=dim, seed=args.seed)


def _frame_files(frames_dir: Path, submission_id: str) -> list[tuple[int, Path]]:
    vdir = frames_dir / submission_id
    if not vdir.is_dir():
        raise GpvsError(f"no frames directory for submission {submission_id!r} at {vdir}")
    frames: dict[int, Path] = {}
    for f in vdir.iterdir():
        if not f.is_file():
            continue
        try:
            idx = int(f.stem)
        except ValueError:
            raise GpvsError(f"frame file {f} is not named by an integer index")
        if idx in frames:
            raise GpvsError(f"duplicate frame index {idx} under {vdir}")
        frames[idx] = f
    if not frames:
        raise GpvsError(f"no frame files for submission {submission_id!r} under {vdir}")
    return sorted(frames.items())


def cmd_ingest(args) -> int:
    try:
        metas = read_submissions(args.metadata)
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    catalog = GameCatalog.load(args.catalog) if args.catalog else GameCatalog.default()
    frames_dir = Path(args.frames_dir)

    summary = {"accepted": 0, "spam": 0, "low_score": 0, "duration": 0}
    accepted: list[SubmissionMeta] = []
    for meta in metas:
        reason = validate_submission(meta)
        if reason is None:
            summary["accepted"] += 1
            accepted.append(meta)
        else:
            summary[reason.value] += 1

    if not accepted:
        print(json.dumps(summary))
        return _fail("zero accepted videos")

    embedder = _make_embedder(args, args.dim)
    spec = embedder.spec

    def gen():
        for meta in accepted:
            files = _frame_files(frames_dir, meta.submission_id)
            files = files[:: args.stride]
            vecs = np.stack([embedder.embed_image(p.read_bytes()) for _, p in files])
            indices = np.array([i for i, _ in files], dtype=np.int64)
            entry = VideoEntry(
                video_id=0,
                submission_id=meta.submission_id,
                game=resolve_game_name(meta.title, catalog),
                frame_count=0,
                fps=meta.fps,
                url=meta.url,
            )
            yield entry, vecs, indices

    try:
        handle = build_store(gen(), spec, args.out, filter_stats={
            "accepted": summary["accepted"],
            "rejected_by_reason": {
                r.value: summary[r.value] for r in RejectReason if summary[r.value]
            },
        })
    except (GpvsError, OSError, ValueError) as exc:
        return _fail(str(exc))

    summary["frames"] = handle.total_frames
    summary["store"] = str(args.out)
    print(json.dumps(summary))
    return 0


def _resolve_cli_game(game: str | None, store) -> str | None:
    """Accept either a canonical name or any catalog alias on the CLI."""
    if game is None:
        return None
    present = {v.game for v in store.videos}
    if game in present:
        return game
    resolved = resolve_game_name(game, GameCatalog.default())
    return resolved if resolved != UNRESOLVED else game


def cmd_search(args) -> int:
    try:
        store = open_store(args.store)
    except (GpvsError, OSError) as exc:
        return _fail(str(exc))
    try:
        embedder = _make_embedder(args, store.dim)
        request = SearchRequest(
            query_text=args.query,
            game=_resolve_cli_game(args.game, store),
            method=AggregationMethod(args.method),
            k=args.k,
            pool_size=args.pool_size,
        )
        results = search(store, embedder, request, workers=args.workers,
                         evidence_per_video=args.evidence)
    except (GpvsError, ValueError) as exc:
        return _fail(str(exc))

    if args.json:
        print(json.dumps({"results": [asdict(r) for r in results]}))
        return 0
    if not results:
        print("no results")
        return 0
    print(f"{'rank':>4}  {'agg_score':>10}  {'video':>5}  {'best frame':>16}  submission / game")
    for rank, r in enumerate(results, 1):
        best = r.evidence[0]
        frame = f"#{best.frame_index} @ {_fmt_ts(best.timestamp_ms)}"
        print(f"{rank:>4}  {r.agg_score:>10.4f}  {r.video_id:>5}  {frame:>16}  {r.submission_id} / {r.game}")
    return 0


def cmd_eval(args) -> int:
    try:
        store = open_store(args.store)
        if args.query_set in QUERY_SET_NAMES:
            qs = packaged_query_set(args.query_set)
        else:
            qs = load_query_set(args.query_set)
        judgments = read_judgments(args.judgments)
    except (GpvsError, OSError, ValueError) as exc:
        return _fail(str(exc))

    method = args.method or ("pool" if qs.name == "bug" else "max")
    try:
        embedder = _make_embedder(args, store.dim)
        report = run_experiment(
            qs, store, embedder, AggregationMethod(method), args.k, judgments,
            pool_size=args.pool_size,
        )
    except (GpvsError, ValueError) as exc:
        return _fail(str(exc))
    print(report.to_json() if args.json else render_text(report))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    store_path = args.store or os.environ.get("STORE_PATH")
    if not store_path:
        return _fail("no store given (use --store or STORE_PATH)")
    try:
        store = open_store(store_path)
        embedder = _make_embedder(args, store.dim)
    except (GpvsError, OSError) as exc:
        return _fail(str(exc))

    bind = args.bind or os.environ.get("BIND_ADDR", "127.0.0.1:8765")
    host, _, port = bind.rpartition(":")
    if not host or not port.isdigit():
        return _fail(f"bad bind address {bind!r}, expected host:port")
    app = create_app(store, embedder, evidence_per_video=args.evidence, workers=args.workers)
    uvicorn.run(app, host=host, port=int(port), log_level="warning")
    return 0


def cmd_store_info(args) -> int:
    try:
        store = open_store(args.store)
    except (GpvsError, OSError) as exc:
        return _fail(str(exc))
    info = {
        "path": str(args.store),
        "dim": store.dim,
        "total_frames": store.total_frames,
        "videos": len(store.videos),
        "embedder": {
            "backend_id": store.embedder.backend_id,
            "dim": store.embedder.dim,
            "input_image_side": store.embedder.input_image_side,
        },
        "games": store.video_counts_by_game(),
        "filter_stats": store.filter_stats,
    }
    print(json.dumps(info, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gpvs", description="gameplay video search engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="filter submissions, embed frames, build a store")
    p.add_argument("metadata", help="newline-delimited JSON of submission records")
    p.add_argument("--frames-dir", required=True, help="directory of <submission_id>/<index>.<ext> frame files")
    p.add_argument("--out", required=True, help="store file to write")
    p.add_argument("--catalog", help="game alias catalog JSON (default: packaged catalog)")
    p.add_argument("--dim", type=int, default=512, help="mock embedder dimension (default: 512)")
    p.add_argument("--stride", type=int, default=1, help="keep every n-th frame (default: 1, all frames)")
    _add_embedder_args(p)
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("search", help="query a store")
    p.add_argument("store")
    p.add_argument("query")
    p.add_argument("--game", help="canonical game name or alias to scope the search")
    p.add_argument("--method", choices=("max", "pool"), default="max")
    p.add_argument("--k", type=int, default=DEFAULT_TOP_VIDEOS)
    p.add_argument("--pool-size", type=int, default=DEFAULT_POOL_SIZE)
    p.add_argument("--evidence", type=int, default=DEFAULT_EVIDENCE, help="frames of evidence per video")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--json", action="store_true", help="print results as JSON")
    _add_embedder_args(p)
    p.set_defaults(fn=cmd_search)

    p = sub.add_parser("eval", help="run a query set against a store with judgments")
    p.add_argument("store")
    p.add_argument("--query-set", required=True,
                   help="packaged set name (simple, compound, bug) or a query set JSON path")
    p.add_argument("--judgments", required=True, help="newline-delimited JSON relevance judgments")
    p.add_argument("--method", choices=("max", "pool"),
                   help="default: max for simple/compound, pool for bug")
    p.add_argument("--k", type=int, default=DEFAULT_TOP_VIDEOS)
    p.add_argument("--pool-size", type=int, default=DEFAULT_POOL_SIZE)
    p.add_argument("--json", action="store_true", help="print the JSON report instead of the table")
    _add_embedder_args(p)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("serve", help="run the HTTP search service")
    p.add_argument("--store", default=None, help="store path (env STORE_PATH)")
    p.add_argument("--bind", default=None, help="host:port (env BIND_ADDR, default 127.0.0.1:8765)")
    p.add_argument("--evidence", type=int, default=DEFAULT_EVIDENCE)
    p.add_argument("--workers", type=int, default=1)
    _add_embedder_args(p)
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("store-info", help="print store header, counts, and filter stats")
    p.add_argument("store")
    p.set_defaults(fn=cmd_store_info)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
