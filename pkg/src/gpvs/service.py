"""HTTP surface over an open store: search, catalog, video detail, health.

All error bodies take the shape {"code", "message"}. The service never
mutates the store; request handling shares one immutable StoreHandle and
runs searches on worker threads so concurrent requests don't serialize
behind the event loop.
"""

from __future__ import annotations

import contextlib
import time

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from starlette.concurrency import run_in_threadpool

from .embedding import Embedder
from .errors import DimensionMismatchError, EmbedderUnavailableError, UnknownGameError
from .search import (
    DEFAULT_EVIDENCE,
    DEFAULT_POOL_SIZE,
    DEFAULT_TOP_VIDEOS,
    AggregationMethod,
    RankedVideo,
    SearchRequest,
    search,
)
from .store import StoreHandle

_METHODS = tuple(m.value for m in AggregationMethod)


class _ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def _serialize(results: list[RankedVideo]) -> list[dict]:
    return [
        {
            "video_id": r.video_id,
            "submission_id": r.submission_id,
            "game": r.game,
            "agg_score": r.agg_score,
            "evidence": [
                {"frame_index": h.frame_index, "timestamp_ms": h.timestamp_ms, "score": h.score}
                for h in r.evidence
            ],
        }
        for r in results
    ]


def _parse_search_body(body) -> SearchRequest:
    if not isinstance(body, dict):
        raise _ApiError(400, "bad_request", "body must be a JSON object")
    query = body.get("query")
    if not isinstance(query, str) or not query.strip():
        raise _ApiError(400, "bad_request", "query must be a non-empty string")
    method = body.get("method", AggregationMethod.MAX.value)
    if method not in _METHODS:
        raise _ApiError(400, "bad_request", f"method must be one of: {', '.join(_METHODS)}")
    game = body.get("game")
    if game is not None and not isinstance(game, str):
        raise _ApiError(400, "bad_request", "game must be a string when present")
    try:
        k = int(body.get("k", DEFAULT_TOP_VIDEOS))
        pool_size = int(body.get("pool_size", DEFAULT_POOL_SIZE))
    except (TypeError, ValueError):
        raise _ApiError(400, "bad_request", "k and pool_size must be integers")
    try:
        return SearchRequest(
            query_text=query, game=game, method=AggregationMethod(method), k=k, pool_size=pool_size
        )
    except ValueError as exc:
        raise _ApiError(400, "bad_request", str(exc))


def create_app(
    store: StoreHandle | None,
    embedder: Embedder | None,
    *,
    evidence_per_video: int = DEFAULT_EVIDENCE,
    workers: int = 1,
) -> FastAPI:
    """Build the service around one open store and one embedder.

    Either may be None: endpoints then answer 503 until a properly
    configured instance replaces this one (the store itself is immutable,
    so there is no live-reload path).
    """
    @contextlib.asynccontextmanager
    async def lifespan(_app: FastAPI):
        yield
        close = getattr(embedder, "close", None)
        if callable(close):
            close()

    app = FastAPI(title="gameplay video search", docs_url=None, redoc_url=None, lifespan=lifespan)

    @app.exception_handler(_ApiError)
    async def handle_api_error(_req: Request, exc: _ApiError):
        return _error(exc.status, exc.code, exc.message)

    @app.exception_handler(Exception)
    async def handle_unexpected(_req: Request, exc: Exception):
        return _error(500, "internal_error", f"{type(exc).__name__}: {exc}")

    def require_store() -> StoreHandle:
        if store is None:
            raise _ApiError(503, "store_unavailable", "no store loaded")
        return store

    @app.get("/healthz")
    async def healthz():
        body = {"status": "ok", "store_loaded": store is not None}
        if store is not None:
            body.update(
                {
                    "total_frames": store.total_frames,
                    "videos": len(store.videos),
                    "dim": store.dim,
                    "embedder": store.embedder.backend_id,
                }
            )
        return body

    @app.post("/api/search")
    async def api_search(request: Request):
        st = require_store()
        if embedder is None:
            raise _ApiError(503, "embedder_unavailable", "no embedder configured")
        try:
            body = await request.json()
        except Exception:
            raise _ApiError(400, "bad_request", "body is not valid JSON")
        req = _parse_search_body(body)
        started = time.perf_counter()
        try:
            results = await run_in_threadpool(
                search, st, embedder, req, workers=workers, evidence_per_video=evidence_per_video
            )
        except UnknownGameError as exc:
            raise _ApiError(404, "unknown_game", str(exc))
        except EmbedderUnavailableError as exc:
            raise _ApiError(503, "embedder_unavailable", str(exc))
        except DimensionMismatchError as exc:
            raise _ApiError(500, "dimension_mismatch", str(exc))
        timing_ms = int((time.perf_counter() - started) * 1000)
        return {"results": _serialize(results), "timing_ms": timing_ms}

    @app.get("/api/games")
    async def api_games():
        st = require_store()
        counts = st.video_counts_by_game()
        rows = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        return [{"game": g, "video_count": c} for g, c in rows]

    @app.get("/api/videos/{video_id}")
    async def api_video(video_id: int):
        st = require_store()
        if not 0 <= video_id < len(st.videos):
            raise _ApiError(404, "unknown_video", f"no video with id {video_id}")
        v = st.videos[video_id]
        rows = st.frame_video_ids == video_id
        timestamps = [int(t) for t in st.frame_timestamps_ms[rows]]
        return {
            "video_id": v.video_id,
            "submission_id": v.submission_id,
            "game": v.game,
            "frame_count": v.frame_count,
            "fps": v.fps,
            "url": v.url,
            "frame_timestamps_ms": timestamps,
        }

    return app
