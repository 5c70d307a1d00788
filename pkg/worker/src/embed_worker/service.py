"""HTTP surface: POST /encode, POST /encode_batch, GET /info, GET /healthz.

Error bodies are {"code", "message"}. Encodes run on worker threads behind
a bounded semaphore; batch requests are chunked internally, which never
changes the response because items are grouped by kind per request, not
across requests.
"""

from __future__ import annotations

import anyio
import base64
import binascii

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from starlette.concurrency import run_in_threadpool

from .backends import BACKEND_IDS, Backend
from .preprocess import ImageDecodeError

MAX_BATCH_ITEMS = 256
_CHUNK = 32


class _ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message


def _decode_payload(kind: str, payload: str) -> str | bytes:
    if kind == "text":
        return payload
    try:
        return base64.b64decode(payload, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise _ApiError(400, "bad_request", f"image payload is not valid base64: {exc}")


def _parse_item(item, loaded: dict[str, Backend], default: str | None) -> tuple[str, str, str | bytes]:
    if not isinstance(item, dict):
        raise _ApiError(400, "bad_request", "each item must be a JSON object")
    kind = item.get("kind")
    if kind not in ("text", "image"):
        raise _ApiError(400, "bad_request", 'kind must be "text" or "image"')
    payload = item.get("payload")
    if not isinstance(payload, str):
        raise _ApiError(400, "bad_request", "payload must be a string")
    backend = item.get("backend", default)
    if backend not in BACKEND_IDS:
        raise _ApiError(
            400, "unknown_backend",
            f"unknown backend {backend!r}, supported: {', '.join(BACKEND_IDS)}",
        )
    if backend not in loaded:
        raise _ApiError(503, "backend_not_loaded", f"backend {backend!r} is not loaded")
    return backend, kind, _decode_payload(kind, payload)


def create_app(
    backends: dict[str, Backend],
    *,
    default_backend: str | None = None,
    max_concurrent: int = 2,
) -> FastAPI:
    if backends and default_backend is None:
        default_backend = next(iter(backends))

    app = FastAPI(title="embedding worker", docs_url=None, redoc_url=None)
    gate = anyio.Semaphore(max_concurrent)

    @app.exception_handler(_ApiError)
    async def handle_api_error(_req: Request, exc: _ApiError):
        return JSONResponse(status_code=exc.status, content={"code": exc.code, "message": exc.message})

    @app.exception_handler(ImageDecodeError)
    async def handle_bad_image(_req: Request, exc: ImageDecodeError):
        return JSONResponse(status_code=400, content={"code": "bad_image", "message": str(exc)})

    @app.exception_handler(Exception)
    async def handle_unexpected(_req: Request, exc: Exception):
        return JSONResponse(
            status_code=500,
            content={"code": "model_failure", "message": f"{type(exc).__name__}: {exc}"},
        )

    async def body_of(request: Request) -> dict:
        try:
            body = await request.json()
        except Exception:
            raise _ApiError(400, "bad_request", "body is not valid JSON")
        if not isinstance(body, dict):
            raise _ApiError(400, "bad_request", "body must be a JSON object")
        return body

    def run_one(backend: Backend, kind: str, payload) -> list[float]:
        vec = backend.encode_text(payload) if kind == "text" else backend.encode_image(payload)
        return [float(v) for v in vec]

    @app.post("/encode")
    async def encode(request: Request):
        body = await body_of(request)
        backend_id, kind, payload = _parse_item(body, backends, default_backend)
        backend = backends[backend_id]
        async with gate:
            vector = await run_in_threadpool(run_one, backend, kind, payload)
        return {"vector": vector, "dim": backend.dim, "backend": backend_id}

    @app.post("/encode_batch")
    async def encode_batch(request: Request):
        body = await body_of(request)
        items = body.get("items")
        if not isinstance(items, list) or not items:
            raise _ApiError(400, "bad_request", "items must be a non-empty list")
        if len(items) > MAX_BATCH_ITEMS:
            raise _ApiError(400, "bad_request", f"at most {MAX_BATCH_ITEMS} items per batch")
        parsed = [_parse_item(i, backends, default_backend) for i in items]
        ids = {backend_id for backend_id, _, _ in parsed}
        if len(ids) > 1:
            raise _ApiError(400, "bad_request", "all items in one batch must use the same backend")
        backend = backends[ids.pop()]

        def run_batch() -> list[list[float]]:
            out: list[list[float] | None] = [None] * len(parsed)
            for kind in ("text", "image"):
                rows = [i for i, p in enumerate(parsed) if p[1] == kind]
                for at in range(0, len(rows), _CHUNK):
                    chunk = rows[at : at + _CHUNK]
                    payloads = [parsed[i][2] for i in chunk]
                    vecs = (
                        backend.encode_text_batch(payloads)
                        if kind == "text"
                        else backend.encode_image_batch(payloads)
                    )
                    for i, vec in zip(chunk, vecs):
                        out[i] = [float(v) for v in vec]
            return out  # type: ignore[return-value]

        async with gate:
            vectors = await run_in_threadpool(run_batch)
        return {"vectors": vectors, "dim": backend.dim, "backend": backend.backend_id}

    @app.get("/info")
    async def info(backend: str | None = None):
        if not backends:
            raise _ApiError(503, "backend_not_loaded", "no backend loaded yet")
        backend_id = backend or default_backend
        if backend_id not in backends:
            raise _ApiError(
                404, "unknown_backend",
                f"backend {backend_id!r} not loaded, available: {', '.join(backends)}",
            )
        return backends[backend_id].info()

    @app.get("/healthz")
    async def healthz():
        return {
            "status": "ok" if backends else "loading",
            "backends": sorted(backends),
            "default": default_backend,
        }

    return app
