"""Embedding vectors, cosine similarity, and the pluggable embedder contract.

Vectors are plain float32 numpy arrays. Everything in the store is normalized
to unit L2 norm once at ingest, so similarity between a query and a frame is
a single dot product.
"""

from __future__ import annotations

import base64
import hashlib
from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np

from .errors import DimensionMismatchError, EmbedderUnavailableError, ZeroVectorError

ZERO_NORM_THRESHOLD = 1e-12


@dataclass(frozen=True)
class EmbedderSpec:
    """Identity of the encoder that produced a set of vectors."""

    backend_id: str
    dim: int
    input_image_side: int = 224

    def __post_init__(self) -> None:
        if not self.backend_id:
            raise ValueError("backend_id must be non-empty")
        if self.dim <= 0:
            raise ValueError(f"dim must be positive, got {self.dim}")
        if self.input_image_side <= 0:
            raise ValueError(f"input_image_side must be positive, got {self.input_image_side}")


def normalize(v: np.ndarray | list[float]) -> np.ndarray:
    """Scale `v` to unit L2 norm, returning a float32 vector.

    Raises ZeroVectorError for degenerate inputs (norm below 1e-12); such a
    vector must never enter a store.
    """
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"expected a non-empty 1-d vector, got shape {arr.shape}")
    norm = float(np.linalg.norm(arr))
    if norm < ZERO_NORM_THRESHOLD:
        raise ZeroVectorError(f"vector norm {norm!r} is below {ZERO_NORM_THRESHOLD}")
    return (arr / norm).astype(np.float32)


def normalize_rows(matrix: np.ndarray) -> np.ndarray:
    """Row-wise `normalize` for a (n, dim) batch."""
    arr = np.asarray(matrix, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {arr.shape}")
    norms = np.linalg.norm(arr, axis=1)
    if arr.shape[0] and float(norms.min()) < ZERO_NORM_THRESHOLD:
        bad = int(np.argmin(norms))
        raise ZeroVectorError(f"row {bad} has norm {norms[bad]!r}")
    return (arr / norms[:, None]).astype(np.float32)


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Dot product of two unit vectors; symmetric in its arguments."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"dim {a.shape} vs {b.shape}")
    return float(np.dot(a, b))


def mock_embed(payload: bytes, dim: int, seed: int = 0) -> np.ndarray:
    """Deterministic stand-in for a real encoder.

    The payload and seed are hashed with SHA-256; the digest keys a
    counter-based generator (Philox) whose gaussian draws are normalized.
    Identical (payload, dim, seed) always yields the identical vector.
    """
    if dim < 2:
        raise ValueError(f"dim must be >= 2, got {dim}")
    digest = hashlib.sha256((seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little") + payload).digest()
    key = int.from_bytes(digest[:16], "little")
    gen = np.random.Generator(np.random.Philox(key=key))
    return normalize(gen.standard_normal(dim))


@runtime_checkable
class Embedder(Protocol):
    """Anything that turns bytes into unit vectors of a declared dimension.

    The engine never looks inside a model; this protocol is the whole
    contract between the search side and whatever hosts the encoders.
    """

    @property
    def spec(self) -> EmbedderSpec: ...

    def embed_text(self, text: str) -> np.ndarray: ...

    def embed_image(self, data: bytes) -> np.ndarray: ...


class MockEmbedder:
    """Model-free embedder for tests and offline pipelines.

    Text and images are both treated as byte payloads, so a frame whose
    bytes equal a query string embeds to exactly the query vector. Tests
    use that to plant known-relevant videos.
    """

    def __init__(self, dim: int = 64, seed: int = 0, backend_id: str = "mock"):
        self._spec = EmbedderSpec(backend_id=backend_id, dim=dim, input_image_side=224)
        self._seed = seed

    @property
    def spec(self) -> EmbedderSpec:
        return self._spec

    def embed_text(self, text: str) -> np.ndarray:
        return mock_embed(text.encode("utf-8"), self._spec.dim, self._seed)

    def embed_image(self, data: bytes) -> np.ndarray:
        return mock_embed(data, self._spec.dim, self._seed)


class HttpEmbedder:
    """Client for an encoder worker speaking the /encode + /info contract."""

    def __init__(self, base_url: str, timeout: float = 30.0):
        import httpx

        self._base_url = base_url.rstrip("/")
        self._client = httpx.Client(base_url=self._base_url, timeout=timeout)
        self._spec: EmbedderSpec | None = None

    @property
    def spec(self) -> EmbedderSpec:
        if self._spec is None:
            info = self._get_json("/info")
            self._spec = EmbedderSpec(
                backend_id=info["backend_id"],
                dim=int(info["dim"]),
                input_image_side=int(info["input_image_side"]),
            )
        return self._spec

    def _get_json(self, path: str) -> dict:
        import httpx

        try:
            resp = self._client.get(path)
            resp.raise_for_status()
        except httpx.HTTPError as exc:
            raise EmbedderUnavailableError(f"GET {path}: {exc}") from exc
        return resp.json()

    def _encode(self, kind: str, payload: str) -> np.ndarray:
        import httpx

        body = {"kind": kind, "payload": payload, "backend": self.spec.backend_id}
        try:
            resp = self._client.post("/encode", json=body)
            resp.raise_for_status()
        except httpx.HTTPError as exc:
            raise EmbedderUnavailableError(f"POST /encode: {exc}") from exc
        data = resp.json()
        vec = np.asarray(data["vector"], dtype=np.float32)
        if vec.shape != (self.spec.dim,):
            raise EmbedderUnavailableError(
                f"worker returned dim {vec.shape} but /info declared {self.spec.dim}"
            )
        return vec

    def embed_text(self, text: str) -> np.ndarray:
        return self._encode("text", text)

    def embed_image(self, data: bytes) -> np.ndarray:
        return self._encode("image", base64.b64encode(data).decode("ascii"))

    def close(self) -> None:
        self._client.close()
