"""Exhaustive frame scoring, top-N selection, and per-video aggregation.

A query is one unit vector; every stored frame is scored by cosine
similarity, which reduces to a dot product because both sides are unit
norm. Scoring accumulates in float64 and rounds once to float32, so a
frame's score is a pure function of (frame vector, query vector): chunk
boundaries, worker count, and store order cannot change it.

Ordering is total everywhere. Frames rank by (score desc, video_id asc,
frame_index asc); videos rank by aggregate score with video_id as the
final tie-break. Permuting the store's frame order therefore never
changes a returned ranking.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .embedding import Embedder, normalize
from .errors import DimensionMismatchError, UnknownGameError
from .store import StoreHandle

DEFAULT_POOL_SIZE = 1000
DEFAULT_TOP_VIDEOS = 5
DEFAULT_EVIDENCE = 5
_CHUNK_ROWS = 16384  # fixed scoring granularity; never derived from worker count


class AggregationMethod(str, Enum):
    MAX = "max"
    POOL = "pool"


@dataclass(frozen=True)
class FrameHit:
    video_id: int
    frame_index: int
    timestamp_ms: int
    score: float


@dataclass(frozen=True)
class RankedVideo:
    """One search result: agg_score is a similarity for the max method and a
    frame count for the pool method; evidence holds the video's own best
    frames, strongest first."""

    video_id: int
    agg_score: float
    evidence: tuple[FrameHit, ...]
    submission_id: str = ""
    game: str = ""


@dataclass(frozen=True)
class SearchRequest:
    query_text: str
    game: str | None = None
    method: AggregationMethod = AggregationMethod.MAX
    k: int = DEFAULT_TOP_VIDEOS
    pool_size: int = DEFAULT_POOL_SIZE

    def __post_init__(self):
        if not self.query_text.strip():
            raise ValueError("query_text must be non-empty")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.pool_size < 1:
            raise ValueError(f"pool_size must be >= 1, got {self.pool_size}")


def score_frames(vectors: np.ndarray, query: np.ndarray, *, workers: int = 1) -> np.ndarray:
    """Dot every row of ``vectors`` against ``query``.

    Returns float32 scores accumulated in float64, computed over a fixed
    chunk grid that depends only on the row count, so any worker count
    yields bitwise-identical output.
    """
    if vectors.ndim != 2:
        raise ValueError(f"vectors must be 2-D, got shape {vectors.shape}")
    n, dim = vectors.shape
    query = np.asarray(query)
    if query.shape != (dim,):
        raise DimensionMismatchError(f"query shape {query.shape} vs store dim {dim}")
    q64 = query.astype(np.float64)
    out = np.empty(n, dtype=np.float32)

    def run(start: int) -> None:
        stop = min(start + _CHUNK_ROWS, n)
        chunk = vectors[start:stop].astype(np.float64)
        out[start:stop] = (chunk @ q64).astype(np.float32)

    starts = range(0, n, _CHUNK_ROWS)
    if workers <= 1 or n <= _CHUNK_ROWS:
        for start in starts:
            run(start)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, starts))
    return out


def _ranked_rows(scores: np.ndarray, video_ids: np.ndarray, frame_indices: np.ndarray, n: int) -> np.ndarray:
    """Row indices of the top ``n`` frames in final rank order.

    A partition pass keeps the sort small: only rows scoring at or above
    the n-th best value are candidates, which by construction includes
    every row tied at the cut.
    """
    total = scores.shape[0]
    if n >= total:
        cand = np.arange(total)
    else:
        cut = np.partition(scores, total - n)[total - n]
        cand = np.flatnonzero(scores >= cut)
    order = np.lexsort((frame_indices[cand], video_ids[cand], -scores[cand]))
    return cand[order[:n]]


def _game_rows(store: StoreHandle, game: str) -> np.ndarray:
    allowed = np.array([v.game == game for v in store.videos], dtype=bool)
    if not allowed.any():
        raise UnknownGameError(f"no videos for game {game!r} in store manifest")
    if store.total_frames == 0:
        return np.empty(0, dtype=np.int64)
    return np.flatnonzero(allowed[store.frame_video_ids])


def top_frames(
    query_vec: np.ndarray,
    store: StoreHandle,
    n: int,
    game: str | None = None,
    *,
    workers: int = 1,
) -> list[FrameHit]:
    """The ``n`` best-scoring frames for a query vector, fewer if the
    (game-filtered) store is smaller."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    scores = score_frames(store.vectors, query_vec, workers=workers)
    vids, fidx, ts = store.frame_video_ids, store.frame_indices, store.frame_timestamps_ms
    if game is not None:
        rows = _game_rows(store, game)
        scores, vids, fidx, ts = scores[rows], vids[rows], fidx[rows], ts[rows]
    top = _ranked_rows(scores, vids, fidx, n)
    return [FrameHit(int(vids[r]), int(fidx[r]), int(ts[r]), float(scores[r])) for r in top]


def _best_rows_per_video(scores, video_ids, frame_indices):
    """First row of each video under (video asc, score desc, frame asc).

    Returns (unique video ids ascending, row of each video's best frame).
    """
    order = np.lexsort((frame_indices, -scores, video_ids))
    uniq, first = np.unique(video_ids[order], return_index=True)
    return uniq, order[first]


def _video_evidence(video_id, scores, video_ids, frame_indices, timestamps, limit):
    rows = np.flatnonzero(video_ids == video_id)
    order = np.lexsort((frame_indices[rows], -scores[rows]))[:limit]
    return tuple(
        FrameHit(int(video_id), int(frame_indices[r]), int(timestamps[r]), float(scores[r]))
        for r in rows[order]
    )


def aggregate_max(
    scores: np.ndarray,
    video_ids: np.ndarray,
    frame_indices: np.ndarray,
    timestamps: np.ndarray,
    k: int,
    *,
    evidence: int = DEFAULT_EVIDENCE,
) -> list[RankedVideo]:
    """Rank videos by their single best frame score, top ``k`` returned.

    Ties on the max break by ascending video id. Evidence lists each
    ranked video's own strongest frames.
    """
    if scores.shape[0] == 0:
        return []
    uniq, best_rows = _best_rows_per_video(scores, video_ids, frame_indices)
    best = scores[best_rows]
    order = np.lexsort((uniq, -best))[:k]
    return [
        RankedVideo(
            video_id=int(uniq[i]),
            agg_score=float(best[i]),
            evidence=_video_evidence(uniq[i], scores, video_ids, frame_indices, timestamps, evidence),
        )
        for i in order
    ]


def aggregate_pool_count(
    scores: np.ndarray,
    video_ids: np.ndarray,
    frame_indices: np.ndarray,
    timestamps: np.ndarray,
    pool_size: int,
    k: int,
    *,
    evidence: int = DEFAULT_EVIDENCE,
) -> list[RankedVideo]:
    """Rank videos by how many of their frames land in the global top pool.

    The pool is the top ``pool_size`` frames under the standard frame
    order. Videos with no pooled frame are excluded; ties on count break
    by best pooled frame score descending, then video id ascending.
    Evidence comes from the video's pooled frames only.
    """
    if pool_size < 1:
        raise ValueError(f"pool_size must be >= 1, got {pool_size}")
    if scores.shape[0] == 0:
        return []
    pool = _ranked_rows(scores, video_ids, frame_indices, pool_size)
    pv, ps, pf, pt = video_ids[pool], scores[pool], frame_indices[pool], timestamps[pool]
    uniq, best_rows = _best_rows_per_video(ps, pv, pf)
    counts = np.bincount(pv.astype(np.int64), minlength=int(uniq.max()) + 1)[uniq]
    best = ps[best_rows]
    order = np.lexsort((uniq, -best, -counts))[:k]
    return [
        RankedVideo(
            video_id=int(uniq[i]),
            agg_score=float(counts[i]),
            evidence=_video_evidence(uniq[i], ps, pv, pf, pt, evidence),
        )
        for i in order
    ]


def search(
    store: StoreHandle,
    embedder: Embedder,
    request: SearchRequest,
    *,
    workers: int = 1,
    evidence_per_video: int = DEFAULT_EVIDENCE,
) -> list[RankedVideo]:
    """Embed a query, score all frames once, aggregate, and label results.

    The query text goes to the embedder verbatim. Scores are computed one
    time and either aggregation reads from that same array; the game
    filter (exact canonical name) restricts which rows participate and
    raises UnknownGameError when the manifest holds no such game.
    """
    query_vec = normalize(embedder.embed_text(request.query_text))
    if query_vec.shape[0] != store.dim:
        raise DimensionMismatchError(
            f"embedder dim {query_vec.shape[0]} vs store dim {store.dim}"
        )
    scores = score_frames(store.vectors, query_vec, workers=workers)
    vids = store.frame_video_ids
    fidx = store.frame_indices
    ts = store.frame_timestamps_ms
    if request.game is not None:
        rows = _game_rows(store, request.game)
        scores, vids, fidx, ts = scores[rows], vids[rows], fidx[rows], ts[rows]

    if request.method is AggregationMethod.MAX:
        ranked = aggregate_max(scores, vids, fidx, ts, request.k, evidence=evidence_per_video)
    else:
        ranked = aggregate_pool_count(
            scores, vids, fidx, ts, request.pool_size, request.k, evidence=evidence_per_video
        )
    return [
        replace(r, submission_id=store.videos[r.video_id].submission_id, game=store.videos[r.video_id].game)
        for r in ranked
    ]
