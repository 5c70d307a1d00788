"""Ingest filtering, game-name resolution, and the on-disk frame store.

Store layout (little-endian throughout):

    magic "GPVS" | version u32 | dim u32 | frame count u64
    | embedder_id length u32 | embedder_id bytes (UTF-8)
    | frame table: {video_id u32, frame_index u32, timestamp_ms u32} x count
    | vector block: float32 x (count * dim), record i owning rows [i*dim, (i+1)*dim)

A UTF-8 JSON manifest sits next to the store at ``<path>.manifest.json`` and
carries video metadata, the embedder spec, and ingest filter statistics.
Stores are immutable once built; updates are whole-store rebuilds.
"""

from __future__ import annotations

import json
import shutil
import struct
import tempfile
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .embedding import EmbedderSpec, normalize_rows
from .errors import (
    BadMagicError,
    CorruptManifestError,
    DimensionMismatchError,
    EmptyVideoError,
    VersionUnsupportedError,
)

MAGIC = b"GPVS"
FORMAT_VERSION = 1
UNRESOLVED = "UNRESOLVED"

_FIXED_HEADER = struct.Struct("<4sIIQI")  # magic, version, dim, frame count, id length
_FRAME_DTYPE = np.dtype([("video_id", "<u4"), ("frame_index", "<u4"), ("timestamp_ms", "<u4")])

MIN_DURATION_S = 2.0
MAX_DURATION_S = 60.0
MIN_SCORE = 1


@dataclass(frozen=True)
class SubmissionMeta:
    """One crawled post: the unit the ingest filters judge."""

    submission_id: str
    title: str
    score: int
    duration_s: float
    spam_flag: bool = False
    url: str = ""
    fps: float = 30.0


class RejectReason(str, Enum):
    SPAM = "spam"
    LOW_SCORE = "low_score"
    DURATION = "duration"


def validate_submission(meta: SubmissionMeta) -> RejectReason | None:
    """Apply the dataset quality filters; None means accepted.

    Checks run in a fixed order (spam, then score, then duration) and the
    first violation is the reported reason. Duration bounds are exclusive:
    a video lasting exactly 2 s or exactly 60 s is rejected.
    """
    if meta.spam_flag:
        return RejectReason.SPAM
    if meta.score < MIN_SCORE:
        return RejectReason.LOW_SCORE
    if not (MIN_DURATION_S < meta.duration_s < MAX_DURATION_S):
        return RejectReason.DURATION
    return None


class GameCatalog:
    """Case-folded alias table mapping title substrings to canonical game names."""

    def __init__(self, entries: Mapping[str, str]):
        canon = set(entries.values())
        for alias, name in entries.items():
            if alias != alias.casefold():
                raise ValueError(f"alias {alias!r} is not case-folded")
        for name in canon:
            if entries.get(name.casefold()) != name:
                raise ValueError(f"canonical name {name!r} must map to itself")
        self._entries = dict(entries)
        self._canonical = frozenset(canon)

    @classmethod
    def from_aliases(cls, aliases: Mapping[str, Iterable[str]]) -> "GameCatalog":
        """Build from {canonical name: [alias, ...]}; canonical names self-map."""
        entries: dict[str, str] = {}
        for name, alts in aliases.items():
            entries[name.casefold()] = name
            for alt in alts:
                entries[alt.casefold()] = name
        return cls(entries)

    @classmethod
    def load(cls, path: str | Path) -> "GameCatalog":
        with open(path, encoding="utf-8") as fh:
            return cls.from_aliases(json.load(fh))

    @classmethod
    def default(cls) -> "GameCatalog":
        """The catalog shipped with the package."""
        from importlib import resources

        data = resources.files("gpvs.data").joinpath("game_catalog.json").read_text("utf-8")
        return cls.from_aliases(json.loads(data))

    @property
    def entries(self) -> Mapping[str, str]:
        return self._entries

    @property
    def canonical_names(self) -> frozenset[str]:
        return self._canonical

    def __len__(self) -> int:
        return len(self._entries)


def resolve_game_name(title: str, catalog: GameCatalog) -> str:
    """Map a post title to a canonical game name via the alias table.

    The longest case-insensitive alias found as a substring of the title
    wins; equal-length matches break by alphabetical order of the canonical
    name. Returns UNRESOLVED when no alias occurs in the title.
    """
    if not len(catalog):
        raise ValueError("catalog is empty")
    title_cf = title.casefold()
    best: tuple[int, str] | None = None
    for alias, canonical in catalog.entries.items():
        if alias and alias in title_cf:
            key = (-len(alias), canonical)
            if best is None or key < best:
                best = key
    return best[1] if best is not None else UNRESOLVED


@dataclass
class VideoEntry:
    """Manifest row for one ingested video.

    video_id is a dense handle assigned by build order; whatever value the
    caller passes in is replaced at build time, as is frame_count.
    """

    video_id: int
    submission_id: str
    game: str
    frame_count: int
    fps: float
    url: str = ""


@dataclass(frozen=True)
class FrameRecord:
    video_id: int
    frame_index: int
    timestamp_ms: int
    embedding: np.ndarray


@dataclass
class StoreHandle:
    """An open, immutable store: metadata plus zero-copy frame arrays.

    ``vectors`` is a read-only (total_frames, dim) float32 view, memory-mapped
    when the handle came from open_store. The three parallel u32 arrays give
    each frame's owning video, index within that video, and timestamp.
    """

    dim: int
    total_frames: int
    videos: list[VideoEntry]
    embedder: EmbedderSpec
    frame_video_ids: np.ndarray
    frame_indices: np.ndarray
    frame_timestamps_ms: np.ndarray
    vectors: np.ndarray
    filter_stats: dict = field(default_factory=dict)
    path: Path | None = None

    def video_by_id(self, video_id: int) -> VideoEntry:
        return self.videos[video_id]

    def games_present(self) -> list[str]:
        return sorted({v.game for v in self.videos})

    def video_counts_by_game(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for v in self.videos:
            counts[v.game] = counts.get(v.game, 0) + 1
        return counts

    def frame_record(self, row: int) -> FrameRecord:
        return FrameRecord(
            video_id=int(self.frame_video_ids[row]),
            frame_index=int(self.frame_indices[row]),
            timestamp_ms=int(self.frame_timestamps_ms[row]),
            embedding=self.vectors[row],
        )


def _manifest_path(path: Path) -> Path:
    return path.with_name(path.name + ".manifest.json")


def build_store(
    videos: Iterable[tuple],
    embedder: EmbedderSpec,
    path: str | Path,
    *,
    filter_stats: dict | None = None,
) -> StoreHandle:
    """Write an immutable store and manifest, then reopen and return it.

    ``videos`` yields (VideoEntry, embeddings) or (VideoEntry, embeddings,
    frame_indices) tuples; embeddings is an (n, dim) array re-normalized to
    unit rows at write time, frame_indices defaults to 0..n-1 and must be
    strictly increasing (strided ingest passes the original decode indices
    so timestamps stay true to the source video).

    Vector data streams through a temp file, so memory use is bounded by the
    largest single video rather than the whole store.
    """
    path = Path(path)
    dim = embedder.dim
    entries: list[VideoEntry] = []
    table_parts: list[np.ndarray] = []
    total = 0

    tmp = tempfile.NamedTemporaryFile(dir=path.parent, prefix=path.name + ".", suffix=".vec.tmp", delete=False)
    try:
        with tmp:
            for video_id, item in enumerate(videos):
                entry, embeddings = item[0], np.asarray(item[1])
                frame_indices = np.asarray(item[2], dtype=np.int64) if len(item) > 2 else None
                if embeddings.ndim != 2 or embeddings.shape[0] == 0:
                    raise EmptyVideoError(
                        f"video {entry.submission_id!r} has no frames (shape {embeddings.shape})"
                    )
                n = embeddings.shape[0]
                if embeddings.shape[1] != dim:
                    raise DimensionMismatchError(
                        f"video {entry.submission_id!r} has dim {embeddings.shape[1]}, store dim {dim}"
                    )
                if entry.fps <= 0:
                    raise ValueError(f"video {entry.submission_id!r} has fps {entry.fps}")
                if frame_indices is None:
                    frame_indices = np.arange(n, dtype=np.int64)
                elif frame_indices.shape != (n,):
                    raise ValueError("frame_indices length must match embedding rows")
                if frame_indices[0] < 0 or (n > 1 and not (np.diff(frame_indices) > 0).all()):
                    raise ValueError(
                        f"frame indices for {entry.submission_id!r} must be strictly increasing"
                    )

                unit = normalize_rows(embeddings)
                table = np.empty(n, dtype=_FRAME_DTYPE)
                table["video_id"] = video_id
                table["frame_index"] = frame_indices
                table["timestamp_ms"] = np.rint(frame_indices / entry.fps * 1000.0).astype(np.uint32)
                table_parts.append(table)
                tmp.write(np.ascontiguousarray(unit, dtype="<f4").tobytes())

                entries.append(
                    VideoEntry(
                        video_id=video_id,
                        submission_id=entry.submission_id,
                        game=entry.game,
                        frame_count=n,
                        fps=entry.fps,
                        url=entry.url,
                    )
                )
                total += n

        id_bytes = embedder.backend_id.encode("utf-8")
        with open(path, "wb") as out:
            out.write(_FIXED_HEADER.pack(MAGIC, FORMAT_VERSION, dim, total, len(id_bytes)))
            out.write(id_bytes)
            for part in table_parts:
                out.write(part.tobytes())
            with open(tmp.name, "rb") as vec:
                shutil.copyfileobj(vec, out, length=16 * 1024 * 1024)
    finally:
        Path(tmp.name).unlink(missing_ok=True)

    stats = filter_stats if filter_stats is not None else {
        "accepted": len(entries),
        "rejected_by_reason": {},
    }
    manifest = {
        "videos": [
            {
                "video_id": v.video_id,
                "submission_id": v.submission_id,
                "game": v.game,
                "frame_count": v.frame_count,
                "fps": v.fps,
                **({"url": v.url} if v.url else {}),
            }
            for v in entries
        ],
        "embedder": {
            "backend_id": embedder.backend_id,
            "dim": embedder.dim,
            "input_image_side": embedder.input_image_side,
        },
        "filter_stats": stats,
    }
    manifest_text = json.dumps(manifest, indent=2, sort_keys=True)
    _manifest_path(path).write_text(manifest_text, "utf-8")

    return open_store(path)


def open_store(path: str | Path) -> StoreHandle:
    """Validate and memory-map an existing store.

    Header, manifest, and frame table are cross-checked; vectors are exposed
    read-only and zero-copy. Raises BadMagicError, VersionUnsupportedError,
    or CorruptManifestError as appropriate.
    """
    path = Path(path)
    size = path.stat().st_size
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise BadMagicError(f"{path}: expected {MAGIC!r}, found {magic!r}")
        rest = fh.read(_FIXED_HEADER.size - 4)
        if len(rest) < _FIXED_HEADER.size - 4:
            raise CorruptManifestError(f"{path}: header truncated")
        version, dim, total, id_len = struct.unpack("<IIQI", rest)
        if version != FORMAT_VERSION:
            raise VersionUnsupportedError(f"{path}: format version {version}")
        if dim == 0:
            raise CorruptManifestError(f"{path}: zero dimension in header")
        id_bytes = fh.read(id_len)
        if len(id_bytes) < id_len:
            raise CorruptManifestError(f"{path}: embedder id truncated")
        backend_id = id_bytes.decode("utf-8")

    header_end = _FIXED_HEADER.size + id_len
    table_off = header_end
    vec_off = table_off + total * _FRAME_DTYPE.itemsize
    expected = vec_off + total * dim * 4
    if size != expected:
        raise CorruptManifestError(f"{path}: size {size}, expected {expected} for {total} frames")

    if total:
        table = np.memmap(path, dtype=_FRAME_DTYPE, mode="r", offset=table_off, shape=(total,))
        vectors = np.memmap(path, dtype="<f4", mode="r", offset=vec_off, shape=(total, dim))
        video_ids = np.ascontiguousarray(table["video_id"])
        frame_indices = np.ascontiguousarray(table["frame_index"])
        timestamps = np.ascontiguousarray(table["timestamp_ms"])
    else:
        vectors = np.empty((0, dim), dtype=np.float32)
        video_ids = np.empty(0, dtype=np.uint32)
        frame_indices = np.empty(0, dtype=np.uint32)
        timestamps = np.empty(0, dtype=np.uint32)

    mpath = _manifest_path(path)
    try:
        manifest = json.loads(mpath.read_text("utf-8"))
    except FileNotFoundError as exc:
        raise CorruptManifestError(f"missing manifest {mpath}") from exc
    except json.JSONDecodeError as exc:
        raise CorruptManifestError(f"unparseable manifest {mpath}: {exc}") from exc

    try:
        emb = manifest["embedder"]
        spec = EmbedderSpec(
            backend_id=emb["backend_id"],
            dim=int(emb["dim"]),
            input_image_side=int(emb["input_image_side"]),
        )
        rows = manifest["videos"]
        videos = [
            VideoEntry(
                video_id=int(r["video_id"]),
                submission_id=r["submission_id"],
                game=r["game"],
                frame_count=int(r["frame_count"]),
                fps=float(r["fps"]),
                url=r.get("url", ""),
            )
            for r in rows
        ]
        stats = manifest.get("filter_stats", {})
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptManifestError(f"manifest {mpath} malformed: {exc}") from exc

    if spec.dim != dim or spec.backend_id != backend_id:
        raise CorruptManifestError(
            f"manifest embedder ({spec.backend_id!r}, dim {spec.dim}) "
            f"disagrees with header ({backend_id!r}, dim {dim})"
        )
    for pos, v in enumerate(videos):
        if v.video_id != pos:
            raise CorruptManifestError(f"video ids not dense at position {pos}")
    if sum(v.frame_count for v in videos) != total:
        raise CorruptManifestError("manifest frame counts disagree with header total")
    per_video = np.bincount(video_ids, minlength=len(videos)) if total else np.zeros(len(videos))
    if len(videos) and not np.array_equal(per_video, [v.frame_count for v in videos]):
        raise CorruptManifestError("frame table video counts disagree with manifest")

    return StoreHandle(
        dim=dim,
        total_frames=total,
        videos=videos,
        embedder=spec,
        frame_video_ids=video_ids,
        frame_indices=frame_indices,
        frame_timestamps_ms=timestamps,
        vectors=vectors,
        filter_stats=stats,
        path=path,
    )


def read_submissions(path: str | Path) -> list[SubmissionMeta]:
    """Parse newline-delimited JSON submission metadata.

    Unknown keys are tolerated and blank lines are skipped; "fps" is
    optional and defaults to 30.
    """
    metas = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
                metas.append(
                    SubmissionMeta(
                        submission_id=raw["submission_id"],
                        title=raw.get("title", ""),
                        score=int(raw["score"]),
                        duration_s=float(raw["duration_s"]),
                        spam_flag=bool(raw.get("spam_flag", False)),
                        url=raw.get("url", ""),
                        fps=float(raw.get("fps", 30.0)),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: bad submission record: {exc}") from exc
    return metas
