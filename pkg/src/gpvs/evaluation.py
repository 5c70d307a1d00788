"""Query-set evaluation: per-(query, game) metrics and table-style reports.

A query set names its metric implicitly: "simple" and "compound" sets are
scored with binary top-k accuracy, the "bug" set with recall@5. Every
(query, applicable game) pair is one evaluation cell; cells without any
relevance judgment are excluded from averages and listed in the report
rather than silently scored.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .embedding import Embedder, normalize
from .search import (
    DEFAULT_POOL_SIZE,
    AggregationMethod,
    _game_rows,
    aggregate_max,
    aggregate_pool_count,
    score_frames,
)
from .store import StoreHandle

QUERY_SET_NAMES = ("simple", "compound", "bug")


@dataclass(frozen=True)
class QueryEntry:
    query_text: str
    applicable_games: tuple[str, ...]


@dataclass(frozen=True)
class QuerySet:
    name: str
    entries: tuple[QueryEntry, ...]

    def __post_init__(self):
        if self.name not in QUERY_SET_NAMES:
            raise ValueError(f"query set name must be one of {QUERY_SET_NAMES}, got {self.name!r}")
        for e in self.entries:
            if not e.applicable_games:
                raise ValueError(f"query {e.query_text!r} has no applicable games")

    @property
    def metric(self) -> str:
        return "recall_at_5" if self.name == "bug" else "top_k_accuracy"


@dataclass(frozen=True)
class RelevanceJudgment:
    query_text: str
    game: str
    video_id: int
    relevant: bool


def load_query_set(path: str | Path) -> QuerySet:
    """Read a UTF-8 JSON query set: {name, entries: [{query, games}]}."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    return QuerySet(
        name=raw["name"],
        entries=tuple(
            QueryEntry(query_text=e["query"], applicable_games=tuple(e["games"]))
            for e in raw["entries"]
        ),
    )


def packaged_query_set(name: str) -> QuerySet:
    """One of the query sets shipped with the package: simple, compound, bug."""
    from importlib import resources

    if name not in QUERY_SET_NAMES:
        raise ValueError(f"no packaged query set {name!r}")
    data = resources.files("gpvs.data").joinpath(f"queries_{name}.json").read_text("utf-8")
    raw = json.loads(data)
    return QuerySet(
        name=raw["name"],
        entries=tuple(
            QueryEntry(query_text=e["query"], applicable_games=tuple(e["games"]))
            for e in raw["entries"]
        ),
    )


def read_judgments(path: str | Path) -> list[RelevanceJudgment]:
    """Parse newline-delimited JSON judgments; duplicates are an error."""
    out: list[RelevanceJudgment] = []
    seen: set[tuple[str, str, int]] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
                j = RelevanceJudgment(
                    query_text=raw["query_text"],
                    game=raw["game"],
                    video_id=int(raw["video_id"]),
                    relevant=bool(raw["relevant"]),
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: bad judgment record: {exc}") from exc
            key = (j.query_text, j.game, j.video_id)
            if key in seen:
                raise ValueError(f"{path}:{lineno}: duplicate judgment for {key}")
            seen.add(key)
            out.append(j)
    return out


def index_judgments(judgments: Iterable[RelevanceJudgment]) -> dict[tuple[str, str], set[int]]:
    """Map each judged (query, game) cell to its relevant video ids.

    A cell appears as soon as it has any judgment record, even one marking
    a video non-relevant; videos never judged in a judged cell count as
    non-relevant.
    """
    idx: dict[tuple[str, str], set[int]] = {}
    for j in judgments:
        cell = idx.setdefault((j.query_text, j.game), set())
        if j.relevant:
            cell.add(j.video_id)
    return idx


def top_k_accuracy(results: Sequence[int], judged_relevant: set[int], k: int) -> float:
    """100 if any of the first k ranked video ids is relevant, else 0."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return 100.0 if any(v in judged_relevant for v in results[:k]) else 0.0


def recall_at_5(top5: Sequence[int], judged_relevant: set[int]) -> float:
    """Percent of the five result slots filled with a relevant video.

    Always divides by 5: when fewer than five videos come back, the empty
    slots count as non-matching.
    """
    matches = sum(1 for v in top5[:5] if v in judged_relevant)
    return 100.0 * matches / 5.0


@dataclass(frozen=True)
class EvalCell:
    query_text: str
    game: str
    value: float


@dataclass
class EvalReport:
    """Evaluated cells plus the averages recomputable from them.

    per_game / per_query / overall are unweighted means over evaluated
    cells, rounded to 2 decimals. Cells skipped for missing judgments and
    bug-query cells that returned fewer than five videos are listed.
    """

    config: dict
    cells: list[EvalCell]
    missing_judgments: list[tuple[str, str]] = field(default_factory=list)
    short_result_cells: list[tuple[str, str, int]] = field(default_factory=list)

    @property
    def per_game(self) -> dict[str, float]:
        return _means(self.cells, key=lambda c: c.game)

    @property
    def per_query(self) -> dict[str, float]:
        return _means(self.cells, key=lambda c: c.query_text)

    @property
    def overall(self) -> float | None:
        if not self.cells:
            return None
        return round(sum(c.value for c in self.cells) / len(self.cells), 2)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "cells": [
                {"query": c.query_text, "game": c.game, "value": c.value} for c in self.cells
            ],
            "missing_judgments": [{"query": q, "game": g} for q, g in self.missing_judgments],
            "short_result_cells": [
                {"query": q, "game": g, "returned": n} for q, g, n in self.short_result_cells
            ],
            "averages": {
                "per_game": self.per_game,
                "per_query": self.per_query,
                "overall": self.overall,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _means(cells: Sequence[EvalCell], key) -> dict[str, float]:
    groups: dict[str, list[float]] = {}
    for c in cells:
        groups.setdefault(key(c), []).append(c.value)
    return {name: round(sum(vals) / len(vals), 2) for name, vals in sorted(groups.items())}


def run_experiment(
    query_set: QuerySet,
    store: StoreHandle,
    embedder: Embedder,
    method: AggregationMethod,
    k: int,
    judgments: Iterable[RelevanceJudgment] | Mapping[tuple[str, str], set[int]],
    *,
    pool_size: int = DEFAULT_POOL_SIZE,
) -> EvalReport:
    """Evaluate every (query, applicable game) cell and assemble a report.

    Each query is embedded and scored against the whole store once; per-game
    cells reuse those scores with a row mask. Simple/compound sets score
    top-k accuracy at the given k; the bug set scores recall@5 (retrieval
    depth 5 regardless of k).
    """
    idx = judgments if isinstance(judgments, Mapping) else index_judgments(judgments)
    metric = query_set.metric
    depth = 5 if metric == "recall_at_5" else k

    cells: list[EvalCell] = []
    missing: list[tuple[str, str]] = []
    short: list[tuple[str, str, int]] = []

    for entry in query_set.entries:
        qvec = normalize(embedder.embed_text(entry.query_text))
        scores = score_frames(store.vectors, qvec)
        for game in entry.applicable_games:
            rows = _game_rows(store, game)
            s = scores[rows]
            vids_arr = store.frame_video_ids[rows]
            fidx = store.frame_indices[rows]
            ts = store.frame_timestamps_ms[rows]
            if method is AggregationMethod.MAX:
                ranked = aggregate_max(s, vids_arr, fidx, ts, depth, evidence=1)
            else:
                ranked = aggregate_pool_count(s, vids_arr, fidx, ts, pool_size, depth, evidence=1)
            result_ids = [r.video_id for r in ranked]

            relevant = idx.get((entry.query_text, game))
            if relevant is None:
                missing.append((entry.query_text, game))
                continue
            if metric == "recall_at_5":
                if len(result_ids) < 5:
                    short.append((entry.query_text, game, len(result_ids)))
                value = recall_at_5(result_ids, relevant)
            else:
                value = top_k_accuracy(result_ids, relevant, k)
            cells.append(EvalCell(entry.query_text, game, value))

    config = {
        "query_set": query_set.name,
        "metric": metric,
        "method": method.value,
        "k": k,
        "pool_size": pool_size,
        "embedder": embedder.spec.backend_id,
        "dim": embedder.spec.dim,
    }
    return EvalReport(config=config, cells=cells, missing_judgments=missing, short_result_cells=short)


def render_text(report: EvalReport) -> str:
    """Plain-text table: queries down, games across, averages on the edges.

    Cells a query was not evaluated on (inapplicable game or missing
    judgment) render as a dash.
    """
    games = sorted({c.game for c in report.cells} | {g for _, g in report.missing_judgments})
    by_cell = {(c.query_text, c.game): c.value for c in report.cells}
    queries: list[str] = []
    for c in report.cells:
        if c.query_text not in queries:
            queries.append(c.query_text)
    for q, _ in report.missing_judgments:
        if q not in queries:
            queries.append(q)

    qwidth = max([len("Average")] + [len(q) for q in queries]) if queries else len("Average")
    cols = [max(len(g), 6) for g in games]
    per_game, per_query = report.per_game, report.per_query

    def fmt(v: float | None, width: int) -> str:
        return ("-" if v is None else f"{v:.2f}").rjust(width)

    lines = [
        "query set: {query_set}   metric: {metric}   method: {method}   "
        "k: {k}   pool_size: {pool_size}   embedder: {embedder}".format(**report.config)
    ]
    header = "Query".ljust(qwidth) + " | " + " | ".join(g.rjust(w) for g, w in zip(games, cols))
    header += " | " + "Avg".rjust(6)
    lines.append(header)
    lines.append("-" * len(header))
    for q in queries:
        row = q.ljust(qwidth) + " | "
        row += " | ".join(fmt(by_cell.get((q, g)), w) for g, w in zip(games, cols))
        row += " | " + fmt(per_query.get(q), 6)
        lines.append(row)
    lines.append("-" * len(header))
    avg_row = "Average".ljust(qwidth) + " | "
    avg_row += " | ".join(fmt(per_game.get(g), w) for g, w in zip(games, cols))
    avg_row += " | " + fmt(report.overall, 6)
    lines.append(avg_row)

    if report.missing_judgments:
        lines.append("")
        lines.append(f"cells skipped for missing judgments: {len(report.missing_judgments)}")
        for q, g in report.missing_judgments:
            lines.append(f"  - {q!r} / {g}")
    if report.short_result_cells:
        lines.append("")
        lines.append("cells with fewer than 5 results (missing slots scored non-matching):")
        for q, g, n in report.short_result_cells:
            lines.append(f"  - {q!r} / {g}: {n} returned")
    return "\n".join(lines)
