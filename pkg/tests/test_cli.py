import json
from dataclasses import asdict

import numpy as np
import pytest

from gpvs import (
    AggregationMethod,
    EmbedderSpec,
    MockEmbedder,
    SearchRequest,
    VideoEntry,
    build_store,
    open_store,
    search,
)
from gpvs.cli import main

DIM = 32


def _submission(sid, title, score=50, duration_s=20.0, **kw):
    return {"submission_id": sid, "title": title, "score": score, "duration_s": duration_s, **kw}


def _write_ndjson(path, records):
    path.write_text("\n".join(json.dumps(r) for r in records) + "\n")


def _write_frames(frames_dir, sid, indices, seed):
    rng = np.random.default_rng(seed)
    d = frames_dir / sid
    d.mkdir(parents=True)
    for i in indices:
        (d / f"{i}.jpg").write_bytes(rng.bytes(48))


@pytest.fixture()
def corpus(tmp_path):
    """Metadata file + frame tree with one submission per filter outcome."""
    frames = tmp_path / "frames"
    records = [
        _submission("keep", "GTA V ragdoll physics", score=10, duration_s=12.0),
        _submission("spammy", "GTA V spam", spam_flag=True),
        _submission("unloved", "GTA V meh", score=0),
        _submission("lengthy", "GTA V marathon", duration_s=60.0),
    ]
    meta = tmp_path / "subs.ndjson"
    _write_ndjson(meta, records)
    _write_frames(frames, "keep", [0, 1, 2, 3], seed=7)
    return meta, frames


def _ingest(meta, frames, out, *extra):
    return main([
        "ingest", str(meta), "--frames-dir", str(frames), "--out", str(out),
        "--dim", str(DIM), *extra,
    ])


def test_ingest_summary_counts(corpus, tmp_path, capsys):
    meta, frames = corpus
    out = tmp_path / "c.gpvs"
    assert _ingest(meta, frames, out) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["accepted"] == 1
    assert summary["spam"] == 1
    assert summary["low_score"] == 1
    assert summary["duration"] == 1
    assert summary["frames"] == 4
    store = open_store(out)
    assert [v.submission_id for v in store.videos] == ["keep"]
    assert store.videos[0].game == "Grand Theft Auto V"
    assert store.filter_stats["accepted"] == 1
    assert store.filter_stats["rejected_by_reason"] == {"spam": 1, "low_score": 1, "duration": 1}


def test_ingest_zero_accepted_fails(tmp_path, capsys):
    meta = tmp_path / "subs.ndjson"
    _write_ndjson(meta, [_submission("s", "t", spam_flag=True)])
    assert _ingest(meta, tmp_path / "frames", tmp_path / "o.gpvs") == 2
    captured = capsys.readouterr()
    assert json.loads(captured.out)["accepted"] == 0
    assert "zero accepted" in captured.err


def test_ingest_missing_frames_dir_fails(tmp_path, capsys):
    meta = tmp_path / "subs.ndjson"
    _write_ndjson(meta, [_submission("ghost", "GTA V clip")])
    (tmp_path / "frames").mkdir()
    assert _ingest(meta, tmp_path / "frames", tmp_path / "o.gpvs") == 2
    assert "ghost" in capsys.readouterr().err


def test_ingest_bad_metadata_fails(tmp_path, capsys):
    meta = tmp_path / "subs.ndjson"
    meta.write_text('{"submission_id": "x"}\n')
    assert _ingest(meta, tmp_path / "frames", tmp_path / "o.gpvs") == 2
    assert ":1:" in capsys.readouterr().err


def test_ingest_is_reproducible(corpus, tmp_path, capsys):
    meta, frames = corpus
    a, b = tmp_path / "a.gpvs", tmp_path / "b.gpvs"
    assert _ingest(meta, frames, a) == 0
    assert _ingest(meta, frames, b) == 0
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()
    ma = (tmp_path / "a.gpvs.manifest.json").read_text()
    mb = (tmp_path / "b.gpvs.manifest.json").read_text()
    assert ma == mb


def test_ingest_stride_keeps_original_indices(corpus, tmp_path, capsys):
    meta, frames = corpus
    out = tmp_path / "strided.gpvs"
    assert _ingest(meta, frames, out, "--stride", "2") == 0
    assert json.loads(capsys.readouterr().out)["frames"] == 2
    store = open_store(out)
    assert store.frame_indices.tolist() == [0, 2]
    # timestamps follow the original frame index, not the resampled position
    assert store.frame_timestamps_ms.tolist() == [0, 67]


@pytest.fixture()
def search_store(tmp_path):
    emb = MockEmbedder(dim=DIM)
    rng = np.random.default_rng(5)
    planted = np.tile(emb.embed_text("horse on a roof"), (3, 1))

    def vids():
        yield VideoEntry(0, "bg1", "Grand Theft Auto V", 0, 30.0), rng.standard_normal((8, DIM))
        yield VideoEntry(0, "hit", "The Witcher 3: Wild Hunt", 0, 30.0), planted
        yield VideoEntry(0, "bg2", "The Witcher 3: Wild Hunt", 0, 30.0), rng.standard_normal((6, DIM))

    path = tmp_path / "s.gpvs"
    build_store(vids(), emb.spec, path)
    return path


def test_search_plants_first(search_store, capsys):
    assert main(["search", str(search_store), "horse on a roof"]) == 0
    out = capsys.readouterr().out
    lines = out.strip().splitlines()
    assert lines[0].startswith("rank")
    assert "hit / The Witcher 3: Wild Hunt" in lines[1]


def test_search_json_matches_in_process(search_store, capsys):
    assert main(["search", str(search_store), "horse on a roof", "--json",
                 "--method", "pool", "--pool-size", "3", "--k", "2"]) == 0
    got = json.loads(capsys.readouterr().out)
    store = open_store(search_store)
    want = search(
        store,
        MockEmbedder(dim=DIM),
        SearchRequest(
            query_text="horse on a roof", method=AggregationMethod.POOL, pool_size=3, k=2
        ),
    )
    assert got == json.loads(json.dumps({"results": [asdict(r) for r in want]}))


def test_search_game_accepts_alias(search_store, capsys):
    assert main(["search", str(search_store), "horse on a roof", "--game", "witcher 3", "--json"]) == 0
    got = json.loads(capsys.readouterr().out)
    assert {r["game"] for r in got["results"]} == {"The Witcher 3: Wild Hunt"}


def test_search_unknown_game_fails(search_store, capsys):
    assert main(["search", str(search_store), "x", "--game", "Pong"]) == 2
    assert "Pong" in capsys.readouterr().err


def test_search_missing_store_fails(tmp_path, capsys):
    assert main(["search", str(tmp_path / "nope.gpvs"), "x"]) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_search_empty_store_no_results(tmp_path, capsys):
    path = tmp_path / "empty.gpvs"
    build_store([], EmbedderSpec("mock", DIM), path)
    assert main(["search", str(path), "anything"]) == 0
    assert capsys.readouterr().out.strip() == "no results"


def test_eval_text_and_json(search_store, tmp_path, capsys):
    qs = tmp_path / "qs.json"
    qs.write_text(json.dumps({
        "name": "simple",
        "entries": [{"query": "horse on a roof",
                     "games": ["Grand Theft Auto V", "The Witcher 3: Wild Hunt"]}],
    }))
    store = open_store(search_store)
    hit = next(v.video_id for v in store.videos if v.submission_id == "hit")
    bg1 = next(v.video_id for v in store.videos if v.submission_id == "bg1")
    judgments = tmp_path / "j.ndjson"
    _write_ndjson(judgments, [
        {"query_text": "horse on a roof", "game": "The Witcher 3: Wild Hunt",
         "video_id": hit, "relevant": True},
        {"query_text": "horse on a roof", "game": "Grand Theft Auto V",
         "video_id": bg1, "relevant": False},
    ])

    args = ["eval", str(search_store), "--query-set", str(qs), "--judgments", str(judgments)]
    assert main(args) == 0
    text = capsys.readouterr().out
    assert "horse on a roof" in text and "Avg" in text

    assert main(args + ["--json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["config"]["metric"] == "top_k_accuracy"
    cells = {(c["query"], c["game"]): c["value"] for c in report["cells"]}
    assert cells[("horse on a roof", "The Witcher 3: Wild Hunt")] == 100.0
    assert cells[("horse on a roof", "Grand Theft Auto V")] == 0.0
    assert report["averages"]["overall"] == 50.0


def test_eval_unknown_packaged_set_fails(search_store, tmp_path, capsys):
    j = tmp_path / "j.ndjson"
    j.write_text("")
    assert main(["eval", str(search_store), "--query-set", str(tmp_path / "missing.json"),
                 "--judgments", str(j)]) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_store_info_fields(search_store, capsys):
    assert main(["store-info", str(search_store)]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["dim"] == DIM
    assert info["total_frames"] == 17
    assert info["videos"] == 3
    assert info["embedder"]["backend_id"] == "mock"
    assert info["games"] == {"Grand Theft Auto V": 1, "The Witcher 3: Wild Hunt": 2}


def test_serve_requires_store(capsys, monkeypatch):
    monkeypatch.delenv("STORE_PATH", raising=False)
    assert main(["serve"]) == 2
    assert "STORE_PATH" in capsys.readouterr().err


def test_serve_rejects_bad_bind(search_store, capsys):
    assert main(["serve", "--store", str(search_store), "--bind", "nonsense"]) == 2
    assert "bind" in capsys.readouterr().err
