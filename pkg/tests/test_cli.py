import json
import subprocess
import sys

import numpy as np
import pytest

from asdkit.cli import parse_grid, run
from asdkit.datamodel import FrameScoreStream, load_manifest, write_manifest
from asdkit.report import read_csv


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    (d / "sim.toml").write_text("n_clips = 3\nduration_s = 15.0\n")
    assert run(["simulate", "--config", str(d / "sim.toml"), "--seed", "4", "--out", str(d / "b")]) == 0
    return d


def _files(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir()) if p.is_file()}


def test_smoke_pipeline(workdir):
    d, b = workdir, str(workdir / "b")
    steps = [
        ["validate", "--in", b, "--scores", f"{b}/sync_scores.jsonl"],
        ["fva", "train", "--bundle", b, "--out", f"{d}/head.fvah", "--seed", "0", "--epochs", "2",
         "--lr", "1e-3", "--d", "16", "--loss-out", f"{d}/loss.csv"],
        ["fva", "score", "--bundle", b, "--params", f"{d}/head.fvah", "--out", f"{d}/matches.jsonl"],
        ["project", "--bundle", b, "--matches", f"{d}/matches.jsonl", "--out", f"{d}/assoc.jsonl"],
        ["fuse", "--alpha", "0.5", "--sync", f"{b}/sync_scores.jsonl", "--assoc", f"{d}/assoc.jsonl",
         "--out", f"{d}/ens.jsonl"],
        ["eval", "--scores", f"{d}/ens.jsonl", "--labels", f"{b}/labels.jsonl", "--model", "sync+fva",
         "--ensemble", "--alpha", "0.5", "--out", f"{d}/report.json", "--csv", f"{d}/summary.csv"],
        ["eval", "--scores", f"{b}/sync_scores.jsonl", "--labels", f"{b}/labels.jsonl", "--model", "sync",
         "--out", f"{d}/sync.json"],
        ["sweep", "--labels", f"{b}/labels.jsonl", "--sync", f"{b}/sync_scores.jsonl", "--assoc",
         f"{d}/assoc.jsonl", "--grid", "0:1:0.25", "--out", f"{d}/sweep.csv"],
        ["stratify", "--bundle", b, "--method", f"sync={b}/sync_scores.jsonl", "--method",
         f"fva={d}/assoc.jsonl", "--bins", "3", "--out", f"{d}/strata.csv"],
        ["mask-sweep", "--bundle", b, "--sync", f"{b}/sync_scores.jsonl", "--matches", f"{d}/matches.jsonl",
         "--grid", "0,0.5,1", "--trials", "2", "--seed", "1", "--out", f"{d}/masking.csv"],
        ["report", "--reports", f"{d}/sync.json", f"{d}/report.json", "--out", f"{d}/table.csv"],
    ]
    for argv in steps:
        assert run(argv) == 0, argv
    report = json.loads((d / "report.json").read_text())
    assert 0.0 <= report["map"] <= 1.0 and report["ensemble"] is True
    table = read_csv(d / "table.csv")
    assert [r["model"] for r in table] == ["sync", "sync+fva"]
    assert len(read_csv(d / "sweep.csv")) == 5
    assert len(read_csv(d / "strata.csv")) == 6
    assert len(read_csv(d / "masking.csv")) == 9


def test_missing_required_flag_exits_2(capsys):
    assert run(["fuse", "--alpha", "0.5"]) == 2
    assert "usage:" in capsys.readouterr().err


def test_mismatched_labels_exit_1(workdir, tmp_path, capsys):
    b = workdir / "b"
    streams = load_manifest(b / "sync_scores.jsonl", "scores")
    first = streams[0]
    streams[0] = FrameScoreStream(first.clip_id, first.track_id, first.scores[:-1], first.source)
    write_manifest(tmp_path / "short.jsonl", streams)
    code = run(["eval", "--scores", str(tmp_path / "short.jsonl"), "--labels", str(b / "labels.jsonl"),
                "--out", str(tmp_path / "r.json")])
    assert code == 1
    assert "LengthMismatch" in capsys.readouterr().err
    assert not (tmp_path / "r.json").exists()


def test_validate_reports_findings(workdir, tmp_path, capsys):
    b = workdir / "b"
    streams = load_manifest(b / "sync_scores.jsonl", "scores")
    streams.append(FrameScoreStream("nowhere", "t", np.zeros(3)))
    write_manifest(tmp_path / "extra.jsonl", streams)
    assert run(["validate", "--in", str(b), "--scores", str(tmp_path / "extra.jsonl")]) == 1
    assert "nowhere/t" in capsys.readouterr().err


def test_config_file_supplies_defaults_and_flags_win(workdir, tmp_path):
    b = workdir / "b"
    cfg = tmp_path / "fuse.toml"
    cfg.write_text(f'alpha = 0.0\nsync = "{b}/sync_scores.jsonl"\nassoc = "{b}/sync_scores.jsonl"\n')
    assert run(["fuse", "--config", str(cfg), "--out", str(tmp_path / "a.jsonl")]) == 0
    assert run(["fuse", "--config", str(cfg), "--alpha", "1", "--out", str(tmp_path / "b.jsonl")]) == 0
    assert (tmp_path / "a.jsonl").read_bytes() == (b / "sync_scores.jsonl").read_bytes().replace(b'"sync"', b'"ens"')
    bad = tmp_path / "bad.toml"
    bad.write_text("nonsense = 1\n")
    assert run(["fuse", "--config", str(bad), "--out", str(tmp_path / "c.jsonl")]) == 2


def test_thread_count_does_not_change_outputs(tmp_path, monkeypatch):
    outs = []
    for threads in ("1", "3"):
        monkeypatch.setenv("ASDKIT_THREADS", threads)
        out = tmp_path / f"t{threads}"
        assert run(["simulate", "--seed", "2", "--n-clips", "4", "--out", str(out)]) == 0
        outs.append(_files(out))
    assert outs[0] == outs[1]


def test_commands_do_not_touch_inputs(workdir, tmp_path):
    b = workdir / "b"
    before = _files(b)
    run(["stratify", "--bundle", str(b), "--method", f"sync={b}/sync_scores.jsonl", "--bins", "2",
         "--out", str(tmp_path / "s.csv")])
    assert _files(b) == before


def test_parse_grid():
    assert parse_grid("0:1:0.25") == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert parse_grid("0.1,0.2") == [0.1, 0.2]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "asdkit", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("asdkit ")
