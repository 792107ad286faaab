from asdkit.metrics import EvalReport
from asdkit.report import (
    STRATA_COLUMNS,
    format_pct,
    load_report_json,
    read_csv,
    write_masking_csv,
    write_report_json,
    write_strata_csv,
    write_summary_csv,
)
from asdkit.strata import QualityStratum


def _report(**kw):
    base = dict(model="TalkNet", ensemble=False, alpha=None, map=0.5103, binary_ap=0.49,
                n_detections=10, n_positives=4)
    base.update(kw)
    return EvalReport(**base)


def test_empty_strata_give_header_only(tmp_path):
    write_strata_csv(tmp_path / "s.csv", [])
    assert (tmp_path / "s.csv").read_text() == ",".join(STRATA_COLUMNS) + "\n"


def test_one_decimal_percentages():
    assert format_pct(0.70249) == "70.2"
    assert format_pct(0.543) == "54.3"
    assert format_pct(1.0) == "100.0"


def test_summary_layout(tmp_path):
    write_summary_csv(tmp_path / "t.csv", [_report(), _report(model="TalkNet + SL-ASD", ensemble=True,
                                                                alpha=0.5, map=0.702)])
    rows = read_csv(tmp_path / "t.csv")
    assert rows[0] == {"model": "TalkNet", "ensemble": "false", "alpha": "", "map_pct": "51.0"}
    assert rows[1]["ensemble"] == "true" and rows[1]["map_pct"] == "70.2"


def test_json_roundtrip(tmp_path):
    rep = _report(pr={"thresholds": [0.9], "precision": [1.0], "recall": [0.25]})
    write_report_json(tmp_path / "r.json", rep)
    assert load_report_json(tmp_path / "r.json") == rep


def test_strata_and_masking_rows(tmp_path):
    st = QualityStratum(0, (("c", "t"),), (0.1, 0.3), {"sync": 0.5, "fva": 0.75})
    write_strata_csv(tmp_path / "s.csv", [st])
    rows = read_csv(tmp_path / "s.csv")
    assert [r["method"] for r in rows] == ["fva", "sync"]
    write_masking_csv(tmp_path / "m.csv", [(0.25, "fva", 0.5, 0.0)])
    assert read_csv(tmp_path / "m.csv") == [{"p_mask": "0.25", "method": "fva", "ap_mean": "0.5", "ap_std": "0.0"}]
