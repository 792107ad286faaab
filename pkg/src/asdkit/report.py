"""CSV/JSON artifacts: summary table, strata table, masking table."""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Sequence

from .metrics import EvalReport
from .strata import QualityStratum

SUMMARY_COLUMNS = ("model", "ensemble", "alpha", "map_pct")
STRATA_COLUMNS = ("bin_index", "quality_lo", "quality_hi", "method", "ap")
MASKING_COLUMNS = ("p_mask", "method", "ap_mean", "ap_std")
SWEEP_COLUMNS = ("alpha", "score")


def format_pct(fraction: float) -> str:
    return f"{100.0 * fraction:.1f}"


def _num(x: float) -> str:
    return repr(float(x))


def _write(path, columns: Sequence[str], rows: Iterable[Sequence]) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow(row)


def summary_rows(reports: Iterable[EvalReport]) -> list[tuple]:
    return [
        (r.model, "true" if r.ensemble else "false", "" if r.alpha is None else _num(r.alpha), format_pct(r.map))
        for r in reports
    ]


def write_summary_csv(path, reports: Iterable[EvalReport]) -> None:
    _write(path, SUMMARY_COLUMNS, summary_rows(reports))


def write_strata_csv(path, strata: Iterable[QualityStratum]) -> None:
    rows = []
    for st in strata:
        lo, hi = st.quality_range
        for method in sorted(st.ap):
            rows.append((st.bin_index, _num(lo), _num(hi), method, _num(st.ap[method])))
    _write(path, STRATA_COLUMNS, rows)


def write_masking_csv(path, rows: Iterable[tuple[float, str, float, float]]) -> None:
    _write(path, MASKING_COLUMNS, [(_num(p), m, _num(mu), _num(sd)) for p, m, mu, sd in rows])


def write_sweep_csv(path, table: Iterable[tuple[float, float]]) -> None:
    _write(path, SWEEP_COLUMNS, [(_num(a), _num(s)) for a, s in table])


def read_csv(path) -> list[dict]:
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def write_report_json(path, report: EvalReport) -> None:
    Path(path).write_text(report.to_json() + "\n", encoding="utf-8")


def load_report_json(path) -> EvalReport:
    return EvalReport.from_json(Path(path).read_text(encoding="utf-8"))


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")
