"""CSV ingestion, JSON reports and polygon-chart export."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, IOFailure, ParseError
from .types import DMU, Sample

SCHEMA_ID = "kamdea.report/1"
SERIES_COLUMNS = ("ka_zero", "ka_star", "ka_tilde", "sensitivity")
SERIES_LABELS = {
    "ka_zero": "technical efficiency (0-DF)",
    "ka_star": "best technical efficiency (eps-DF)",
    "ka_tilde": "lowest efficiency (eps-DF)",
    "sensitivity": "sensitivity (eps-DF)",
}


# --------------------------------------------------------------------- CSV in

def read_sample_csv(path) -> Sample:
    """Parse ``id,x:<name>...,y:<name>...``; inputs and outputs may interleave."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8-sig")
    except FileNotFoundError:
        raise ParseError("file not found", path=path) from None
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc}", path=path) from None
    return parse_sample_csv(text, path=path)


def parse_sample_csv(text: str, path=None) -> Sample:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or not any(cell.strip() for cell in rows[0]):
        raise ParseError("missing header row", line=1, path=path)
    header = [h.strip() for h in rows[0]]
    if header[0] != "id":
        raise ParseError(f"first header column must be 'id', got {header[0]!r}", line=1, path=path)
    x_cols, y_cols = [], []
    for c, name in enumerate(header[1:], start=1):
        if name.startswith("x:") and len(name) > 2:
            x_cols.append(c)
        elif name.startswith("y:") and len(name) > 2:
            y_cols.append(c)
        else:
            raise ParseError(f"column {name!r} is neither 'x:<name>' nor 'y:<name>'",
                             line=1, path=path)
    if not x_cols:
        raise ParseError("no input column (x:<name>)", line=1, path=path)
    if not y_cols:
        raise ParseError("no output column (y:<name>)", line=1, path=path)
    names = [header[c][2:] for c in x_cols + y_cols]
    if len(set(names[:len(x_cols)])) != len(x_cols) or len(set(names[len(x_cols):])) != len(y_cols):
        raise ParseError("duplicate factor name in header", line=1, path=path)

    dmus, seen = [], {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, found {len(row)}", line=lineno, path=path)
        dmu_id = row[0].strip()
        if not dmu_id:
            raise ParseError("empty id", line=lineno, path=path)
        if dmu_id in seen:
            raise ParseError(f"duplicate id {dmu_id!r} (first seen on line {seen[dmu_id]})",
                             line=lineno, path=path)
        seen[dmu_id] = lineno
        values = []
        for c in x_cols + y_cols:
            cell = row[c].strip()
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"{header[c]}: {cell!r} is not a number", line=lineno, path=path) from None
            if not math.isfinite(v):
                raise ParseError(f"{header[c]}: value must be finite", line=lineno, path=path)
            if v < 0:
                raise ParseError(f"{header[c]}: negative value {cell}", line=lineno, path=path)
            values.append(v)
        x, y = values[:len(x_cols)], values[len(x_cols):]
        if not any(v > 0 for v in x) or not any(v > 0 for v in y):
            raise ParseError(f"DMU {dmu_id!r} needs a positive input and a positive output",
                             line=lineno, path=path)
        dmus.append(DMU(dmu_id, x, y))
    if not dmus:
        raise ParseError("no data rows", path=path)
    return Sample(tuple(dmus), tuple(names[:len(x_cols)]), tuple(names[len(x_cols):]))


def write_sample_csv(sample: Sample, path) -> None:
    """Values use ``repr`` so that reading back is exact."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id"] + [f"x:{n}" for n in sample.input_names] + [f"y:{n}" for n in sample.output_names])
    for d in sample.dmus:
        w.writerow([d.id] + [repr(float(v)) for v in d.inputs] + [repr(float(v)) for v in d.outputs])
    _write_text(path, buf.getvalue())


def _write_text(path, text):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc}") from exc


# ------------------------------------------------------------------ JSON out

def _num(v):
    if v is None:
        return None
    v = float(v)
    if not math.isfinite(v):
        return None
    r = float(f"{v:.12g}")
    return 0.0 if r == 0 else r


def _vec(a):
    return [_num(v) for v in np.asarray(a).reshape(-1)]


def _pair(sample, pair):
    return {"inputs": _vec(pair[0]), "outputs": _vec(pair[1])}


def report_to_dict(report) -> dict:
    diag = report.diagnostics
    sample = diag.sample
    rank = {i: k + 1 for k, i in enumerate(diag.order)}
    dmus = []
    for i, (ev, fl) in enumerate(zip(diag.evaluations, report.flags)):
        d = sample.dmus[i]
        sol, sc, tg = ev.solution, ev.scores, ev.targets
        scores = {
            "ka_zero": _num(sc.ka_zero),
            "ka_hat": _num(sc.ka_hat),
            "ka_star": _num(sc.ka_star),
            "ka_tilde": _num(sc.ka_tilde),
            "sensitivity": _num(sc.sensitivity),
        }
        if report.nonlinear:
            scores["ka_nonlinear"] = _num(sc.ka_nonlinear)
        dmus.append({
            "id": d.id,
            "rank": rank[i],
            "inputs": _vec(d.inputs),
            "outputs": _vec(d.outputs),
            "scores": scores,
            "classification": {
                "kind": ev.classification.kind,
                "delta": _num(ev.classification.delta_used),
                "gap": _num(ev.classification.gap),
            },
            "flags": {
                "case_i": fl.case_i,
                "case_ii": fl.case_ii,
                "case_iii": fl.case_iii,
                "case_iv": fl.case_iv,
                "zscore_ka0": _num(fl.zscore_ka0),
                "zscore_kastar": _num(fl.zscore_kastar),
                "relative_drop": _num(fl.relative_drop),
                "sensitivity_magnitude": _num(fl.sensitivity_magnitude),
            },
            "outlier": fl.any,
            "epsilon": {"minus": _vec(sol.eps_minus), "plus": _vec(sol.eps_plus)},
            "weights": {"minus": _vec(sol.w_minus), "plus": _vec(sol.w_plus)},
            "slacks": {"minus": _vec(sol.s_minus), "plus": _vec(sol.s_plus)},
            "slacks_zero_df": {"minus": _vec(ev.zero.s_minus), "plus": _vec(ev.zero.s_plus)},
            "targets": {
                "highest": _pair(sample, tg.highest),
                "best": _pair(sample, tg.best),
                "lowest": _pair(sample, tg.lowest),
            },
        })
    return {
        "schema": SCHEMA_ID,
        "config": report.config.describe(),
        "thresholds": report.thresholds.describe(),
        "sensitivity_reading": "case iv flags technically efficient DMUs with small S (1/S >= cut)",
        "n": sample.n,
        "m": sample.m,
        "p": sample.p,
        "input_names": list(sample.input_names),
        "output_names": list(sample.output_names),
        "order": [sample.dmus[i].id for i in diag.order],
        "outliers": list(report.outliers),
        "dmus": dmus,
        "note": report.note,
        "second_pass": None if report.second_pass is None else report_to_dict(report.second_pass),
    }


def report_json(report) -> str:
    return json.dumps(report_to_dict(report), indent=2, ensure_ascii=False) + "\n"


def write_report_json(report, path) -> None:
    _write_text(path, report_json(report))


_PAIR_SCHEMA = {
    "type": "object",
    "required": ["inputs", "outputs"],
    "properties": {
        "inputs": {"type": "array", "items": {"type": "number"}},
        "outputs": {"type": "array", "items": {"type": "number"}},
    },
}
_VEC_PAIR = {
    "type": "object",
    "required": ["minus", "plus"],
    "properties": {
        "minus": {"type": "array", "items": {"type": "number"}},
        "plus": {"type": "array", "items": {"type": "number"}},
    },
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema", "config", "thresholds", "n", "m", "p", "order", "outliers", "dmus",
                 "second_pass"],
    "properties": {
        "schema": {"const": SCHEMA_ID},
        "n": {"type": "integer", "minimum": 1},
        "m": {"type": "integer", "minimum": 1},
        "p": {"type": "integer", "minimum": 1},
        "order": {"type": "array", "items": {"type": "string"}},
        "outliers": {"type": "array", "items": {"type": "string"}},
        "note": {"type": ["string", "null"]},
        "second_pass": {"anyOf": [{"type": "null"}, {"$ref": "#"}]},
        "dmus": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "rank", "inputs", "outputs", "scores", "classification",
                             "flags", "outlier", "targets", "slacks"],
                "properties": {
                    "id": {"type": "string"},
                    "rank": {"type": "integer", "minimum": 1},
                    "scores": {
                        "type": "object",
                        "required": ["ka_zero", "ka_hat", "ka_star", "ka_tilde", "sensitivity"],
                        "additionalProperties": {"type": ["number", "null"]},
                    },
                    "classification": {
                        "type": "object",
                        "required": ["kind", "delta", "gap"],
                        "properties": {"kind": {"enum": ["kam_efficient", "inefficient"]}},
                    },
                    "flags": {
                        "type": "object",
                        "required": ["case_i", "case_ii", "case_iii", "case_iv"],
                        "properties": {f"case_{c}": {"type": "boolean"}
                                       for c in ("i", "ii", "iii", "iv")},
                    },
                    "outlier": {"type": "boolean"},
                    "epsilon": _VEC_PAIR,
                    "weights": _VEC_PAIR,
                    "slacks": _VEC_PAIR,
                    "slacks_zero_df": _VEC_PAIR,
                    "targets": {
                        "type": "object",
                        "required": ["highest", "best", "lowest"],
                        "properties": {k: _PAIR_SCHEMA for k in ("highest", "best", "lowest")},
                    },
                },
            },
        },
    },
}


# ------------------------------------------------------------- chart export

def series_csv(diag) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("position", "id") + SERIES_COLUMNS)
    for pos, (dmu_id, *vals) in enumerate(diag.rows(), start=1):
        w.writerow([pos, dmu_id] + [f"{v:.12g}" for v in vals])
    return buf.getvalue()


_COLORS = {"ka_zero": "#1f77b4", "ka_star": "#d62728", "ka_tilde": "#2ca02c", "sensitivity": "#9467bd"}


def series_svg(diag, width=800, height=420) -> str:
    """Four polylines over the sorted DMU position, one per score series."""
    rows = list(diag.rows())
    n = len(rows)
    left, right, top, bottom = 56, 230, 24, 48
    pw, ph = width - left - right, height - top - bottom
    ymax = max(1.0, max(max(r[1:]) for r in rows))
    ymax = math.ceil(ymax * 10) / 10

    def px(k):
        return left + (pw * k / (n - 1) if n > 1 else pw / 2)

    def py(v):
        return top + ph * (1 - v / ymax)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
    ]
    steps = int(round(ymax * 10))
    for t in range(0, steps + 1, 2 if steps > 10 else 1):
        v = t / 10
        out.append(f'<line x1="{left - 4}" y1="{py(v):.2f}" x2="{left}" y2="{py(v):.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{py(v) + 4:.2f}" text-anchor="end">{v:.1f}</text>')
    out.append(f'<text x="{left + pw / 2:.2f}" y="{height - 12}" text-anchor="middle">'
               f'DMUs sorted by technical efficiency (0-DF), n = {n}</text>')
    for c, name in enumerate(SERIES_COLUMNS):
        pts = " ".join(f"{px(k):.2f},{py(r[c + 1]):.2f}" for k, r in enumerate(rows))
        out.append(f'<polyline id="{name}" fill="none" stroke="{_COLORS[name]}" '
                   f'stroke-width="1.5" points="{pts}"/>')
        if n == 1:
            out.append(f'<circle cx="{px(0):.2f}" cy="{py(rows[0][c + 1]):.2f}" r="2.5" '
                       f'fill="{_COLORS[name]}"/>')
    lx = left + pw + 16
    for c, name in enumerate(SERIES_COLUMNS):
        ly = top + 14 + 20 * c
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 22}" y2="{ly}" stroke="{_COLORS[name]}" '
                   f'stroke-width="2"/>')
        out.append(f'<text x="{lx + 28}" y="{ly + 4}">{SERIES_LABELS[name]}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def export_polygon_chart(diag, path, format: str = "svg") -> None:
    if not diag.evaluations:
        raise ConfigurationError("cannot chart an empty series")
    if format == "csv":
        _write_text(path, series_csv(diag))
    elif format == "svg":
        _write_text(path, series_svg(diag))
    else:
        raise ConfigurationError(f"unsupported chart format {format!r} (use 'svg' or 'csv')")
