"""CSV/JSON emission and small deterministic SVG plots."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from xml.sax.saxutils import escape


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    return v


def write_csv(path: str | Path, rows: list[dict], header: list[str] | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = header or (list(rows[0]) if rows else [])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
        w.writerow(header)
        for r in rows:
            w.writerow([_cell(r.get(k, "")) for k in header])
    return path


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "item"):
        return _jsonable(v.item())
    return v


def write_json(path: str | Path, payload) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def write_rows(prefix: str, rows: list[dict], fmt: str, suffix: str = "") -> Path:
    if fmt == "json":
        return write_json(f"{prefix}{suffix}.json", rows)
    return write_csv(f"{prefix}{suffix}.csv", rows)


# plotting -----------------------------------------------------------------------
WIDTH, HEIGHT, MARGIN = 480, 360, 56


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def emit_plot(rows: list[dict], spec: dict, path: str | Path | None = None) -> str:
    """Render rows as a polyline SVG.

    ``spec`` keys: x, y (column names), kind ('linear', 'loglog', 'semilog'),
    title, and optional reference (a constant y drawn dashed) and metadata
    (dict written into a leading comment).  Semilog plots show log10 of y.
    """
    if not rows:
        raise ValueError("emit_plot needs at least one row")
    kind = spec.get("kind", "linear")
    xs = [float(r[spec["x"]]) for r in rows]
    ys = [float(r[spec["y"]]) for r in rows]
    tx = math.log10 if kind == "loglog" else (lambda v: v)
    ty = math.log10 if kind in ("loglog", "semilog") else (lambda v: v)
    pts = [(tx(x), ty(y)) for x, y in zip(xs, ys) if (kind == "linear" or y > 0) and (kind != "loglog" or x > 0)]
    if not pts:
        raise ValueError("no plottable points")
    ref = spec.get("reference")
    x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
    yvals = [p[1] for p in pts] + ([ty(ref)] if ref is not None else [])
    y0, y1 = min(yvals), max(yvals)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1

    def sx(v):
        return MARGIN + (v - x0) / (x1 - x0) * (WIDTH - 2 * MARGIN)

    def sy(v):
        return HEIGHT - MARGIN - (v - y0) / (y1 - y0) * (HEIGHT - 2 * MARGIN)

    xlabel = spec["x"] if kind != "loglog" else f"log10 {spec['x']}"
    ylabel = spec["y"] if kind == "linear" else f"log10 {spec['y']}"
    meta = spec.get("metadata", {})
    out = ['<?xml version="1.0" encoding="UTF-8"?>']
    out.append("<!-- " + escape(json.dumps(meta, sort_keys=True)).replace("--", "- -") + " -->")
    out.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">')
    out.append(f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>')
    out.append(
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>'
    )
    out.append(f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>')
    for v, anchor in ((x0, "start"), (x1, "end")):
        out.append(
            f'<text x="{_fmt(sx(v))}" y="{HEIGHT - MARGIN + 16}" font-size="11" text-anchor="{anchor}">{_fmt(v)}</text>'
        )
    for v in (y0, y1):
        out.append(f'<text x="{MARGIN - 4}" y="{_fmt(sy(v))}" font-size="11" text-anchor="end">{_fmt(v)}</text>')
    out.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 12}" font-size="12" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(
        f'<text x="14" y="{HEIGHT / 2}" font-size="12" text-anchor="middle" transform="rotate(-90 14 {HEIGHT / 2})">{escape(ylabel)}</text>'
    )
    if spec.get("title"):
        out.append(f'<text x="{WIDTH / 2}" y="22" font-size="14" text-anchor="middle">{escape(spec["title"])}</text>')
    if ref is not None:
        yr = _fmt(sy(ty(ref)))
        out.append(
            f'<line x1="{MARGIN}" y1="{yr}" x2="{WIDTH - MARGIN}" y2="{yr}" stroke="gray" stroke-dasharray="4 3"/>'
        )
    poly = " ".join(f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in pts)
    out.append(f'<polyline points="{poly}" fill="none" stroke="steelblue" stroke-width="1.5"/>')
    for a, b in pts:
        out.append(f'<circle cx="{_fmt(sx(a))}" cy="{_fmt(sy(b))}" r="2.5" fill="steelblue"/>')
    out.append("</svg>")
    svg = "\n".join(out) + "\n"
    if path is not None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(svg, encoding="utf-8")
    return svg
