"""Plain SVG output: a route drawing and the objective-vs-V chart."""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

from .instance import Instance
from .solver import Solution

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


class ResultsParseError(ValueError):
    """Results input lacks the columns or numbers the chart needs."""


def _f(x: float) -> str:
    return f"{x:.2f}"


def _layout(instance: Instance) -> dict[int, tuple[float, float]]:
    if all(v in instance.coords for v in instance.graph.nodes):
        return {v: instance.coords[v] for v in instance.graph.nodes}
    # no stored coordinates: fall back to a circle
    n = instance.graph.n_nodes
    return {
        v: (100 * math.cos(2 * math.pi * k / n), 100 * math.sin(2 * math.pi * k / n))
        for k, v in enumerate(instance.graph.nodes)
    }


def render_route_svg(instance: Instance, solution: Solution, size: int = 480) -> str:
    g = instance.graph
    for k in solution.walk:
        if not 0 <= k < g.n_arcs:
            raise ValueError(f"walk references unknown arc {k}")
    pts = _layout(instance)
    xs = [p[0] for p in pts.values()]
    ys = [p[1] for p in pts.values()]
    span = max(max(xs) - min(xs), max(ys) - min(ys)) or 1.0
    margin = 40
    scale = (size - 2 * margin) / span

    def at(v):
        x, y = pts[v]
        return margin + (x - min(xs)) * scale, size - margin - (y - min(ys)) * scale

    required = set(instance.required)
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        "<defs><marker id=\"head\" markerWidth=\"8\" markerHeight=\"8\" refX=\"7\" refY=\"3\" orient=\"auto\">"
        '<path d="M0,0 L0,6 L7,3 z" fill="#d62728"/></marker></defs>',
        '<rect width="100%" height="100%" fill="white"/>',
        '<g class="arcs" stroke="#cccccc" stroke-width="1">',
    ]
    for arc in g.arcs:
        (x1, y1), (x2, y2) = at(arc.tail), at(arc.head)
        lines.append(f'<line class="arc" x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}"/>')
    lines.append("</g>")
    lines.append('<g class="route" stroke="#d62728" stroke-width="2.5" marker-end="url(#head)">')
    for step, k in enumerate(solution.walk, start=1):
        arc = g.arcs[k]
        (x1, y1), (x2, y2) = at(arc.tail), at(arc.head)
        lines.append(f'<line class="walk" x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}"/>')
    lines.append("</g>")
    lines.append('<g class="labels" font-family="sans-serif" font-size="11" fill="#d62728">')
    for step, k in enumerate(solution.walk, start=1):
        arc = g.arcs[k]
        (x1, y1), (x2, y2) = at(arc.tail), at(arc.head)
        lines.append(f'<text class="order" x="{_f((x1 + x2) / 2 + 4)}" y="{_f((y1 + y2) / 2 - 4)}">{step}</text>')
    lines.append("</g>")
    lines.append('<g class="nodes" font-family="sans-serif" font-size="12" text-anchor="middle">')
    for v in g.nodes:
        x, y = at(v)
        if v == 0:
            kind, fill = "depot", "#222222"
        elif v in required:
            kind, fill = "required", "#1f77b4"
        else:
            kind, fill = "steiner", "#ffffff"
        lines.append(f'<circle class="node {kind}" cx="{_f(x)}" cy="{_f(y)}" r="9" fill="{fill}" stroke="#222222"/>')
        colour = "#222222" if kind == "steiner" else "#ffffff"
        lines.append(f'<text x="{_f(x)}" y="{_f(y + 4)}" fill="{colour}">{v}</text>')
    lines.append("</g>")
    title = f"objective {solution.objective:.2f}" if solution.feasible else "infeasible"
    lines.append(f'<text x="{margin}" y="20" font-family="sans-serif" font-size="13">{escape(title)}</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _rows_from(results) -> list[Mapping[str, str]]:
    if isinstance(results, (str, Path)):
        path = Path(results)
        if not path.exists():
            raise ResultsParseError(f"results file {path} not found")
        text = path.read_text(encoding="utf-8")
        reader = csv.DictReader(io.StringIO(text))
        if reader.fieldnames is None:
            raise ResultsParseError("results file is empty")
        return list(reader)
    out = []
    for row in results:
        if hasattr(row, "__dataclass_fields__"):
            from dataclasses import asdict

            row = asdict(row)
        if not isinstance(row, Mapping):
            raise ResultsParseError(f"cannot read a results row from {type(row).__name__}")
        out.append(row)
    return out


def scaling_series(results) -> dict[str, list[tuple[int, float]]]:
    """variant -> [(V, mean of the rows' of_avg)] over rows with a value."""
    acc: dict[tuple[str, int], list[float]] = {}
    for k, row in enumerate(_rows_from(results)):
        try:
            V = int(row["V"])
            variant = str(row["variant"])
            raw = row["of_avg"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ResultsParseError(f"row {k}: missing or malformed V/variant/of_avg ({exc})") from exc
        if raw in ("", None):
            continue
        try:
            value = float(raw)
        except (TypeError, ValueError) as exc:
            raise ResultsParseError(f"row {k}: of_avg {raw!r} is not a number") from exc
        acc.setdefault((variant, V), []).append(value)
    series: dict[str, list[tuple[int, float]]] = {}
    for (variant, V), vals in sorted(acc.items(), key=lambda kv: (kv[0][0], kv[0][1])):
        series.setdefault(variant, []).append((V, math.fsum(vals) / len(vals)))
    return series


def scaling_csv(series: Mapping[str, Sequence[tuple[int, float]]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["V", "variant", "of_avg"])
    for variant in sorted(series):
        for V, value in series[variant]:
            w.writerow([V, variant, repr(value)])
    return buf.getvalue()


def scaling_svg(series: Mapping[str, Sequence[tuple[int, float]]], width: int = 560, height: int = 360) -> str:
    pts = [p for s in series.values() for p in s]
    vs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    x0, x1 = min(vs), max(vs)
    y0, y1 = 0.0, max(ys) * 1.1 or 1.0
    left, right, top, bottom = 60, 130, 20, 40

    def sx(v):
        return left + (v - x0) / ((x1 - x0) or 1) * (width - left - right)

    def sy(y):
        return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{left}" y1="{_f(sy(y0))}" x2="{width - right}" y2="{_f(sy(y0))}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{_f(sy(y0))}" stroke="black"/>',
        '<g font-family="sans-serif" font-size="11" text-anchor="middle">',
    ]
    for v in sorted(set(vs)):
        out.append(f'<text x="{_f(sx(v))}" y="{height - bottom + 16}">{v}</text>')
    out.append(f'<text x="{(left + width - right) / 2}" y="{height - 6}">V</text>')
    out.append("</g>")
    for k, variant in enumerate(sorted(series)):
        colour = PALETTE[k % len(PALETTE)]
        coords = " ".join(f"{_f(sx(v))},{_f(sy(y))}" for v, y in series[variant])
        out.append(
            f'<polyline class="series" data-variant="{escape(variant)}" fill="none" stroke="{colour}" '
            f'stroke-width="2" points="{coords}"/>'
        )
        out.append(
            f'<text x="{width - right + 8}" y="{top + 16 * (k + 1)}" font-family="sans-serif" font-size="11" '
            f'fill="{colour}">{escape(variant)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_scaling_plot(results, out_prefix=None) -> tuple[str, str | None]:
    """CSV (V, variant, of_avg) and, given at least two V values, an SVG chart.

    With ``out_prefix`` the texts are also written to ``<prefix>.csv`` and
    ``<prefix>.svg``.
    """
    series = scaling_series(results)
    text_csv = scaling_csv(series)
    n_v = len({V for s in series.values() for V, _ in s})
    text_svg = scaling_svg(series) if n_v >= 2 else None
    if out_prefix is not None:
        prefix = Path(out_prefix)
        prefix.parent.mkdir(parents=True, exist_ok=True)
        prefix.with_suffix(".csv").write_text(text_csv, encoding="utf-8")
        if text_svg is not None:
            prefix.with_suffix(".svg").write_text(text_svg, encoding="utf-8")
    return text_csv, text_svg
