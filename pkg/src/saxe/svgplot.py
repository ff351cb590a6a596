"""Minimal deterministic SVG charts with sibling TSV data files.

Charts are static and timestamp-free so identical inputs produce identical
bytes.  Every number rendered as chart text is written with the same
formatter as the sibling TSV, which carries the full underlying data.
"""

from __future__ import annotations

import logging
from xml.sax.saxutils import escape

from .utils import fmt_num

logger = logging.getLogger(__name__)

WIDTH = 840
HEIGHT = 420
MARGIN = 60

_PALETTE = ("#1f6f8b", "#c94f4f", "#5a9e6f", "#8a63a8", "#c98f2e", "#5b5b5b")


def write_tsv(path, header: list[str], rows: list[list[str]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(row) + "\n")


def _svg_doc(body: list[str], title: str) -> str:
    head = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH // 2}" y="24" text-anchor="middle" font-size="15" '
        f'font-family="sans-serif">{escape(title)}</text>',
    ]
    return "\n".join(head + body + ["</svg>"]) + "\n"


def _scale(lo: float, hi: float):
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    lo -= 0.05 * span
    hi += 0.05 * span

    def to_y(v: float) -> float:
        return HEIGHT - MARGIN - (v - lo) / (hi - lo) * (HEIGHT - 2 * MARGIN)

    return to_y


def line_chart(
    svg_path,
    tsv_path,
    title: str,
    x_labels: list[str],
    series: dict[str, list[float | None]],
    ci: dict[str, list[float | None]] | None = None,
) -> None:
    """Line chart over categorical x labels, one line per series.

    Points carry their value as a text label; optional symmetric CI
    half-widths draw whiskers.  The sibling TSV holds (x, series, value,
    ci) rows for every point.
    """
    rows = []
    for name in sorted(series):
        values = series[name]
        half = (ci or {}).get(name, [None] * len(values))
        for x, v, c in zip(x_labels, values, half):
            if v is None:
                continue
            rows.append([x, name, fmt_num(v), "" if c is None else fmt_num(c)])
    write_tsv(tsv_path, ["x", "series", "value", "ci95"], rows)
    if not rows:
        logger.warning("line chart %s: no data, writing empty chart", svg_path)
        with open(svg_path, "w", encoding="utf-8") as fh:
            fh.write(_svg_doc(["<!-- no data -->"], title))
        return

    all_vals = []
    for name in series:
        half = (ci or {}).get(name, [None] * len(series[name]))
        for v, c in zip(series[name], half):
            if v is None:
                continue
            all_vals.append(v - (c or 0.0))
            all_vals.append(v + (c or 0.0))
    to_y = _scale(min(all_vals), max(all_vals))
    n = max(len(x_labels), 1)
    step = (WIDTH - 2 * MARGIN) / max(n - 1, 1)
    to_x = lambda i: MARGIN + i * step  # noqa: E731

    body = []
    label_every = max(1, n // 8)
    for i, x in enumerate(x_labels):
        if i % label_every == 0 or i == n - 1:
            body.append(
                f'<text x="{to_x(i):.1f}" y="{HEIGHT - MARGIN + 18}" text-anchor="middle" '
                f'font-size="10" font-family="sans-serif">{escape(x)}</text>'
            )
    for si, name in enumerate(sorted(series)):
        color = _PALETTE[si % len(_PALETTE)]
        values = series[name]
        half = (ci or {}).get(name, [None] * len(values))
        pts = [
            (to_x(i), to_y(v), v, half[i])
            for i, v in enumerate(values)
            if v is not None
        ]
        if len(pts) > 1:
            path = " ".join(f"{x:.1f},{y:.1f}" for x, y, _, _ in pts)
            body.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for x, y, v, c in pts:
            body.append(f'<circle cx="{x:.1f}" cy="{y:.1f}" r="2.5" fill="{color}"/>')
            if c is not None:
                body.append(
                    f'<line x1="{x:.1f}" y1="{to_y(v - c):.1f}" x2="{x:.1f}" '
                    f'y2="{to_y(v + c):.1f}" stroke="{color}" stroke-width="1"/>'
                )
            body.append(
                f'<text x="{x:.1f}" y="{y - 6:.1f}" text-anchor="middle" font-size="8" '
                f'font-family="sans-serif" fill="{color}">{escape(fmt_num(v))}</text>'
            )
        body.append(
            f'<text x="{WIDTH - MARGIN}" y="{40 + 14 * si}" text-anchor="end" font-size="11" '
            f'font-family="sans-serif" fill="{color}">{escape(name)}</text>'
        )
    with open(svg_path, "w", encoding="utf-8") as fh:
        fh.write(_svg_doc(body, title))


def bar_chart(
    svg_path,
    tsv_path,
    title: str,
    bars: list[tuple[str, float, float | None]],
) -> None:
    """Bar chart with optional CI whiskers; bars are (label, value, ci95)."""
    rows = [[label, fmt_num(v), "" if c is None else fmt_num(c)] for label, v, c in bars]
    write_tsv(tsv_path, ["label", "value", "ci95"], rows)
    if not bars:
        logger.warning("bar chart %s: no data, writing empty chart", svg_path)
        with open(svg_path, "w", encoding="utf-8") as fh:
            fh.write(_svg_doc(["<!-- no data -->"], title))
        return

    extents = [0.0]
    for _, v, c in bars:
        extents.append(v - (c or 0.0))
        extents.append(v + (c or 0.0))
    to_y = _scale(min(extents), max(extents))
    n = len(bars)
    slot = (WIDTH - 2 * MARGIN) / n
    bar_w = slot * 0.6
    body = [
        f'<line x1="{MARGIN}" y1="{to_y(0.0):.1f}" x2="{WIDTH - MARGIN}" y2="{to_y(0.0):.1f}" '
        f'stroke="#999" stroke-width="1" stroke-dasharray="3,3"/>'
    ]
    for i, (label, v, c) in enumerate(bars):
        color = _PALETTE[i % len(_PALETTE)]
        cx = MARGIN + slot * (i + 0.5)
        y0, y1 = sorted((to_y(0.0), to_y(v)))
        body.append(
            f'<rect x="{cx - bar_w / 2:.1f}" y="{y0:.1f}" width="{bar_w:.1f}" '
            f'height="{max(y1 - y0, 0.5):.1f}" fill="{color}" fill-opacity="0.7"/>'
        )
        if c is not None:
            body.append(
                f'<line x1="{cx:.1f}" y1="{to_y(v - c):.1f}" x2="{cx:.1f}" '
                f'y2="{to_y(v + c):.1f}" stroke="#333" stroke-width="1.2"/>'
            )
        body.append(
            f'<text x="{cx:.1f}" y="{to_y(v) - 6:.1f}" text-anchor="middle" font-size="9" '
            f'font-family="sans-serif">{escape(fmt_num(v))}</text>'
        )
        body.append(
            f'<text x="{cx:.1f}" y="{HEIGHT - MARGIN + 18}" text-anchor="middle" font-size="9" '
            f'font-family="sans-serif">{escape(label)}</text>'
        )
    with open(svg_path, "w", encoding="utf-8") as fh:
        fh.write(_svg_doc(body, title))
