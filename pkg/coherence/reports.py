"""CSV, JSON and SVG writers for command output"""
import csv
import json
import math
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Union

import numpy as np

from utils.logger import get_logger

logger = get_logger(__name__)

PathLike = Union[str, Path]

SVG_WIDTH = 640
SVG_HEIGHT = 440
SVG_PAD = 56


def format_value(value) -> str:
    """17 significant digits for floats, lowercase booleans, empty for None."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Dict]) -> int:
    """Write rows (dicts keyed by header) to path; returns the row count."""
    path = Path(path)
    count = 0
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(row.get(column)) for column in header])
            count += 1
    logger.info(f"Wrote {count} rows to {path}")
    return count


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def write_json(path: PathLike, document: Dict) -> None:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(document), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info(f"Wrote report to {path}")


def _polyline(points: List[tuple]) -> str:
    return " ".join(f"{x:.2f},{y:.2f}" for x, y in points)


def render_fig2_svg(deltas: Sequence[float], lower: Sequence[float], upper: Sequence[float],
                    title: str = "") -> str:
    """
    Boundary curves of the two regions over log δ.

    Region A (below the lower curve) is shaded red and region B (above the
    upper curve) blue. The √𝓕 axis ends at twice the larger of the A
    boundary maximum and the B boundary minimum.
    """
    deltas = np.asarray(deltas, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    y_max = 2.0 * max(float(np.max(lower)), float(np.min(upper)), 1.0)

    log_lo, log_hi = math.log10(deltas[0]), math.log10(deltas[-1])
    span = (log_hi - log_lo) or 1.0
    plot_w = SVG_WIDTH - 2 * SVG_PAD
    plot_h = SVG_HEIGHT - 2 * SVG_PAD

    def x_of(delta):
        return SVG_PAD + (math.log10(delta) - log_lo) / span * plot_w

    def y_of(value):
        return SVG_PAD + plot_h - min(value, y_max) / y_max * plot_h

    bottom = SVG_PAD + plot_h
    lower_pts = [(x_of(d), y_of(v)) for d, v in zip(deltas, lower)]
    upper_pts = [(x_of(d), y_of(v)) for d, v in zip(deltas, upper)]
    region_a = [(lower_pts[0][0], bottom)] + lower_pts + [(lower_pts[-1][0], bottom)]
    region_b = [(upper_pts[0][0], SVG_PAD)] + upper_pts + [(upper_pts[-1][0], SVG_PAD)]

    ticks = []
    for exponent in range(math.floor(log_lo), math.ceil(log_hi) + 1):
        if log_lo - 1e-12 <= exponent <= log_hi + 1e-12:
            x = x_of(10.0 ** exponent)
            ticks.append(f'<line x1="{x:.2f}" y1="{bottom}" x2="{x:.2f}" y2="{bottom + 5}" stroke="black"/>'
                         f'<text x="{x:.2f}" y="{bottom + 20}" font-size="12" text-anchor="middle">'
                         f'1e{exponent}</text>')
    for k in range(5):
        value = y_max * k / 4
        y = y_of(value)
        ticks.append(f'<line x1="{SVG_PAD - 5}" y1="{y:.2f}" x2="{SVG_PAD}" y2="{y:.2f}" stroke="black"/>'
                     f'<text x="{SVG_PAD - 8}" y="{y + 4:.2f}" font-size="12" text-anchor="end">'
                     f'{value:.3g}</text>')

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" '
        f'viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}">',
        f'<rect x="{SVG_PAD}" y="{SVG_PAD}" width="{plot_w}" height="{plot_h}" fill="white" stroke="black"/>',
        f'<polygon points="{_polyline(region_a)}" fill="#e41a1c" fill-opacity="0.25"/>',
        f'<polygon points="{_polyline(region_b)}" fill="#377eb8" fill-opacity="0.25"/>',
        f'<polyline points="{_polyline(lower_pts)}" fill="none" stroke="#e41a1c" stroke-width="2"/>',
        f'<polyline points="{_polyline(upper_pts)}" fill="none" stroke="#377eb8" stroke-width="2"/>',
        *ticks,
        f'<text x="{SVG_WIDTH / 2:.0f}" y="{SVG_HEIGHT - 12}" font-size="14" text-anchor="middle">δ</text>',
        f'<text x="16" y="{SVG_HEIGHT / 2:.0f}" font-size="14" text-anchor="middle" '
        f'transform="rotate(-90 16 {SVG_HEIGHT / 2:.0f})">√F(ρ_E)</text>',
        f'<text x="{SVG_WIDTH / 2:.0f}" y="{SVG_PAD / 2:.0f}" font-size="14" text-anchor="middle">{title}</text>',
        "</svg>",
    ]
    return "\n".join(parts) + "\n"


def write_svg(path: PathLike, markup: str) -> None:
    path = Path(path)
    path.write_text(markup, encoding="utf-8")
    logger.info(f"Wrote figure to {path}")
