# FILE: src/utils/svg_generator.py
# Plain SVG line charts, one polyline per series, emitted as text.

import logging
from pathlib import Path
from typing import Dict, Sequence
from xml.sax.saxutils import escape

from src.core.error_handler import MVRPIOError

logger = logging.getLogger("SvgGenerator")

CHART_WIDTH = 640
CHART_HEIGHT = 360
MARGIN_LEFT = 60
MARGIN_RIGHT = 110
MARGIN_TOP = 30
MARGIN_BOTTOM = 40

SERIES_COLORS = ("#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd")


class LineChart:
    """Line chart of y against frame index

    Args:
        title: Chart title
        y_label: Ordinate label including the unit
        series: Name -> (x values, y values); missing points are passed as None
    """

    def __init__(self, title: str, y_label: str, series: Dict[str, tuple]):
        self.title = title
        self.y_label = y_label
        self.series = series

    def _bounds(self):
        xs = [x for xv, _ in self.series.values() for x in xv]
        ys = [y for _, yv in self.series.values() for y in yv if y is not None]
        x_min, x_max = (min(xs), max(xs)) if xs else (0.0, 1.0)
        y_min, y_max = (min(ys), max(ys)) if ys else (-1.0, 1.0)
        if x_max == x_min:
            x_max = x_min + 1.0
        if y_max == y_min:
            y_min, y_max = y_min - 1.0, y_max + 1.0
        return x_min, x_max, y_min, y_max

    def _points(self, xs: Sequence[float], ys: Sequence[float], bounds) -> str:
        x_min, x_max, y_min, y_max = bounds
        plot_w = CHART_WIDTH - MARGIN_LEFT - MARGIN_RIGHT
        plot_h = CHART_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
        coords = []
        for x, y in zip(xs, ys):
            if y is None:
                continue
            px = MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w
            py = MARGIN_TOP + (y_max - y) / (y_max - y_min) * plot_h
            coords.append(f"{px:.3f},{py:.3f}")
        return " ".join(coords)

    def render(self) -> str:
        bounds = self._bounds()
        x_min, x_max, y_min, y_max = bounds
        bottom = CHART_HEIGHT - MARGIN_BOTTOM
        right = CHART_WIDTH - MARGIN_RIGHT
        lines = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{CHART_WIDTH}" height="{CHART_HEIGHT}" '
            f'viewBox="0 0 {CHART_WIDTH} {CHART_HEIGHT}">',
            f'<rect x="0" y="0" width="{CHART_WIDTH}" height="{CHART_HEIGHT}" fill="white"/>',
            f'<text x="{CHART_WIDTH / 2:.1f}" y="18" text-anchor="middle" font-size="14">{escape(self.title)}</text>',
            f'<line x1="{MARGIN_LEFT}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>',
            f'<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" y2="{bottom}" stroke="black"/>',
            f'<text x="{MARGIN_LEFT}" y="{bottom + 16}" font-size="10">{x_min:g}</text>',
            f'<text x="{right}" y="{bottom + 16}" text-anchor="end" font-size="10">{x_max:g}</text>',
            f'<text x="{(MARGIN_LEFT + right) / 2:.1f}" y="{CHART_HEIGHT - 8}" text-anchor="middle" '
            f'font-size="11">frame k</text>',
            f'<text x="{MARGIN_LEFT - 4}" y="{MARGIN_TOP + 4}" text-anchor="end" font-size="10">{y_max:.3g}</text>',
            f'<text x="{MARGIN_LEFT - 4}" y="{bottom}" text-anchor="end" font-size="10">{y_min:.3g}</text>',
            f'<text x="14" y="{(MARGIN_TOP + bottom) / 2:.1f}" font-size="11" '
            f'transform="rotate(-90 14 {(MARGIN_TOP + bottom) / 2:.1f})" text-anchor="middle">'
            f'{escape(self.y_label)}</text>',
        ]
        for index, (name, (xs, ys)) in enumerate(self.series.items()):
            color = SERIES_COLORS[index % len(SERIES_COLORS)]
            lines.append(
                f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                f'points="{self._points(xs, ys, bounds)}"/>'
            )
            legend_y = MARGIN_TOP + 14 * index + 6
            lines.append(
                f'<line x1="{right + 10}" y1="{legend_y}" x2="{right + 30}" y2="{legend_y}" '
                f'stroke="{color}" stroke-width="1.5"/>'
            )
            lines.append(f'<text x="{right + 34}" y="{legend_y + 4}" font-size="11">{escape(name)}</text>')
        lines.append("</svg>")
        return "\n".join(lines) + "\n"

    def save(self, path) -> Path:
        path = Path(path)
        try:
            path.write_text(self.render(), encoding="utf-8", newline="\n")
        except OSError as e:
            raise MVRPIOError(f"Cannot write chart {path}: {e}") from e
        logger.debug(f"Chart written: {path}")
        return path
