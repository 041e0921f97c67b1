"""Minimal SVG emitter for 2D scatter plots, principal-axis arrows, and
optimization trajectories. No plotting dependency; output is deterministic
for identical inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_W, _H, _PAD = 640, 480, 50


def _fmt(v: float) -> str:
    return f"{v:.2f}"


@dataclass
class ScatterPlot:
    title: str = ""
    comment: str = ""
    groups: list = field(default_factory=list)      # (label, color, (n,2) points)
    arrows: list = field(default_factory=list)      # (label, color, start, end)
    polylines: list = field(default_factory=list)   # (label, color, (n,2) points)

    def add_group(self, label, color, points):
        self.groups.append((label, color, np.atleast_2d(np.asarray(points, dtype=float))))

    def add_arrow(self, label, color, start, end):
        self.arrows.append((label, color, np.asarray(start, dtype=float),
                            np.asarray(end, dtype=float)))

    def add_polyline(self, label, color, points):
        self.polylines.append((label, color, np.atleast_2d(np.asarray(points, dtype=float))))

    def _bounds(self):
        pts = [g[2] for g in self.groups] + [p[2] for p in self.polylines]
        pts += [np.vstack([a[2], a[3]]) for a in self.arrows]
        allp = np.vstack(pts) if pts else np.zeros((1, 2))
        lo, hi = allp.min(axis=0), allp.max(axis=0)
        span = np.maximum(hi - lo, 1e-9)
        lo, hi = lo - 0.05 * span, hi + 0.05 * span
        return lo, hi

    def render(self) -> str:
        lo, hi = self._bounds()

        def sx(x):
            return _PAD + (x - lo[0]) / (hi[0] - lo[0]) * (_W - 2 * _PAD)

        def sy(y):
            return _H - _PAD - (y - lo[1]) / (hi[1] - lo[1]) * (_H - 2 * _PAD)

        parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
            f'viewBox="0 0 {_W} {_H}">',
        ]
        if self.comment:
            parts.append(f"<!-- {self.comment} -->")
        parts.append(f'<rect width="{_W}" height="{_H}" fill="white"/>')
        # axes through the data origin when visible, else along the frame
        x0 = sx(0.0) if lo[0] < 0 < hi[0] else _PAD
        y0 = sy(0.0) if lo[1] < 0 < hi[1] else _H - _PAD
        parts.append(f'<line x1="{_PAD}" y1="{_fmt(y0)}" x2="{_W - _PAD}" y2="{_fmt(y0)}" '
                     'stroke="#cccccc" stroke-width="1"/>')
        parts.append(f'<line x1="{_fmt(x0)}" y1="{_PAD}" x2="{_fmt(x0)}" y2="{_H - _PAD}" '
                     'stroke="#cccccc" stroke-width="1"/>')
        if self.title:
            parts.append(f'<text x="{_W // 2}" y="24" text-anchor="middle" '
                         f'font-family="sans-serif" font-size="15">{self.title}</text>')

        for label, color, pts in self.groups:
            parts.append(f'<g fill="{color}" fill-opacity="0.6"><!-- {label} -->')
            for x, y in pts:
                parts.append(f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="2.5"/>')
            parts.append("</g>")

        for label, color, pts in self.polylines:
            coords = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in pts)
            parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" '
                         f'stroke-width="2"><!-- {label} --></polyline>')
            # mark start and end of the trajectory
            parts.append(f'<circle cx="{_fmt(sx(pts[0, 0]))}" cy="{_fmt(sy(pts[0, 1]))}" '
                         f'r="4" fill="none" stroke="{color}" stroke-width="1.5"/>')
            parts.append(f'<circle cx="{_fmt(sx(pts[-1, 0]))}" cy="{_fmt(sy(pts[-1, 1]))}" '
                         f'r="4" fill="{color}"/>')

        for label, color, start, end in self.arrows:
            x1, y1, x2, y2 = sx(start[0]), sy(start[1]), sx(end[0]), sy(end[1])
            parts.append(f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" '
                         f'y2="{_fmt(y2)}" stroke="{color}" stroke-width="2"/>')
            # arrowhead: two short strokes at the tip
            v = np.array([x2 - x1, y2 - y1])
            norm = np.hypot(*v)
            if norm > 0:
                v = v / norm
                left = np.array([-v[0] - v[1], -v[1] + v[0]]) * 8
                right = np.array([-v[0] + v[1], -v[1] - v[0]]) * 8
                for wing in (left, right):
                    parts.append(f'<line x1="{_fmt(x2)}" y1="{_fmt(y2)}" '
                                 f'x2="{_fmt(x2 + wing[0])}" y2="{_fmt(y2 + wing[1])}" '
                                 f'stroke="{color}" stroke-width="2"/>')
            parts.append(f'<text x="{_fmt(x2 + 6)}" y="{_fmt(y2 - 6)}" '
                         f'font-family="sans-serif" font-size="12" '
                         f'fill="{color}">{label}</text>')

        # legend
        ly = _PAD
        for label, color, _ in self.groups + [(l, c, None) for l, c, _ in self.polylines]:
            parts.append(f'<circle cx="{_W - _PAD - 110}" cy="{ly}" r="4" fill="{color}"/>')
            parts.append(f'<text x="{_W - _PAD - 100}" y="{ly + 4}" '
                         f'font-family="sans-serif" font-size="12">{label}</text>')
            ly += 18
        parts.append("</svg>")
        return "\n".join(parts) + "\n"

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.render())
