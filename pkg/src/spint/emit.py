"""Deterministic CSV and SVG emission.

Numbers are serialized with 17 significant digits so every float
round-trips exactly (``float(format(x, '.17g')) == x``), CSV quoting is
RFC-4180, and SVG plots are self-contained polylines with annotated axes
(diagnostic quality, no external renderer).
"""

from __future__ import annotations

import csv
import hashlib
from pathlib import Path

import numpy as np

__all__ = ["fmt17", "write_csv", "read_csv_floats", "svg_line_plot",
           "equidistant_indices", "file_sha256"]


def fmt17(x) -> str:
    """17-significant-digit decimal form; bit-exact on parse."""
    return format(float(x), ".17g")


def write_csv(path: Path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, quoting=csv.QUOTE_MINIMAL)
        writer.writerow(header)
        for row in rows:
            writer.writerow([cell if isinstance(cell, str) else fmt17(cell)
                             for cell in row])
    return path


def read_csv_floats(path: Path):
    """Parse a CSV written by :func:`write_csv`; non-numeric cells stay strings."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = []
        for row in reader:
            parsed = []
            for cell in row:
                try:
                    parsed.append(float(cell))
                except ValueError:
                    parsed.append(cell)
            rows.append(parsed)
    return header, rows


def equidistant_indices(n_total: int, count: int) -> np.ndarray:
    """Indices 0, s, 2s, ... ((count-1) s) with stride s = n_total // count."""
    if count >= n_total:
        return np.arange(n_total)
    stride = n_total // count
    return np.arange(count) * stride


_SVG_W, _SVG_H = 840, 520
_MARGIN = 60


def svg_line_plot(path: Path, t, values, title: str,
                  max_points: int | None = 2000) -> int:
    """Write a polyline plot; returns the number of plotted points."""
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    if max_points is not None and len(t) > max_points:
        idx = equidistant_indices(len(t), max_points)
        t, values = t[idx], values[idx]
    finite = np.isfinite(values)
    if not finite.all():
        stop = int(np.argmin(finite)) or 1
        t, values = t[:stop], values[:stop]

    t0, t1 = float(t[0]), float(t[-1]) if len(t) > 1 else float(t[0]) + 1.0
    v0, v1 = float(values.min()), float(values.max())
    if v1 == v0:
        v0, v1 = v0 - 1.0, v1 + 1.0
    span_x = _SVG_W - 2 * _MARGIN
    span_y = _SVG_H - 2 * _MARGIN
    xs = _MARGIN + (t - t0) / (t1 - t0) * span_x
    ys = _SVG_H - _MARGIN - (values - v0) / (v1 - v0) * span_y
    points = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{_SVG_W}" height="{_SVG_H}" '
            f'viewBox="0 0 {_SVG_W} {_SVG_H}">\n'
            f'<rect width="{_SVG_W}" height="{_SVG_H}" fill="white"/>\n'
            f'<text x="{_SVG_W // 2}" y="24" text-anchor="middle" '
            f'font-family="monospace" font-size="14">{title}</text>\n'
            f'<line x1="{_MARGIN}" y1="{_SVG_H - _MARGIN}" x2="{_SVG_W - _MARGIN}" '
            f'y2="{_SVG_H - _MARGIN}" stroke="black"/>\n'
            f'<line x1="{_MARGIN}" y1="{_MARGIN}" x2="{_MARGIN}" '
            f'y2="{_SVG_H - _MARGIN}" stroke="black"/>\n'
            f'<text x="{_MARGIN}" y="{_SVG_H - _MARGIN + 18}" font-family="monospace" '
            f'font-size="11">{t0:.6g}</text>\n'
            f'<text x="{_SVG_W - _MARGIN}" y="{_SVG_H - _MARGIN + 18}" '
            f'text-anchor="end" font-family="monospace" font-size="11">{t1:.6g}</text>\n'
            f'<text x="{_MARGIN - 6}" y="{_SVG_H - _MARGIN}" text-anchor="end" '
            f'font-family="monospace" font-size="11">{v0:.6g}</text>\n'
            f'<text x="{_MARGIN - 6}" y="{_MARGIN + 4}" text-anchor="end" '
            f'font-family="monospace" font-size="11">{v1:.6g}</text>\n'
            f'<polyline points="{points}" fill="none" stroke="steelblue" '
            f'stroke-width="1"/>\n</svg>\n')
    return len(t)


def file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()
