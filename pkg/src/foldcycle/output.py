"""CSV and SVG writers. Every file starts with the run manifest as comments."""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

from . import __version__


@dataclass(frozen=True)
class RunManifest:
    command: str
    config_path: str | None = None
    overrides: dict = field(default_factory=dict)
    out_dir: str = "."
    seed: int = 0
    version: str = __version__

    def lines(self) -> list[str]:
        ov = ";".join(f"{k}={self.overrides[k]}" for k in sorted(self.overrides))
        return [f"foldcycle {self.version}",
                f"command: {self.command}",
                f"config: {self.config_path or '(defaults)'}",
                f"overrides: {ov or '(none)'}",
                f"seed: {self.seed}"]


def fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def csv_text(header, rows, manifest: RunManifest | None = None) -> str:
    buf = io.StringIO()
    if manifest is not None:
        for line in manifest.lines():
            buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path: str, header, rows, manifest: RunManifest | None = None) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text(header, rows, manifest))
    return path


def read_csv_body(path: str) -> list[list[str]]:
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.reader(lines))


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def svg_plot(series, title: str, caption: str, xlabel: str, ylabel: str,
             loglog: bool = True, manifest: RunManifest | None = None,
             width: int = 640, height: int = 440) -> str:
    """Minimal standalone SVG line plot.

    ``series`` is a list of (label, xs, ys, style) with style 'line' or 'points'.
    With ``loglog`` the axes show log10 of the data.
    """
    tx = (lambda v: math.log10(v)) if loglog else (lambda v: v)
    pts = [[(tx(x), tx(abs(y) if loglog else y)) for x, y in zip(xs, ys)]
           for _, xs, ys, _ in series]
    allx = [p[0] for s in pts for p in s]
    ally = [p[1] for s in pts for p in s]
    x0, x1 = min(allx), max(allx)
    y0, y1 = min(ally), max(ally)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1
    ml, mr, mt, mb = 80, 20, 40, 90
    pw, ph = width - ml - mr, height - mt - mb

    def X(v):
        return ml + (v - x0) / (x1 - x0) * pw

    def Y(v):
        return mt + ph - (v - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">']
    if manifest is not None:
        out.append("<!-- " + escape(" | ".join(manifest.lines())).replace("--", "- -") + " -->")
    out.append(f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>')
    out.append(f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" font-size="15">{escape(title)}</text>')
    out.append(f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>')
    out.append(f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black"/>')
    pre = "10^" if loglog else ""
    for v in _ticks(x0, x1):
        out.append(f'<line x1="{X(v):.1f}" y1="{mt + ph}" x2="{X(v):.1f}" y2="{mt + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X(v):.1f}" y="{mt + ph + 18}" text-anchor="middle" font-size="11">'
                   f'{pre}{v:.2f}</text>')
    for v in _ticks(y0, y1):
        out.append(f'<line x1="{ml - 5}" y1="{Y(v):.1f}" x2="{ml}" y2="{Y(v):.1f}" stroke="black"/>')
        out.append(f'<text x="{ml - 8}" y="{Y(v) + 4:.1f}" text-anchor="end" font-size="11">'
                   f'{pre}{v:.2f}</text>')
    out.append(f'<text x="{ml + pw / 2:.1f}" y="{mt + ph + 38}" text-anchor="middle" font-size="12">'
               f'{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{mt + ph / 2:.1f}" text-anchor="middle" font-size="12" '
               f'transform="rotate(-90 16 {mt + ph / 2:.1f})">{escape(ylabel)}</text>')
    colors = ["#1f4e99", "#b03030", "#2a7a2a", "#7a4a9a"]
    for i, ((label, _, _, style), sp) in enumerate(zip(series, pts)):
        col = colors[i % len(colors)]
        coords = " ".join(f"{X(x):.2f},{Y(y):.2f}" for x, y in sp)
        if style == "points":
            for x, y in sp:
                out.append(f'<circle cx="{X(x):.2f}" cy="{Y(y):.2f}" r="3" fill="{col}"/>')
        else:
            out.append(f'<polyline points="{coords}" fill="none" stroke="{col}" stroke-width="1.5"/>')
        out.append(f'<text x="{ml + 10}" y="{mt + 16 + 15 * i}" font-size="11" fill="{col}">'
                   f'{escape(label)}</text>')
    out.append(f'<text x="{width / 2:.1f}" y="{height - 14}" text-anchor="middle" font-size="11">'
               f'{escape(caption)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path: str, text: str) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return path
