"""Deterministic SVG 1.1 rendering of the four diagnostic plots.

Output is plain text built from fixed-precision coordinates, with no
timestamps or generated ids, so identical reports give identical files.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .core import Curve, MetricsReport

log = logging.getLogger(__name__)

WIDTH, HEIGHT = 480, 400
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 64, 24, 40, 56
MAX_VERTICES = 4000

INLIER_COLOR = "#1f77b4"
OUTLIER_COLOR = "#d62728"
LINE_COLOR = "#222222"


@dataclass(frozen=True)
class Frame:
    """Maps data coordinates in ``[x0, x1] x [y0, y1]`` onto the plot box."""

    x0: float = 0.0
    x1: float = 1.0
    y0: float = 0.0
    y1: float = 1.0

    @property
    def box(self) -> tuple[float, float, float, float]:
        return MARGIN_LEFT, MARGIN_TOP, WIDTH - MARGIN_RIGHT, HEIGHT - MARGIN_BOTTOM

    def px(self, x, y):
        left, top, right, bottom = self.box
        sx = left + (np.asarray(x, dtype=float) - self.x0) / (self.x1 - self.x0) * (right - left)
        sy = bottom - (np.asarray(y, dtype=float) - self.y0) / (self.y1 - self.y0) * (bottom - top)
        return sx, sy


def _f(v: float) -> str:
    s = f"{v:.2f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _decimate(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if x.size <= MAX_VERTICES:
        return x, y
    idx = np.unique(np.linspace(0, x.size - 1, MAX_VERTICES).round().astype(np.int64))
    return x[idx], y[idx]


def _tick_label(v: float) -> str:
    return f"{v:.3g}"


class _Svg:
    def __init__(self, title: str, xlabel: str, ylabel: str, frame: Frame):
        self.frame = frame
        self.parts: list[str] = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
            f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
            f'<text x="{WIDTH / 2:g}" y="24" text-anchor="middle" font-size="14">{escape(title)}</text>',
        ]
        self._axes(xlabel, ylabel)

    def _axes(self, xlabel: str, ylabel: str) -> None:
        fr = self.frame
        left, top, right, bottom = fr.box
        for i in range(6):
            xv = fr.x0 + (fr.x1 - fr.x0) * i / 5
            yv = fr.y0 + (fr.y1 - fr.y0) * i / 5
            sx, _ = fr.px(xv, fr.y0)
            _, sy = fr.px(fr.x0, yv)
            self.parts.append(
                f'<line x1="{_f(sx)}" y1="{_f(bottom)}" x2="{_f(sx)}" y2="{_f(bottom + 5)}" stroke="{LINE_COLOR}"/>'
            )
            self.parts.append(
                f'<text x="{_f(sx)}" y="{_f(bottom + 18)}" text-anchor="middle">{_tick_label(xv)}</text>'
            )
            self.parts.append(
                f'<line x1="{_f(left - 5)}" y1="{_f(sy)}" x2="{_f(left)}" y2="{_f(sy)}" stroke="{LINE_COLOR}"/>'
            )
            self.parts.append(
                f'<text x="{_f(left - 8)}" y="{_f(sy + 4)}" text-anchor="end">{_tick_label(yv)}</text>'
            )
        self.parts.append(
            f'<rect x="{_f(left)}" y="{_f(top)}" width="{_f(right - left)}" height="{_f(bottom - top)}" '
            f'fill="none" stroke="{LINE_COLOR}"/>'
        )
        self.parts.append(
            f'<text x="{_f((left + right) / 2)}" y="{_f(HEIGHT - 14)}" text-anchor="middle">{escape(xlabel)}</text>'
        )
        cy = (top + bottom) / 2
        self.parts.append(
            f'<text x="16" y="{_f(cy)}" text-anchor="middle" transform="rotate(-90 16 {_f(cy)})">{escape(ylabel)}</text>'
        )

    def polyline(self, x, y, color=LINE_COLOR, width=2.0, dash: Optional[str] = None, step: bool = False):
        x, y = _decimate(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        if step and x.size > 1:
            # vertical jump to the new y, then horizontal run to the new x
            x = np.repeat(x, 2)[:-1]
            y = np.r_[y[0], np.repeat(y[1:], 2)]
        sx, sy = self.frame.px(x, y)
        pts = " ".join(f"{_f(a)},{_f(b)}" for a, b in zip(sx.tolist(), sy.tolist()))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{width:g}"{extra}/>'
        )

    def bars(self, edges: Sequence[float], heights: Sequence[float], color: str):
        fr = self.frame
        for a, b, h in zip(edges[:-1], edges[1:], heights):
            if h <= 0:
                continue
            x0, y0 = fr.px(a, h)
            x1, y1 = fr.px(b, fr.y0)
            self.parts.append(
                f'<rect x="{_f(x0)}" y="{_f(y0)}" width="{_f(x1 - x0)}" height="{_f(y1 - y0)}" '
                f'fill="{color}" fill-opacity="0.45" stroke="{color}" stroke-width="0.5"/>'
            )

    def legend(self, entries: Sequence[tuple[str, str]]):
        _, top, right, _ = self.frame.box
        for i, (label, color) in enumerate(entries):
            y = top + 14 + 16 * i
            self.parts.append(
                f'<rect x="{_f(right - 110)}" y="{_f(y - 9)}" width="10" height="10" fill="{color}"/>'
            )
            self.parts.append(f'<text x="{_f(right - 95)}" y="{_f(y)}">{escape(label)}</text>')

    def text(self, x: float, y: float, s: str):
        self.parts.append(f'<text x="{_f(x)}" y="{_f(y)}">{escape(s)}</text>')

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def _title(report: MetricsReport, what: str) -> str:
    return f"{what}: {report.supervisor_name} / {report.case_name}"


def roc_svg(report: MetricsReport) -> str:
    svg = _Svg(_title(report, "ROC"), "false positive rate", "true positive rate", Frame())
    svg.polyline([0, 1], [0, 1], color="#999999", width=1, dash="4 4")
    svg.polyline(report.roc.x, report.roc.y)
    left, top, *_ = svg.frame.box
    svg.text(left + 8, top + 16, f"AUROC = {report.auroc:.4f}")
    return svg.render()


def pr_svg(report: MetricsReport) -> str:
    svg = _Svg(_title(report, "Precision-recall"), "recall", "precision", Frame())
    svg.polyline(report.pr.x, report.pr.y, step=True)
    left, _, _, bottom = svg.frame.box
    svg.text(left + 8, bottom - 10, f"AUPRC = {report.auprc:.4f}")
    return svg.render()


def distribution_svg(report: MetricsReport) -> str:
    d = report.distribution
    inl = d.inlier_counts / max(report.n_inliers, 1)
    out = d.outlier_counts / max(report.n_outliers, 1)
    top = float(max(inl.max(), out.max()))
    frame = Frame(float(d.bin_edges[0]), float(d.bin_edges[-1]), 0.0, top if top > 0 else 1.0)
    svg = _Svg(_title(report, "Anomaly score distribution"), "anomaly score", "fraction of class", frame)
    svg.bars(d.bin_edges, inl, INLIER_COLOR)
    svg.bars(d.bin_edges, out, OUTLIER_COLOR)
    svg.legend([(f"inliers (n={report.n_inliers})", INLIER_COLOR), (f"outliers (n={report.n_outliers})", OUTLIER_COLOR)])
    return svg.render()


def risk_coverage_svg(report: MetricsReport) -> str:
    rc: Curve = report.risk_coverage
    svg = _Svg(_title(report, "Risk-coverage"), "coverage", "risk", Frame())
    if report.baseline_accuracy is not None:
        err = 1.0 - report.baseline_accuracy
        svg.polyline([0, 1], [err, err], color="#999999", width=1, dash="4 4")
    svg.polyline(rc.x, rc.y)
    left, top, *_ = svg.frame.box
    cb = "N/A" if report.cbpl is None else f"{report.cbpl:.4f}"
    svg.text(left + 8, top + 16, f"CBPL = {cb}   CBFAD = {report.cbfad:.4f}")
    return svg.render()


PLOT_FILES = {
    "roc.svg": roc_svg,
    "pr.svg": pr_svg,
    "distribution.svg": distribution_svg,
    "risk_coverage.svg": risk_coverage_svg,
}


def emit_plots(report: MetricsReport, out_dir) -> tuple[list[Path], Optional[str]]:
    """Write the plot files; returns the paths and a notice if one was skipped."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    notice = None
    for name, render in PLOT_FILES.items():
        if name == "risk_coverage.svg" and report.risk_coverage is None:
            notice = "risk-coverage plot skipped: no prediction correctness flags for inliers"
            log.info(notice)
            stale = out_dir / name
            if stale.exists():
                stale.unlink()
            continue
        path = out_dir / name
        path.write_text(render(report), encoding="utf-8", newline="")
        written.append(path)
    return written, notice
