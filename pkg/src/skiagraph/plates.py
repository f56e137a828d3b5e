"""SVG plates: labelled construction, shade matrices, oracle overlays.

Drawing units are inches; the document maps one inch to ``style.scale``
user units and flips z so it points up the page.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

from .construction import (
    LABELS,
    SCHEMA_VERSION,
    ConstructionError,
    ConstructionTrace,
    TorusElevationSpec,
    run_construction,
    trace_shade_path,
)
from .oracle import Torus3, stadium_polyline

FIG4_WIDTHS = (20, 19, 18, 17)
FIG5_WIDTHS = (16, 15, 14, 13, 12)
PRESET_HEIGHTS = (6, 5, 4, 3, 2, 1)
PRESETS = {
    "fig4": (FIG4_WIDTHS, PRESET_HEIGHTS),
    "fig5": (FIG5_WIDTHS, PRESET_HEIGHTS),
    "all": (FIG4_WIDTHS + FIG5_WIDTHS, PRESET_HEIGHTS),
}


@dataclass(frozen=True)
class PlateStyle:
    scale: float = 96.0
    stroke: float = 1.0
    thin: float = 0.5
    shade_fill: str = "#808080"
    label_size: float = 11.0
    construction_color: str = "#000000"
    oracle_color: str = "#c0392b"
    margin: float = 0.75
    page: tuple[float, float] = (6.5, 9.0)

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("scale must be positive")


def _f(v: float) -> str:
    s = f"{v:.3f}"
    return "0.000" if s == "-0.000" else s


class _Doc:
    """Accumulates SVG elements in inch coordinates centred on the torus."""

    def __init__(self, width_in: float, height_in: float, style: PlateStyle,
                 origin: tuple[float, float], zoom: float = 1.0):
        self.style = style
        self.w, self.h = width_in, height_in
        self.ox, self.oz = origin
        self.zoom = zoom
        self.body: list[str] = []
        self.meta: dict | None = None

    def xy(self, x: float, z: float) -> tuple[float, float]:
        k = self.style.scale * self.zoom
        return (x - self.ox) * k, (self.oz - z) * k

    def pts(self, arr) -> str:
        return " ".join(f"{_f(a)},{_f(b)}" for a, b in (self.xy(x, z) for x, z in arr))

    def add(self, s: str):
        self.body.append(s)

    def polyline(self, arr, stroke, width, closed=False, fill="none", dash=None, extra=""):
        tag = "polygon" if closed else "polyline"
        d = f' stroke-dasharray="{dash}"' if dash else ""
        self.add(f'<{tag} points="{self.pts(arr)}" fill="{fill}" stroke="{stroke}" '
                 f'stroke-width="{_f(width)}"{d}{extra}/>')

    def circle(self, x, z, radius_in, stroke, width, fill="none", extra=""):
        cx, cy = self.xy(x, z)
        self.add(f'<circle cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(radius_in * self.style.scale * self.zoom)}" '
                 f'fill="{fill}" stroke="{stroke}" stroke-width="{_f(width)}"{extra}/>')

    def text(self, x, z, s, size, anchor="middle", cls=None):
        cx, cy = self.xy(x, z)
        c = f' class="{cls}"' if cls else ""
        self.add(f'<text{c} x="{_f(cx)}" y="{_f(cy)}" font-family="serif" font-size="{_f(size)}" '
                 f'text-anchor="{anchor}">{escape(s)}</text>')

    def render(self) -> str:
        # declared inches are rounded once so the viewBox agrees with them
        w_in, h_in = round(self.w, 3), round(self.h, 3)
        W, H = w_in * self.style.scale, h_in * self.style.scale
        head = ['<?xml version="1.0" encoding="UTF-8"?>',
                f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_f(w_in)}in" '
                f'height="{_f(h_in)}in" viewBox="0 0 {_f(W)} {_f(H)}">']
        if self.meta is not None:
            head.append(f"<metadata>{escape(json.dumps(self.meta, sort_keys=True))}</metadata>")
        head.append(f'<rect x="0" y="0" width="{_f(W)}" height="{_f(H)}" fill="#ffffff"/>')
        return "\n".join(head + self.body + ["</svg>"]) + "\n"


def _draw_torus(doc: _Doc, spec: TorusElevationSpec, style: PlateStyle, rings=True):
    torus = Torus3.from_spec(spec)
    doc.polyline(stadium_polyline(torus, 512), "#000000", style.stroke, closed=True)
    if rings:
        for cx in (-torus.R, torus.R):
            doc.circle(cx, 0.0, torus.r, "#000000", style.thin)


def _shade(doc: _Doc, path: np.ndarray, style: PlateStyle, stroke="#000000", cls="shade-path"):
    doc.polyline(path[:-1], stroke, style.stroke, closed=True, fill=style.shade_fill,
                 extra=f' fill-rule="evenodd" fill-opacity="0.5" class="{cls}"')


def _line_extent(trace: ConstructionTrace, name: str):
    line = trace.lines[name]
    tol = 1e-9 * trace.spec.extent
    ts = [line.param(p) for p in trace.points.values() if line.distance_to(p) <= tol]
    if not ts:
        ts = [0.0]
    lo, hi = min(ts + [0.0]), max(ts + [0.0])
    pad = 0.05 * trace.spec.height
    return line.at(lo - pad), line.at(hi + pad)


CONSTRUCTION_LINES = ("AB", "DE", "HP", "IQ", "LM", "HI", "PD", "QE",
                      "Pn", "Pn'", "Pn''", "Qo", "Qo'", "Qo''")


def _place_labels(trace: ConstructionTrace, offset: float):
    placed: dict[str, tuple[float, float]] = {}
    for label in LABELS:
        p = trace.points[label]
        base = math.atan2(p.z, p.x) if math.hypot(p.x, p.z) > 1e-9 else math.pi / 2
        for k in range(12):
            ang = base + (k + 1) // 2 * (math.pi / 6) * (1 if k % 2 else -1)
            pos = (p.x + offset * math.cos(ang), p.z + offset * math.sin(ang))
            if all(math.hypot(pos[0] - q[0], pos[1] - q[1]) >= 1.2 * offset for q in placed.values()):
                break
        placed[label] = pos
    return placed


def plate_construction(trace: ConstructionTrace, style: PlateStyle = PlateStyle(),
                       metadata: dict | None = None, samples: int = 2048) -> str:
    """Labelled construction drawing with the shade path filled."""
    spec = trace.spec
    m = style.margin
    doc = _Doc(spec.width + 2 * m, spec.height + 2 * m, style,
               origin=(-spec.width / 2 - m, spec.height / 2 + m))
    doc.meta = metadata
    path = trace_shade_path(trace, samples).points
    _shade(doc, path, style)
    _draw_torus(doc, spec, style)
    doc.add('<g class="construction-lines">')
    for name in CONSTRUCTION_LINES:
        a, b = _line_extent(trace, name)
        doc.polyline([tuple(a), tuple(b)], "#555555", style.thin, dash="4,3")
    doc.add("</g>")
    dot = 0.025
    for label in LABELS:
        p = trace.points[label]
        doc.circle(p.x, p.z, dot, "#000000", style.thin, fill="#000000")
    off = max(0.12, 0.06 * spec.height)
    for label, (x, z) in _place_labels(trace, off).items():
        doc.text(x, z - 0.04, label, style.label_size, cls="label")
    return doc.render()


@dataclass
class MatrixPlate:
    svg: str
    manifest: dict
    traces: dict[str, ConstructionTrace] = field(default_factory=dict)

    @property
    def cell_count(self) -> int:
        return sum(1 for c in self.manifest["cells"] if c["status"] == "ok")


def plate_matrix(widths, heights, style: PlateStyle = PlateStyle(),
                 metadata: dict | None = None, name: str = "matrix") -> MatrixPlate:
    """Grid of shade cells, widest at the left and tallest at the top.

    One uniform scale fits the whole grid on ``style.page``; cells that
    cannot be constructed are kept in the manifest with the reason.
    """
    widths = sorted(set(widths), reverse=True)
    heights = sorted(set(heights), reverse=True)
    if not widths or not heights:
        raise ValueError("empty width or height range")
    gap = 0.15 * max(widths)
    label_h = 0.6
    cell_w = max(widths) + gap
    cell_h = max(heights) + gap + label_h
    total_w, total_h = cell_w * len(widths) + gap, cell_h * len(heights) + gap
    zoom = min(style.page[0] / total_w, style.page[1] / total_h)
    doc = _Doc(total_w * zoom, total_h * zoom, style, origin=(0.0, 0.0), zoom=zoom)
    doc.meta = metadata
    text_size = max(6.0, style.label_size * 0.8)
    cells, traces = [], {}
    for row, h in enumerate(heights):
        for col, w in enumerate(widths):
            cx = gap + col * cell_w + cell_w / 2 - gap / 2
            cz = -(gap + row * cell_h + max(heights) / 2)
            entry = {"width": w, "height": h, "row": row, "col": col}
            try:
                spec = TorusElevationSpec(w, h)
                trace = run_construction(spec)
            except (ConstructionError, ArithmeticError) as exc:
                entry.update(status="skipped", reason=f"{type(exc).__name__}: {exc}")
                doc.text(cx, cz, f"{w:g}x{h:g} skipped", text_size)
                cells.append(entry)
                continue
            entry.update(status="ok", R=spec.major_radius, r=spec.minor_radius)
            traces[spec.config_id] = trace
            path = trace_shade_path(trace).points + np.array([cx, cz])
            outline = stadium_polyline(Torus3.from_spec(spec), 256) + np.array([cx, cz])
            doc.add(f'<g class="cell" id="cell-{spec.config_id}">')
            doc.polyline(path[:-1], "#000000", style.thin, closed=True, fill=style.shade_fill,
                         extra=' fill-rule="evenodd" fill-opacity="0.5"')
            doc.polyline(outline, "#000000", style.thin, closed=True)
            doc.text(cx, cz - max(heights) / 2 - label_h * 0.6, f"{w:g} x {h:g} in", text_size)
            doc.add("</g>")
            cells.append(entry)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "name": name,
        "widths": widths,
        "heights": heights,
        "scale": round(zoom, 6),
        "page_in": list(style.page),
        "cells": cells,
    }
    if metadata is not None:
        manifest["run_config"] = metadata
    return MatrixPlate(doc.render(), manifest, traces)


def plate_overlay(trace: ConstructionTrace, oracle, reports=(), style: PlateStyle = PlateStyle(),
                  metadata: dict | None = None, samples: int = 2048) -> str:
    """Construction path against the oracle curves, with metrics in a caption."""
    spec = trace.spec
    m = style.margin
    caption_h = 0.25 * (len(reports) + 1)
    doc = _Doc(spec.width + 2 * m, spec.height + 2 * m + caption_h, style,
               origin=(-spec.width / 2 - m, spec.height / 2 + m))
    doc.meta = metadata
    _draw_torus(doc, spec, style, rings=False)
    marker = 0.04
    doc.add('<g id="oracle">')
    doc.polyline(oracle.outer_loop, style.oracle_color, style.thin, extra=' class="outer-loop"')
    doc.polyline(oracle.inner_loop, style.oracle_color, style.thin, dash="3,3", extra=' class="inner-loop"')
    for c in oracle.region_outline:
        doc.polyline(c, style.oracle_color, style.stroke, extra=' class="region-outline"')
    for u, name in ((math.pi, "D"), (0.0, "E")):
        p = oracle.landmark(u)
        doc.circle(p.x, p.z, marker, style.oracle_color, style.thin, extra=f' class="landmark-{name}"')
    doc.add("</g>")
    doc.add('<g id="construction">')
    path = trace_shade_path(trace, samples).points
    doc.polyline(path, style.construction_color, style.stroke, extra=' class="shade-path"')
    for name in ("D", "E"):
        p = trace.points[name]
        doc.circle(p.x, p.z, marker, style.construction_color, style.thin, extra=f' class="landmark-{name}"')
    doc.add("</g>")
    z = -spec.height / 2 - m * 0.6
    doc.add('<g class="caption">')
    doc.text(-spec.width / 2 - m * 0.8, z, f"{spec.config_id} {trace.variant.name}", 10, anchor="start")
    for rep in reports:
        z -= 0.25
        iou = "NA" if rep.iou is None else f"{rep.iou:.6f}"
        doc.text(-spec.width / 2 - m * 0.8, z,
                 f"{rep.reference.value}: hausdorff {rep.hausdorff:.6f} in, mean {rep.mean:.6f} in, iou {iou}",
                 10, anchor="start")
    doc.add("</g>")
    return doc.render()
