"""Curve metrics between the constructed shade path and oracle references."""
from __future__ import annotations

import csv
import enum
import io
import json
import math
import statistics
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import shapely
from scipy.spatial import cKDTree

from .construction import (
    CANONICAL,
    InterpretationVariant,
    TorusElevationSpec,
    run_construction,
    trace_shade_path,
)
from .oracle import DEFAULT_RESOLUTION, OracleShade, Torus3, oracle_shade

DENSIFY_DIVISOR = 256
CSV_COLUMNS = ("config", "variant", "reference", "hausdorff_in", "mean_in", "iou", "d_dev", "e_dev")


class DegenerateCurve(ValueError):
    pass


class SelfIntersecting(ValueError):
    pass


class ReferenceKind(enum.Enum):
    OUTER_LOOP = "OUTER_LOOP"
    INNER_LOOP = "INNER_LOOP"
    REGION_OUTLINE = "REGION_OUTLINE"


def _as_list(curves) -> list[np.ndarray]:
    if isinstance(curves, np.ndarray) and curves.ndim == 2:
        return [curves]
    return [np.asarray(c, dtype=float) for c in curves]


def densify(poly: np.ndarray, max_segment: float) -> np.ndarray:
    poly = np.asarray(poly, dtype=float)
    seg = np.diff(poly, axis=0)
    lengths = np.hypot(seg[:, 0], seg[:, 1])
    pieces = np.maximum(1, np.ceil(lengths / max_segment).astype(int))
    owner = np.repeat(np.arange(len(seg)), pieces)
    start = np.cumsum(pieces) - pieces
    frac = (np.arange(len(owner)) - start[owner]) / pieces[owner]
    out = poly[owner] + seg[owner] * frac[:, None]
    return np.vstack([out, poly[-1:]])


class _Segments:
    """Polyline set with a vertex KD-tree for point-to-curve queries."""

    def __init__(self, curves: list[np.ndarray], neighbours: int = 8):
        verts, seg_a, seg_b = [], [], []
        offset = 0
        for c in curves:
            n = len(c)
            verts.append(c)
            ids = np.arange(offset, offset + n)
            seg_a.append(ids[:-1])
            seg_b.append(ids[1:])
            offset += n
        self.v = np.vstack(verts)
        self.a = np.concatenate(seg_a)
        self.b = np.concatenate(seg_b)
        # segments touching each vertex (at most two per vertex)
        m = len(self.v)
        self.adj = np.full((m, 2), -1, dtype=int)
        seg_ids = np.arange(len(self.a))
        self.adj[self.a, 0] = seg_ids
        self.adj[self.b, 1] = seg_ids
        self.tree = cKDTree(self.v)
        self.k = min(neighbours, m)

    def distance(self, pts: np.ndarray) -> np.ndarray:
        d0, idx = self.tree.query(pts, k=self.k)
        if self.k == 1:
            d0, idx = d0[:, None], idx[:, None]
        best = d0.min(axis=1)
        segs = self.adj[idx].reshape(len(pts), -1)
        valid = segs >= 0
        segs = np.where(valid, segs, 0)
        a = self.v[self.a[segs]]
        b = self.v[self.b[segs]]
        ab = b - a
        ap = pts[:, None, :] - a
        denom = np.einsum("ijk,ijk->ij", ab, ab)
        t = np.where(denom > 0, np.einsum("ijk,ijk->ij", ap, ab) / np.where(denom > 0, denom, 1), 0)
        t = np.clip(t, 0.0, 1.0)
        foot = a + ab * t[..., None]
        d = np.hypot(*(pts[:, None, :] - foot).transpose(2, 0, 1))
        d = np.where(valid, d, np.inf)
        return np.minimum(best, d.min(axis=1))


def _scene_extent(curves: list[np.ndarray]) -> float:
    allv = np.vstack(curves)
    span = allv.max(axis=0) - allv.min(axis=0)
    return float(max(span.max(), 1e-12))


def _check(curves):
    for c in curves:
        if len(c) < 3:
            raise DegenerateCurve("polyline needs at least 3 vertices")


class CurveIndex:
    """Densified polyline set, ready for repeated distance queries."""

    def __init__(self, curves, max_segment: float):
        curves = _as_list(curves)
        _check(curves)
        dense = [densify(c, max_segment) for c in curves]
        self.points = np.vstack(dense)
        self.segments = _Segments(dense)


def _max_segment(a, b, max_segment):
    if max_segment is None:
        max_segment = _scene_extent(_as_list(a) + _as_list(b)) / DENSIFY_DIVISOR
    return max_segment


def directed_distances(a, b, max_segment: float | None = None) -> np.ndarray:
    """Distance from each densified vertex of ``a`` to the polylines of ``b``."""
    s = _max_segment(a, b, max_segment)
    return CurveIndex(b, s).segments.distance(CurveIndex(a, s).points)


def indexed_distances(ia: CurveIndex, ib: CurveIndex) -> tuple[float, float]:
    ab = ib.segments.distance(ia.points)
    ba = ia.segments.distance(ib.points)
    return float(max(ab.max(), ba.max())), float(0.5 * (ab.mean() + ba.mean()))


def curve_distances(a, b, max_segment: float | None = None) -> tuple[float, float]:
    """Symmetric Hausdorff distance and mean nearest-point distance.

    Vertices are densified below ``max_segment`` (default 1/256 of the joint
    extent) and measured against the other curve's segments.
    """
    s = _max_segment(a, b, max_segment)
    return indexed_distances(CurveIndex(a, s), CurveIndex(b, s))


def hausdorff(a, b, max_segment: float | None = None) -> float:
    return curve_distances(a, b, max_segment)[0]


def _polygon(curve: np.ndarray):
    ring = np.asarray(curve, dtype=float)
    if np.array_equal(ring[0], ring[-1]):
        ring = ring[:-1]
    lr = shapely.LinearRing(ring)
    if not lr.is_simple:
        raise SelfIntersecting("polyline crosses itself")
    return shapely.Polygon(lr)


def region_iou(a, b) -> float:
    """Area IoU of two closed simple polylines (or sets of them) by exact clipping."""
    pa = shapely.unary_union([_polygon(c) for c in _as_list(a)])
    pb = shapely.unary_union([_polygon(c) for c in _as_list(b)])
    union = pa.union(pb).area
    if union == 0:
        return 0.0
    return float(pa.intersection(pb).area / union)


IOU_METHOD = "polygon-clipping"


@dataclass
class ComparisonReport:
    config: str
    variant: str
    reference: ReferenceKind
    hausdorff: float
    mean: float
    iou: float | None
    d_dev: float
    e_dev: float
    iou_note: str = IOU_METHOD

    def row(self) -> dict:
        return {
            "config": self.config,
            "variant": self.variant,
            "reference": self.reference.value,
            "hausdorff_in": f"{self.hausdorff:.6f}",
            "mean_in": f"{self.mean:.6f}",
            "iou": "NA" if self.iou is None else f"{self.iou:.6f}",
            "d_dev": f"{self.d_dev:.6f}",
            "e_dev": f"{self.e_dev:.6f}",
        }


def references(oracle: OracleShade) -> dict[ReferenceKind, list[np.ndarray]]:
    return {
        ReferenceKind.OUTER_LOOP: [oracle.outer_loop],
        ReferenceKind.INNER_LOOP: [oracle.inner_loop],
        ReferenceKind.REGION_OUTLINE: oracle.region_outline,
    }


def compare_config(spec: TorusElevationSpec,
                   variant: InterpretationVariant = CANONICAL,
                   kinds: Sequence[ReferenceKind] = tuple(ReferenceKind),
                   oracle: OracleShade | None = None,
                   resolution: int = DEFAULT_RESOLUTION,
                   samples: int = 2048,
                   index_cache: dict | None = None) -> list[ComparisonReport]:
    """Construction vs oracle for one torus; one report per reference kind.

    ``index_cache`` lets several variants of the same torus share the
    densified reference curves.
    """
    if oracle is None:
        oracle = oracle_shade(Torus3.from_spec(spec), resolution)
    trace = run_construction(spec, variant)
    path = trace_shade_path(trace, samples).points
    d_dev = math.dist(tuple(trace["D"]), tuple(oracle.landmark(math.pi)))
    e_dev = math.dist(tuple(trace["E"]), tuple(oracle.landmark(0.0)))
    refs = references(oracle)
    step = spec.extent / DENSIFY_DIVISOR
    if index_cache is None:
        index_cache = {}
    path_index = CurveIndex(path, step)
    reports = []
    for kind in kinds:
        ref = refs[kind]
        if kind not in index_cache:
            index_cache[kind] = CurveIndex(ref, step)
        h, mean = indexed_distances(path_index, index_cache[kind])
        try:
            iou = region_iou(path, ref)
        except SelfIntersecting:
            iou = None
        reports.append(ComparisonReport(spec.config_id, variant.name, kind, h, mean, iou, d_dev, e_dev))
    return reports


def calibrate_variants(specs: Iterable[TorusElevationSpec],
                       variants: Sequence[InterpretationVariant] | None = None,
                       kinds: Sequence[ReferenceKind] = tuple(ReferenceKind),
                       resolution: int = DEFAULT_RESOLUTION):
    """Median Hausdorff per variant and reference kind, best first.

    Returns ``(ranking, reports)`` where ranking maps each kind to a list of
    ``(variant, median)`` sorted ascending; ties keep enum order.
    """
    if variants is None:
        variants = InterpretationVariant.all()
    variants = list(variants)
    if not variants:
        raise ValueError("no variants to calibrate")
    specs = list(specs)
    if not specs:
        raise ValueError("no configurations to calibrate")
    per: dict[tuple, list[float]] = {}
    reports: list[ComparisonReport] = []
    for spec in specs:
        oracle = oracle_shade(Torus3.from_spec(spec), resolution)
        cache: dict = {}
        for variant in variants:
            for rep in compare_config(spec, variant, kinds, oracle=oracle, index_cache=cache):
                reports.append(rep)
                per.setdefault((rep.reference, variant), []).append(rep.hausdorff)
    ranking = {}
    for kind in kinds:
        scored = [(v, statistics.median(per[(kind, v)])) for v in variants]
        scored.sort(key=lambda item: (item[1], item[0].order_key))
        ranking[kind] = scored
    return ranking, reports


def reports_csv(reports: Sequence[ComparisonReport]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for rep in reports:
        w.writerow(rep.row())
    return buf.getvalue()


def reports_json(reports: Sequence[ComparisonReport]) -> str:
    rows = []
    for rep in reports:
        row = rep.row()
        for k, v in row.items():
            if k not in ("config", "variant", "reference"):
                row[k] = None if v == "NA" else float(v)
        rows.append(row)
    return json.dumps(rows, indent=1) + "\n"
