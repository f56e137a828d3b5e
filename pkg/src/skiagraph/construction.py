"""Elevation-only shade construction for a torus.

Every point is produced by a primitive from :mod:`skiagraph.planar`, so the
step log reads as a drafting sequence. Coordinates put the torus centre C at
the origin; the light travels left-to-right and downward in elevation
(slope -1), so D is the low point on the left ring and E the high point on
the right ring.
"""
from __future__ import annotations

import enum
import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .planar import (
    Circle2,
    DEFAULT_TOLERANCE,
    Line2,
    Point2,
    distance,
    intersect_line_circle,
    intersect_lines,
    line_through,
    midpoint,
    perpendicular_foot,
    reflect_direction_across_line,
    reflect_point_across_line,
)

SCHEMA_VERSION = 1

LABELS = ("A", "B", "C", "D", "E", "P", "Q", "H", "I", "J", "K", "L", "M",
          "n", "o", "n'", "o'", "n''", "o''")
SHADE_ORDER = ("P", "D", "n''", "H", "M", "Q", "E", "o''", "I", "L")
SYMMETRIC_PAIRS = (("D", "E"), ("P", "Q"), ("H", "I"), ("J", "K"), ("L", "M"),
                   ("n", "o"), ("n'", "o'"), ("n''", "o''"))
CANONICAL_STEP_COUNT = 15

UP = Point2(0.0, 1.0)
DIAG_UP = Point2(math.sqrt(0.5), math.sqrt(0.5))
RAY_ELEVATION = Point2(math.sqrt(0.5), -math.sqrt(0.5))


class ConstructionError(ValueError):
    pass


class NonPositiveDimension(ConstructionError):
    pass


class SpindleNotSupported(ConstructionError):
    pass


class InternalInconsistency(RuntimeError):
    pass


class HRule(enum.Enum):
    VERTICAL_CHORD = "VERTICAL_CHORD"
    RING_TANGENT = "RING_TANGENT"


class LMRule(enum.Enum):
    ORTHOGONAL_FOOT = "ORTHOGONAL_FOOT"
    VERTICAL_MEET = "VERTICAL_MEET"


class RingPick(enum.Enum):
    FORWARD_RAY = "FORWARD_RAY"
    NEAREST = "NEAREST"


@dataclass(frozen=True)
class InterpretationVariant:
    """One reading of the ambiguous steps.

    h_rule
        VERTICAL_CHORD: H is the second crossing of the vertical through D
        with the left ring. RING_TANGENT: the line through D perpendicular to
        PD is the ring tangent at D; H is the opposite contact point of the
        parallel tangent, i.e. where PD extended meets the ring again.
    lm_rule
        ORTHOGONAL_FOOT: L is the orthogonal projection of J onto LM.
        VERTICAL_MEET: L is where the vertical through J meets LM.
    ring_pick
        FORWARD_RAY: n'' is where the mirrored ray leaving P meets the ring.
        NEAREST: n'' is whichever crossing of the mirrored line lies nearer n'.
    """

    h_rule: HRule = HRule.VERTICAL_CHORD
    lm_rule: LMRule = LMRule.ORTHOGONAL_FOOT
    ring_pick: RingPick = RingPick.FORWARD_RAY

    @property
    def name(self) -> str:
        return f"{self.h_rule.value}/{self.lm_rule.value}/{self.ring_pick.value}"

    @property
    def order_key(self) -> tuple[int, int, int]:
        return (list(HRule).index(self.h_rule), list(LMRule).index(self.lm_rule),
                list(RingPick).index(self.ring_pick))

    @classmethod
    def parse(cls, text: str) -> InterpretationVariant:
        if text.lower() == "canonical":
            return CANONICAL
        parts = text.split("/")
        if len(parts) != 3:
            raise ValueError(f"variant must look like H_RULE/LM_RULE/RING_PICK, got {text!r}")
        try:
            return cls(HRule(parts[0]), LMRule(parts[1]), RingPick(parts[2]))
        except ValueError as exc:
            raise ValueError(f"unknown variant {text!r}") from exc

    @classmethod
    def all(cls) -> list[InterpretationVariant]:
        return [cls(h, lm, rp) for h, lm, rp in itertools.product(HRule, LMRule, RingPick)]


CANONICAL = InterpretationVariant()


def derive_radii(width: float, height: float) -> tuple[float, float]:
    """Major and minor radius from the drawn outline extents."""
    if not (width > 0 and height > 0):
        raise NonPositiveDimension(f"width and height must be positive, got {width} x {height}")
    if width < 2 * height:
        raise SpindleNotSupported(
            f"width {width:g} < 2 x height {2 * height:g}: W >= 2H is required "
            "(ring or horn torus only)")
    r = height / 2
    return width / 2 - r, r


@dataclass(frozen=True)
class TorusElevationSpec:
    width: float
    height: float

    def __post_init__(self):
        derive_radii(self.width, self.height)

    @property
    def minor_radius(self) -> float:
        return derive_radii(self.width, self.height)[1]

    @property
    def major_radius(self) -> float:
        return derive_radii(self.width, self.height)[0]

    @property
    def config_id(self) -> str:
        return f"{self.width:g}x{self.height:g}"

    @property
    def extent(self) -> float:
        return max(self.width, self.height)


@dataclass(frozen=True)
class Step:
    index: int
    op: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]


@dataclass
class ConstructionTrace:
    spec: TorusElevationSpec
    variant: InterpretationVariant
    points: dict[str, Point2]
    lines: dict[str, Line2]
    steps: list[Step] = field(default_factory=list)

    def __getitem__(self, label: str) -> Point2:
        return self.points[label]

    @property
    def tolerance(self) -> float:
        return DEFAULT_TOLERANCE.effective(self.spec.extent)

    def shade_controls(self) -> np.ndarray:
        return np.array([tuple(self.points[k]) for k in SHADE_ORDER])


def _far_from(candidates: list[Point2], ref: Point2) -> Point2:
    return max(candidates, key=lambda p: distance(p, ref))


def _near_to(candidates: list[Point2], ref: Point2) -> Point2:
    return min(candidates, key=lambda p: distance(p, ref))


def run_construction(spec: TorusElevationSpec,
                     variant: InterpretationVariant = CANONICAL) -> ConstructionTrace:
    R, r = spec.major_radius, spec.minor_radius
    tol = DEFAULT_TOLERANCE.effective(spec.extent)
    pts: dict[str, Point2] = {}
    lines: dict[str, Line2] = {}
    steps: list[Step] = []

    def log(op, inputs, outputs):
        steps.append(Step(len(steps) + 1, op, tuple(inputs), tuple(outputs)))

    pts["A"] = Point2(-R - r, 0.0)
    pts["B"] = Point2(R + r, 0.0)
    pts["P"] = Point2(-R, 0.0)
    pts["Q"] = Point2(R, 0.0)
    left = Circle2(pts["P"], r)
    right = Circle2(pts["Q"], r)

    lines["AB"] = line_through(pts["A"], pts["B"], tol)
    log("line_through", ["A", "B"], ["AB"])

    # 45-degree lines through the ring centres graze-point the rings
    pts["D"] = intersect_line_circle(Line2(pts["P"], DIAG_UP), left)[0]
    pts["E"] = intersect_line_circle(Line2(pts["Q"], DIAG_UP), right)[-1]
    log("intersect_line_circle", ["P", "Q"], ["D", "E"])

    lines["DE"] = line_through(pts["D"], pts["E"], tol)
    log("line_through", ["D", "E"], ["DE"])

    pts["C"] = intersect_lines(lines["DE"], lines["AB"], tol)
    log("intersect_lines", ["DE", "AB"], ["C"])
    if distance(pts["C"], midpoint(pts["A"], pts["B"])) > tol:
        raise InternalInconsistency("line DE does not bisect AB")

    lines["PD"] = line_through(pts["P"], pts["D"], tol)
    lines["QE"] = line_through(pts["Q"], pts["E"], tol)
    if variant.h_rule is HRule.VERTICAL_CHORD:
        pts["H"] = _far_from(intersect_line_circle(Line2(pts["D"], UP), left), pts["D"])
        pts["I"] = _far_from(intersect_line_circle(Line2(pts["E"], UP), right), pts["E"])
    else:
        pts["H"] = _far_from(intersect_line_circle(lines["PD"], left), pts["D"])
        pts["I"] = _far_from(intersect_line_circle(lines["QE"], right), pts["E"])
    log("intersect_line_circle", ["D", "E"], ["H", "I"])

    lines["HI"] = line_through(pts["H"], pts["I"], tol)
    log("line_through", ["H", "I"], ["HI"])
    if lines["HI"].distance_to(pts["C"]) > tol:
        raise InternalInconsistency("HI does not pass through C")

    lines["HP"] = line_through(pts["H"], pts["P"], tol)
    lines["IQ"] = line_through(pts["I"], pts["Q"], tol)
    log("line_through", ["H", "P", "I", "Q"], ["HP", "IQ"])
    if abs(lines["HP"].direction.cross(lines["IQ"].direction)) > DEFAULT_TOLERANCE.rel_eps:
        raise InternalInconsistency("HP and IQ are not parallel")

    pts["J"] = intersect_lines(lines["HP"], lines["DE"], tol)
    pts["K"] = intersect_lines(lines["IQ"], lines["DE"], tol)
    log("intersect_lines", ["HP", "IQ", "DE"], ["J", "K"])

    lm_dir = lines["HP"].direction
    if lm_dir.x < 0:
        lm_dir = -lm_dir
    lines["LM"] = Line2(pts["C"], lm_dir)
    log("parallel_through", ["C", "HP"], ["LM"])

    if variant.lm_rule is LMRule.ORTHOGONAL_FOOT:
        pts["L"] = perpendicular_foot(pts["J"], lines["LM"])
        pts["M"] = perpendicular_foot(pts["K"], lines["LM"])
        log("perpendicular_foot", ["J", "K", "LM"], ["L", "M"])
    else:
        pts["L"] = intersect_lines(Line2(pts["J"], UP), lines["LM"], tol)
        pts["M"] = intersect_lines(Line2(pts["K"], UP), lines["LM"], tol)
        log("intersect_lines", ["J", "K", "LM"], ["L", "M"])

    lines["An"] = Line2(pts["A"], UP)
    lines["Bo"] = Line2(pts["B"], UP)
    pts["n'"] = perpendicular_foot(pts["D"], lines["An"])
    pts["o'"] = perpendicular_foot(pts["E"], lines["Bo"])
    log("perpendicular_foot", ["D", "E"], ["n'", "o'"])

    pts["n"] = reflect_point_across_line(pts["n'"], lines["PD"])
    pts["o"] = reflect_point_across_line(pts["o'"], lines["QE"])
    log("reflect_point_across_line", ["n'", "PD", "o'", "QE"], ["n", "o"])
    lines["Pn"] = line_through(pts["P"], pts["n"], tol)
    lines["Qo"] = line_through(pts["Q"], pts["o"], tol)
    lines["Pn'"] = line_through(pts["P"], pts["n'"], tol)
    lines["Qo'"] = line_through(pts["Q"], pts["o'"], tol)
    if variant.h_rule is HRule.VERTICAL_CHORD:
        hd = line_through(pts["H"], pts["D"], tol)
        if hd.distance_to(pts["n"]) > tol:
            raise InternalInconsistency("n is not on HD extended")

    axis_p = Line2(pts["P"], lines["HI"].direction)
    axis_q = Line2(pts["Q"], lines["HI"].direction)
    lines["Pn''"] = Line2(pts["P"], reflect_direction_across_line(lines["Pn'"].direction, axis_p))
    lines["Qo''"] = Line2(pts["Q"], reflect_direction_across_line(lines["Qo'"].direction, axis_q))
    log("reflect_direction_across_line", ["Pn'", "Qo'", "HI"], ["Pn''", "Qo''"])

    if variant.ring_pick is RingPick.FORWARD_RAY:
        pts["n''"] = intersect_line_circle(lines["Pn''"], left)[-1]
        pts["o''"] = intersect_line_circle(lines["Qo''"], right)[-1]
    else:
        pts["n''"] = _near_to(intersect_line_circle(lines["Pn''"], left), pts["n'"])
        pts["o''"] = _near_to(intersect_line_circle(lines["Qo''"], right), pts["o'"])
    log("intersect_line_circle", ["Pn''", "Qo''"], ["n''", "o''"])

    log("trace", SHADE_ORDER, ["shade_path"])
    return ConstructionTrace(spec, variant, pts, lines, steps)


def validate_trace(trace: ConstructionTrace) -> list[tuple[str, float]]:
    """Residuals (inches, or sines for parallelism) of the stated incidences.

    Everything is recomputed from the labelled points, so a perturbed trace
    shows up here even though the stored lines are stale.
    """
    p = trace.points
    spec = trace.spec
    R, r = spec.major_radius, spec.minor_radius
    C = midpoint(p["A"], p["B"])
    ray_perp = RAY_ELEVATION

    def off_line(a, b, q):
        return line_through(a, b, 0.0).distance_to(q)

    def slope_residual(a, b):
        return abs((b - a).unit().cross(ray_perp))

    out = [
        ("C_on_DE", off_line(p["D"], p["E"], C)),
        ("C_is_center", distance(p["C"], C)),
        ("HCI_collinear", off_line(p["H"], p["I"], C)),
        ("HP_slope", slope_residual(p["H"], p["P"])),
        ("IQ_slope", slope_residual(p["I"], p["Q"])),
        ("LM_slope", slope_residual(p["L"], p["M"])),
        ("LM_through_C", off_line(p["L"], p["M"], C)),
        ("n_on_HD", off_line(p["H"], p["D"], p["n"])),
        ("o_on_IE", off_line(p["I"], p["E"], p["o"])),
        ("n_prime_foot", distance(p["n'"], Point2(-(R + r), p["D"].z))),
        ("o_prime_foot", distance(p["o'"], Point2(R + r, p["E"].z))),
        ("n_mirror_involution",
         distance(reflect_point_across_line(p["n"], line_through(p["P"], p["D"], 0.0)), p["n'"])),
        ("o_mirror_involution",
         distance(reflect_point_across_line(p["o"], line_through(p["Q"], p["E"], 0.0)), p["o'"])),
        ("n2_on_ring", abs(distance(p["n''"], p["P"]) - r)),
        ("o2_on_ring", abs(distance(p["o''"], p["Q"]) - r)),
    ]
    for a, b in SYMMETRIC_PAIRS:
        out.append((f"symmetry_{a}_{b}", distance(p[a] + p[b], C * 2.0)))
    return out


@dataclass
class ShadePath:
    """Closed centripetal Catmull-Rom curve through the traced points.

    ``points`` holds ``samples`` distinct vertices followed by a copy of the
    first, so ``points[0] == points[-1]``.
    """

    controls: np.ndarray
    points: np.ndarray
    alpha: float = 0.5
    samples: int = 0


def _catmull_rom_segment(p0, p1, p2, p3, alpha, u):
    def knot(a, b):
        return max(float(np.linalg.norm(b - a)) ** alpha, 1e-12)

    t0 = 0.0
    t1 = t0 + knot(p0, p1)
    t2 = t1 + knot(p1, p2)
    t3 = t2 + knot(p2, p3)
    t = (t1 + (t2 - t1) * u)[:, None]
    a1 = (t1 - t) / (t1 - t0) * p0 + (t - t0) / (t1 - t0) * p1
    a2 = (t2 - t) / (t2 - t1) * p1 + (t - t1) / (t2 - t1) * p2
    a3 = (t3 - t) / (t3 - t2) * p2 + (t - t2) / (t3 - t2) * p3
    b1 = (t2 - t) / (t2 - t0) * a1 + (t - t0) / (t2 - t0) * a2
    b2 = (t3 - t) / (t3 - t1) * a2 + (t - t1) / (t3 - t1) * a3
    return (t2 - t) / (t2 - t1) * b1 + (t - t1) / (t2 - t1) * b2


def _allocate(weights: np.ndarray, total: int) -> np.ndarray:
    """Largest-remainder split of ``total`` samples, at least one each."""
    n = len(weights)
    share = weights / weights.sum() * (total - n)
    counts = np.floor(share).astype(int) + 1
    rest = total - counts.sum()
    order = np.argsort(-(share - np.floor(share)), kind="stable")
    counts[order[:rest]] += 1
    return counts


def closed_centripetal_curve(controls: np.ndarray, samples: int, alpha: float = 0.5) -> np.ndarray:
    """Sample a closed centripetal Catmull-Rom curve through ``controls``.

    Each control point is itself a sample. When the control cycle is
    point-symmetric (second half = -first half), sample counts per segment
    are mirrored too, so the sampled polyline keeps the symmetry.
    """
    controls = np.asarray(controls, dtype=float)
    n = len(controls)
    chords = np.linalg.norm(np.roll(controls, -1, axis=0) - controls, axis=1)
    weights = np.maximum(chords, 1e-12) ** alpha
    symmetric = n % 2 == 0 and np.allclose(controls[n // 2:], -controls[:n // 2], atol=1e-12)
    if symmetric:
        half = _allocate(weights[:n // 2], (samples + 1) // 2)
        counts = np.concatenate([half, half])
    else:
        counts = _allocate(weights, samples)
    chunks = []
    for i in range(n):
        p0, p1, p2, p3 = (controls[(i + k) % n] for k in (-1, 0, 1, 2))
        u = np.arange(counts[i]) / counts[i]
        chunks.append(_catmull_rom_segment(p0, p1, p2, p3, alpha, u))
    out = np.concatenate(chunks)
    return np.vstack([out, out[:1]])


def trace_shade_path(trace: ConstructionTrace, samples: int = 2048) -> ShadePath:
    if samples < 512:
        raise ValueError("shade path needs at least 512 samples")
    controls = trace.shade_controls()
    pts = closed_centripetal_curve(controls, samples)
    return ShadePath(controls=controls, points=pts, samples=len(pts) - 1)


def _round6(x: float) -> float:
    v = round(float(x), 6)
    return 0.0 if v == 0 else v


def trace_document(trace: ConstructionTrace, samples: int = 2048, run_config: dict | None = None) -> dict:
    path = trace_shade_path(trace, samples)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "spec": {
            "width": _round6(trace.spec.width),
            "height": _round6(trace.spec.height),
            "R": _round6(trace.spec.major_radius),
            "r": _round6(trace.spec.minor_radius),
        },
        "variant": trace.variant.name,
        "points": {k: [_round6(trace.points[k].x), _round6(trace.points[k].z)] for k in LABELS},
        "shade_path": [[_round6(x), _round6(z)] for x, z in path.points],
        "assertions": [{"id": k, "residual": float(f"{v:.6e}")} for k, v in validate_trace(trace)],
    }
    if run_config is not None:
        doc["run_config"] = run_config
    return doc


def dump_json(doc) -> str:
    return json.dumps(doc, indent=1, ensure_ascii=True) + "\n"
