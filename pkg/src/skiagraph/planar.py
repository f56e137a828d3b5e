"""Ruler-and-compass primitives in the elevation plane.

Coordinates are inches with x to the right and z upward. Directions are unit
vectors; angles are never stored.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


class GeometryError(ValueError):
    pass


class DegenerateInput(GeometryError):
    pass


class ParallelLines(GeometryError):
    pass


class CoincidentLines(ParallelLines):
    pass


@dataclass(frozen=True)
class Point2:
    x: float
    z: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.z)):
            raise DegenerateInput(f"non-finite coordinate ({self.x}, {self.z})")

    def __add__(self, other: Point2) -> Point2:
        return Point2(self.x + other.x, self.z + other.z)

    def __sub__(self, other: Point2) -> Point2:
        return Point2(self.x - other.x, self.z - other.z)

    def __mul__(self, s: float) -> Point2:
        return Point2(self.x * s, self.z * s)

    __rmul__ = __mul__

    def __neg__(self) -> Point2:
        return Point2(-self.x, -self.z)

    def __iter__(self):
        yield self.x
        yield self.z

    def dot(self, other: Point2) -> float:
        return self.x * other.x + self.z * other.z

    def cross(self, other: Point2) -> float:
        return self.x * other.z - self.z * other.x

    def norm(self) -> float:
        return math.hypot(self.x, self.z)

    def unit(self) -> Point2:
        n = self.norm()
        if n == 0.0:
            raise DegenerateInput("zero vector has no direction")
        return Point2(self.x / n, self.z / n)


def distance(p: Point2, q: Point2) -> float:
    return math.hypot(p.x - q.x, p.z - q.z)


def midpoint(p: Point2, q: Point2) -> Point2:
    return Point2(0.5 * (p.x + q.x), 0.5 * (p.z + q.z))


@dataclass(frozen=True)
class Line2:
    anchor: Point2
    direction: Point2

    def __post_init__(self):
        if abs(self.direction.norm() - 1.0) > 1e-12:
            raise DegenerateInput("line direction must be a unit vector")

    @classmethod
    def from_direction(cls, anchor: Point2, direction: Point2) -> Line2:
        return cls(anchor, direction.unit())

    def at(self, t: float) -> Point2:
        return Point2(self.anchor.x + t * self.direction.x, self.anchor.z + t * self.direction.z)

    def param(self, p: Point2) -> float:
        """Signed position of the projection of ``p`` along the line."""
        return (p - self.anchor).dot(self.direction)

    def distance_to(self, p: Point2) -> float:
        return abs(self.direction.cross(p - self.anchor))

    @property
    def slope(self) -> float:
        if self.direction.x == 0.0:
            return math.copysign(math.inf, self.direction.z)
        return self.direction.z / self.direction.x


@dataclass(frozen=True)
class Circle2:
    center: Point2
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise DegenerateInput(f"circle radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class TolerancePolicy:
    abs_eps: float = 1e-12
    rel_eps: float = 1e-9

    def __post_init__(self):
        if not (self.abs_eps > 0 and self.rel_eps > 0):
            raise ValueError("tolerances must be positive")

    def effective(self, scene_extent: float) -> float:
        return max(self.abs_eps, self.rel_eps * scene_extent)


DEFAULT_TOLERANCE = TolerancePolicy()


def _extent(*points: Point2) -> float:
    return max([1.0] + [max(abs(p.x), abs(p.z)) for p in points])


def line_through(p: Point2, q: Point2, tol: float | None = None) -> Line2:
    if tol is None:
        tol = DEFAULT_TOLERANCE.effective(_extent(p, q))
    d = q - p
    if d.norm() <= tol:
        raise DegenerateInput(f"points {tuple(p)} and {tuple(q)} coincide")
    return Line2(p, d.unit())


def intersect_lines(a: Line2, b: Line2, tol: float | None = None) -> Point2:
    if tol is None:
        tol = DEFAULT_TOLERANCE.effective(_extent(a.anchor, b.anchor))
    denom = a.direction.cross(b.direction)
    if abs(denom) <= DEFAULT_TOLERANCE.rel_eps:
        if a.distance_to(b.anchor) <= tol:
            raise CoincidentLines("lines coincide")
        raise ParallelLines("lines are parallel")
    t = (b.anchor - a.anchor).cross(b.direction) / denom
    return a.at(t)


def intersect_line_circle(line: Line2, circle: Circle2) -> list[Point2]:
    """Intersections ordered by increasing position along ``line.direction``.

    A discriminant within 1e-9 * radius**2 of zero is treated as tangency.
    """
    w = line.anchor - circle.center
    b = w.dot(line.direction)
    disc = b * b - (w.dot(w) - circle.radius**2)
    window = 1e-9 * circle.radius**2
    if disc < -window:
        return []
    if disc <= window:
        return [line.at(-b)]
    s = math.sqrt(disc)
    return [line.at(-b - s), line.at(-b + s)]


def reflect_point_across_line(p: Point2, axis: Line2) -> Point2:
    w = p - axis.anchor
    d = axis.direction
    k = 2.0 * w.dot(d)
    return Point2(axis.anchor.x + k * d.x - w.x, axis.anchor.z + k * d.z - w.z)


def reflect_direction_across_line(d: Point2, axis: Line2) -> Point2:
    if abs(d.norm() - 1.0) > 1e-12:
        raise DegenerateInput("direction must be a unit vector")
    a = axis.direction
    k = 2.0 * d.dot(a)
    out = Point2(k * a.x - d.x, k * a.z - d.z)
    # renormalise away accumulated rounding
    return out.unit()


def perpendicular_foot(p: Point2, line: Line2) -> Point2:
    return line.at(line.param(p))
