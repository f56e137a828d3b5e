"""Analytic ground truth for torus shade under the conventional light.

The torus axis is vertical (z). The viewer looks along +y, so the elevation
is the (x, z) plane and front points have y < 0. Light travels along
(1, 1, -1)/sqrt(3): 45 degrees in both plan and elevation.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from skimage import measure

from .planar import Point2

LIGHT = np.array([1.0, 1.0, -1.0]) / math.sqrt(3.0)
DEFAULT_RESOLUTION = 1024
MARGIN_FRACTION = 0.02


class OracleError(ValueError):
    pass


class InvalidResolution(OracleError):
    pass


class EmptyShadeRegion(OracleError):
    pass


def true_angle() -> float:
    """Altitude of the conventional ray above the horizontal plane, in degrees."""
    return math.degrees(math.atan(1.0 / math.sqrt(2.0)))


def degrees_to_dm(angle: float) -> str:
    total = round(angle * 60)
    return f"{total // 60}°{total % 60:02d}′"


@dataclass(frozen=True)
class Torus3:
    R: float
    r: float

    def __post_init__(self):
        if not (self.r > 0 and self.R >= self.r):
            raise ValueError(f"need R >= r > 0, got R={self.R}, r={self.r}")

    @classmethod
    def from_spec(cls, spec) -> Torus3:
        return cls(spec.major_radius, spec.minor_radius)

    def position(self, u, v):
        u, v = np.asarray(u, float), np.asarray(v, float)
        rho = self.R + self.r * np.cos(v)
        return np.stack([rho * np.cos(u), rho * np.sin(u), self.r * np.sin(v)], axis=-1)

    @staticmethod
    def normal(u, v):
        u, v = np.asarray(u, float), np.asarray(v, float)
        return np.stack([np.cos(v) * np.cos(u), np.cos(v) * np.sin(u), np.sin(v)], axis=-1)


def terminator_v(u):
    """Meridian angles where the ray grazes the surface at azimuth ``u``.

    N.L = 0 reduces to tan v = cos u + sin u; the inner branch is the
    antipodal meridian point.
    """
    v_outer = np.arctan(np.cos(u) + np.sin(u))
    return v_outer, v_outer + np.pi


def project_elevation(u, v, torus: Torus3):
    """Orthographic front view of surface point (u, v): (x, z)."""
    rho = torus.R + torus.r * np.cos(v)
    return np.stack([rho * np.cos(u), torus.r * np.sin(v)], axis=-1)


def terminator_loops(torus: Torus3, samples: int = 4096) -> tuple[np.ndarray, np.ndarray]:
    """Outer and inner terminator loops in elevation, each closed."""
    u = np.linspace(0.0, 2 * np.pi, samples + 1)
    u[-1] = 0.0
    v_out, v_in = terminator_v(u)
    return project_elevation(u, v_out, torus), project_elevation(u, v_in, torus)


def shade_fraction(torus: Torus3, samples: int = 1024 * 1024) -> float:
    """Fraction of the (u, v) parameter square where the surface is in shade."""
    if samples < 10_000:
        raise ValueError("need at least 1e4 samples")
    n = int(math.isqrt(samples))
    g = (np.arange(n) + 0.5) * (2 * np.pi / n)
    u, v = np.meshgrid(g, g, indexing="ij")
    ndotl = Torus3.normal(u, v) @ LIGHT
    return float(np.count_nonzero(ndotl > 0)) / ndotl.size


class PixelState(enum.IntEnum):
    OUTSIDE = 0
    LIT = 1
    SHADE = 2


PGM_LEVELS = {PixelState.OUTSIDE: 0, PixelState.LIT: 128, PixelState.SHADE: 255}


@dataclass
class ShadeMask:
    """Raster over the elevation bounding box; row 0 is the top."""

    state: np.ndarray
    pixel: float
    x_min: float
    z_max: float

    @property
    def shape(self):
        return self.state.shape

    def centers(self):
        nz, nx = self.state.shape
        xs = self.x_min + (np.arange(nx) + 0.5) * self.pixel
        zs = self.z_max - (np.arange(nz) + 0.5) * self.pixel
        return xs, zs

    def to_pgm(self) -> bytes:
        img = np.zeros(self.state.shape, dtype=np.uint8)
        for s, level in PGM_LEVELS.items():
            img[self.state == s] = level
        nz, nx = img.shape
        return f"P5\n{nx} {nz}\n255\n".encode("ascii") + img.tobytes()

    def rowcol_to_xz(self, rc: np.ndarray) -> np.ndarray:
        x = self.x_min + (rc[:, 1] + 0.5) * self.pixel
        z = self.z_max - (rc[:, 0] + 0.5) * self.pixel
        return np.column_stack([x, z])


def mask_grid(torus: Torus3, resolution: int = DEFAULT_RESOLUTION):
    """Pixel size and grid shape, symmetric about the torus centre."""
    if resolution < 64:
        raise InvalidResolution(f"resolution must be >= 64 on the long side, got {resolution}")
    margin_px = max(2, math.ceil(MARGIN_FRACTION * resolution))
    half_w, half_h = torus.R + torus.r, torus.r
    nx = resolution
    pixel = 2 * half_w / (nx - 2 * margin_px)
    nz = 2 * math.ceil(half_h / pixel) + 2 * margin_px
    return pixel, nx, nz


def inside_stadium(x, z, torus: Torus3):
    zz = np.clip(np.abs(z) / torus.r, 0.0, 1.0)
    return (np.abs(z) <= torus.r) & (np.abs(x) <= torus.R + torus.r * np.sqrt(1 - zz * zz))


def visible_shade_mask(torus: Torus3, resolution: int = DEFAULT_RESOLUTION) -> ShadeMask:
    """Classify every pixel of the elevation by the visible front outer sheet.

    The front outer sheet (cos v >= 0, sin u <= 0) covers the whole outline,
    so each pixel has a closed-form surface point and no root finding is
    needed.
    """
    pixel, nx, nz = mask_grid(torus, resolution)
    mask = ShadeMask(np.zeros((nz, nx), dtype=np.uint8), pixel, -nx * pixel / 2, nz * pixel / 2)
    xs, zs = mask.centers()
    X, Z = np.meshgrid(xs, zs)
    inside = inside_stadium(X, Z, torus)
    sin_v = np.clip(Z / torus.r, -1.0, 1.0)
    cos_v = np.sqrt(1.0 - sin_v * sin_v)
    rho = torus.R + torus.r * cos_v
    cos_u = np.clip(X / rho, -1.0, 1.0)
    sin_u = -np.sqrt(1.0 - cos_u * cos_u)
    shade = cos_v * (cos_u + sin_u) - sin_v > 0
    mask.state[inside] = PixelState.LIT
    mask.state[inside & shade] = PixelState.SHADE
    return mask


def _contours(binary: np.ndarray, mask: ShadeMask) -> list[np.ndarray]:
    padded = np.pad(binary.astype(float), 1)
    out = []
    for c in measure.find_contours(padded, 0.5):
        xz = mask.rowcol_to_xz(c - 1.0)
        if not np.array_equal(xz[0], xz[-1]):
            xz = np.vstack([xz, xz[:1]])
        out.append(xz)
    # deterministic order: by leftmost vertex
    out.sort(key=lambda a: (float(a[:, 0].min()), float(a[:, 1].min())))
    return out


def extract_outline(mask: ShadeMask) -> list[np.ndarray]:
    """Closed contours (inches) of the SHADE region."""
    shade = mask.state == PixelState.SHADE
    if not shade.any():
        raise EmptyShadeRegion("mask has no shade pixels")
    return _contours(shade, mask)


def silhouette_outline(mask: ShadeMask) -> list[np.ndarray]:
    return _contours(mask.state != PixelState.OUTSIDE, mask)


def stadium_distance(xz: np.ndarray, torus: Torus3, samples: int = 20000) -> np.ndarray:
    """Distance from each point to the analytic elevation outline."""
    from scipy.spatial import cKDTree

    outline = stadium_polyline(torus, samples)
    d, _ = cKDTree(outline).query(xz)
    return d


def stadium_polyline(torus: Torus3, samples: int = 2048) -> np.ndarray:
    """Closed elevation silhouette: two straight edges joined by semicircles."""
    n = samples // 4
    t = np.linspace(-np.pi / 2, np.pi / 2, n)
    right = np.column_stack([torus.R + torus.r * np.cos(t), torus.r * np.sin(t)])
    top = np.column_stack([np.linspace(torus.R, -torus.R, n), np.full(n, torus.r)])
    left = -right
    bottom = -top
    out = np.vstack([right, top, left, bottom])
    return np.vstack([out, out[:1]])


@dataclass
class OracleShade:
    torus: Torus3
    outer_loop: np.ndarray
    inner_loop: np.ndarray
    region_outline: list[np.ndarray]
    mask: ShadeMask
    fraction: float

    def landmark(self, u: float) -> Point2:
        v = terminator_v(u)[0]
        x, z = project_elevation(u, v, self.torus)
        return Point2(float(x), float(z))


def oracle_shade(torus: Torus3, resolution: int = DEFAULT_RESOLUTION,
                 loop_samples: int = 4096, fraction_samples: int = 256 * 256) -> OracleShade:
    outer, inner = terminator_loops(torus, loop_samples)
    mask = visible_shade_mask(torus, resolution)
    return OracleShade(torus, outer, inner, extract_outline(mask), mask,
                       shade_fraction(torus, fraction_samples))
