"""Deterministic randomness, geometric primitives and the density evaluator.

Everything random in the package flows through :class:`SeedPath`. A seed path
is a root seed plus a tuple of nonnegative integers naming a node of the
construction tree (a scale band, a cell, a replicate). Streams are keyed by the
path only, so the order in which a construction is traversed never changes the
realization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "SimartError",
    "ValidationError",
    "ResourceError",
    "UnsupportedShapeError",
    "CurveSingularityError",
    "SeedPath",
    "derive_stream",
    "counter_uniforms",
    "Box",
    "unit_box",
    "clip_segment_length",
    "clip_segment_lengths",
    "clip_segment_spans",
    "snowflake_vertices",
    "snowflake_polygon",
    "snowflake_area",
    "point_in_snowflake",
    "points_in_unit_snowflake",
    "DensityEvaluator",
]


class SimartError(Exception):
    """Base class of every error raised by the package."""


class ValidationError(SimartError, ValueError):
    """Invalid parameters, laws or configuration."""


class ResourceError(SimartError):
    """A computation would exceed a configured resource cap."""


class UnsupportedShapeError(SimartError):
    """The requested operation is not available for a shape kind."""


class CurveSingularityError(SimartError):
    """The gradient of a traced polynomial nearly vanishes on the curve."""

    def __init__(self, point, grad_norm):
        self.point = tuple(float(v) for v in point)
        self.grad_norm = float(grad_norm)
        super().__init__(
            f"near-singular point {self.point}: |grad P| = {self.grad_norm:.3e}"
        )


# ---------------------------------------------------------------------------
# randomness

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SeedPath:
    """Root seed plus a path of nonnegative integers.

    Attributes
    ----------
    root_seed : int
        64-bit root seed.
    path : tuple of int
        Node identifier in the construction tree.
    """

    root_seed: int
    path: tuple = ()

    def __post_init__(self):
        root = int(self.root_seed)
        if root < 0 or root > _MASK64:
            raise ValidationError(f"root_seed must fit in 64 bits, got {self.root_seed}")
        path = tuple(int(p) for p in self.path)
        if any(p < 0 for p in path):
            raise ValidationError(f"path entries must be nonnegative, got {path}")
        object.__setattr__(self, "root_seed", root)
        object.__setattr__(self, "path", path)

    def child(self, *indices: int) -> "SeedPath":
        return SeedPath(self.root_seed, self.path + tuple(int(i) for i in indices))

    def key(self) -> tuple[int, int]:
        """Two 64-bit words identifying this path, used by counter hashing."""
        words = np.random.SeedSequence(self.root_seed, spawn_key=self.path).generate_state(
            2, np.uint64
        )
        return int(words[0]), int(words[1])

    def to_list(self) -> list:
        return [self.root_seed, list(self.path)]

    @classmethod
    def from_list(cls, data) -> "SeedPath":
        return cls(int(data[0]), tuple(data[1]))

    def to_text(self) -> str:
        """Compact form ``root:i.j.k`` used in CSV rows."""
        return f"{self.root_seed}:" + ".".join(str(p) for p in self.path)

    @classmethod
    def from_text(cls, text: str) -> "SeedPath":
        root, _, path = text.partition(":")
        return cls(int(root), tuple(int(p) for p in path.split(".") if p))


def derive_stream(seed_path: SeedPath) -> np.random.Generator:
    """Counter-based generator (Philox) keyed by a seed path.

    The empty path gives the root stream ``Philox(SeedSequence(root_seed))``.
    """
    ss = np.random.SeedSequence(seed_path.root_seed, spawn_key=seed_path.path)
    return np.random.Generator(np.random.Philox(ss))


_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def _splitmix(z: np.ndarray) -> np.ndarray:
    z = z + _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def counter_uniforms(seed_path: SeedPath, level: int, index) -> np.ndarray:
    """Uniforms in [0, 1) addressed by (seed path, level, integer index).

    A stateless hash of the counter; the value for one cell does not depend on
    which other cells are queried. ``index`` must be below 2**56.
    """
    k0, k1 = seed_path.key()
    idx = np.asarray(index, dtype=np.uint64)
    counter = (np.uint64(level) << np.uint64(56)) | idx
    with np.errstate(over="ignore"):
        z = _splitmix(counter ^ np.uint64(k0))
        z = _splitmix(z + np.uint64(k1))
    return (z >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


# ---------------------------------------------------------------------------
# boxes and segments


@dataclass(frozen=True)
class Box:
    """Axis-aligned half-open box ``[low, high)``."""

    low: np.ndarray
    high: np.ndarray

    def __post_init__(self):
        low = np.atleast_1d(np.asarray(self.low, dtype=float)).copy()
        high = np.atleast_1d(np.asarray(self.high, dtype=float)).copy()
        if low.shape != high.shape or low.ndim != 1:
            raise ValidationError("low and high must be vectors of equal length")
        if not np.all(low < high):
            raise ValidationError(f"box needs low < high on every axis: {low} {high}")
        low.flags.writeable = False
        high.flags.writeable = False
        object.__setattr__(self, "low", low)
        object.__setattr__(self, "high", high)

    @property
    def dim(self) -> int:
        return self.low.shape[0]

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.all((x >= self.low) & (x < self.high), axis=-1)

    def volume(self) -> float:
        return float(np.prod(self.high - self.low))


def unit_box(d: int) -> Box:
    return Box(np.zeros(d), np.ones(d))


def clip_segment_lengths(p0, p1, low, high) -> np.ndarray:
    """Vectorized length of segment ``p0 p1`` inside half-open boxes.

    Broadcasting applies over leading axes; the last axis is the coordinate.
    Faces at ``low`` belong to the box and faces at ``high`` do not, which
    only matters for segments lying inside a face.
    """
    span, length = clip_segment_spans(p0, p1, low, high)
    return span * length


def clip_segment_spans(p0, p1, low, high) -> tuple:
    """Fraction of segment ``p0 p1`` inside each half-open box, and the segment length.

    Adjacent boxes share the parameter of their common face bit for bit, so
    sums of spans over a partition telescope without rounding drift.
    """
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    low = np.asarray(low, dtype=float)
    high = np.asarray(high, dtype=float)
    p0, p1, low, high = np.broadcast_arrays(p0, p1, low, high)
    d = p1 - p0
    length = np.sqrt(np.sum(d * d, axis=-1))
    t0 = np.zeros(length.shape)
    t1 = np.ones(length.shape)
    ok = length > 0
    for i in range(p0.shape[-1]):
        di = d[..., i]
        a = p0[..., i]
        lo = low[..., i]
        hi = high[..., i]
        par = di == 0
        ok &= ~par | ((a >= lo) & (a < hi))
        with np.errstate(divide="ignore", invalid="ignore"):
            ta = (lo - a) / di
            tb = (hi - a) / di
        tmin = np.where(par, -np.inf, np.minimum(ta, tb))
        tmax = np.where(par, np.inf, np.maximum(ta, tb))
        t0 = np.maximum(t0, tmin)
        t1 = np.minimum(t1, tmax)
    span = np.where(ok, np.clip(t1 - t0, 0.0, None), 0.0)
    return span, length


def clip_segment_length(p0, p1, box: Box) -> float:
    """Length of the part of segment ``p0 p1`` inside the half-open ``box``."""
    p0 = np.asarray(p0, dtype=float)
    if p0.shape[-1] != box.dim:
        raise ValidationError("segment and box dimensions differ")
    return float(clip_segment_lengths(p0, p1, box.low, box.high))


# ---------------------------------------------------------------------------
# Koch snowflake

_SQRT3 = math.sqrt(3.0)


def snowflake_vertices(diameter: float = 1.0) -> np.ndarray:
    """Vertices of the base equilateral triangle, counterclockwise.

    The snowflake of a given diameter has circumradius ``diameter / 2``; the
    first vertex points up.
    """
    R = 0.5 * diameter
    ang = math.pi / 2 + np.arange(3) * (2 * math.pi / 3)
    return np.column_stack([R * np.cos(ang), R * np.sin(ang)])


def _koch_refine(poly: np.ndarray) -> np.ndarray:
    a = poly
    b = np.roll(poly, -1, axis=0)
    seg = b - a
    # outward normal of a counterclockwise polygon is to the right of the edge
    normal = np.column_stack([seg[:, 1], -seg[:, 0]])
    p1 = a + seg / 3
    p2 = a + 2 * seg / 3
    peak = a + seg / 2 + normal * (_SQRT3 / 6)
    out = np.stack([a, p1, peak, p2], axis=1)
    return out.reshape(-1, 2)


def snowflake_polygon(depth: int = 8, diameter: float = 1.0, center=(0.0, 0.0),
                      rotation: float = 0.0) -> np.ndarray:
    """Polygonal snowflake approximation with ``3 * 4**depth`` vertices."""
    poly = snowflake_vertices(diameter)
    for _ in range(int(depth)):
        poly = _koch_refine(poly)
    if rotation:
        c, s = math.cos(rotation), math.sin(rotation)
        poly = poly @ np.array([[c, s], [-s, c]])
    return poly + np.asarray(center, dtype=float)


def snowflake_area(depth: int = 8, diameter: float = 1.0) -> float:
    """Area of the depth-``depth`` polygonal snowflake.

    Each refinement adds ``3 * 4**(j-1)`` triangles of side ``a / 3**j``.
    """
    a = diameter * _SQRT3 / 2
    tri = _SQRT3 / 4 * a * a
    extra = math.fsum(3 * 4 ** (j - 1) * tri / 9**j for j in range(1, int(depth) + 1))
    return tri + extra


def _in_triangles(x, y, a, b, c):
    """Closed point-in-triangle test for counterclockwise triangles."""

    def side(p, q):
        return (q[:, 0] - p[:, 0]) * (y - p[:, 1]) - (q[:, 1] - p[:, 1]) * (x - p[:, 0])

    return (side(a, b) >= 0) & (side(b, c) >= 0) & (side(c, a) >= 0)


def points_in_unit_snowflake(pts: np.ndarray, depth: int = 8) -> np.ndarray:
    """Membership in the diameter-1 snowflake centred at the origin.

    Recursive test: the base triangle, then for every edge the Koch bump
    triangle, recursing into the four sub-edges only for points inside the
    edge's hull triangle (which contains the whole Koch curve over the edge).
    """
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    x, y = pts[:, 0], pts[:, 1]
    m = len(pts)
    inside = np.zeros(m, dtype=bool)
    verts = snowflake_vertices(1.0)
    v0 = np.broadcast_to(verts[0], (m, 2))
    v1 = np.broadcast_to(verts[1], (m, 2))
    v2 = np.broadcast_to(verts[2], (m, 2))
    inside |= _in_triangles(x, y, v0, v1, v2)
    if depth <= 0:
        return inside
    # work items: point index plus an oriented edge (a -> b)
    idx = np.repeat(np.arange(m), 3)
    a = np.tile(verts, (m, 1))
    b = np.tile(np.roll(verts, -1, axis=0), (m, 1))
    keep = ~inside[idx]
    idx, a, b = idx[keep], a[keep], b[keep]
    for _ in range(int(depth)):
        if len(idx) == 0:
            break
        seg = b - a
        normal = np.column_stack([seg[:, 1], -seg[:, 0]])
        peak = a + seg / 2 + normal * (_SQRT3 / 6)
        px, py = x[idx], y[idx]
        # hull triangle a -> b -> peak is clockwise; test the reversed order
        hull = _in_triangles(px, py, a, peak, b)
        idx, a, b, seg, peak = idx[hull], a[hull], b[hull], seg[hull], peak[hull]
        px, py = px[hull], py[hull]
        p1 = a + seg / 3
        p2 = a + 2 * seg / 3
        bump = _in_triangles(px, py, p1, peak, p2)
        inside[idx[bump]] = True
        rest = ~bump & ~inside[idx]
        idx, a, b, p1, p2, peak = idx[rest], a[rest], b[rest], p1[rest], p2[rest], peak[rest]
        idx = np.repeat(idx, 4)
        a = np.stack([a, p1, peak, p2], axis=1).reshape(-1, 2)
        b = np.stack([p1, peak, p2, b], axis=1).reshape(-1, 2)
    return inside


def point_in_snowflake(x, center, diameter: float, depth: int = 8,
                       rotation: float = 0.0) -> np.ndarray:
    """Membership of points in a scaled, rotated, translated snowflake.

    Parameters
    ----------
    x : array_like, shape (2,) or (m, 2)
    center : array_like, shape (2,)
    diameter : float
    depth : int
        Polygonal approximation level.
    rotation : float
        Counterclockwise rotation in radians.

    Returns
    -------
    bool or ndarray of bool
    """
    if depth < 0:
        raise ValidationError("depth must be nonnegative")
    pts = np.asarray(x, dtype=float)
    scalar = pts.ndim == 1
    local = (pts.reshape(-1, 2) - np.asarray(center, dtype=float)) / float(diameter)
    if rotation:
        c, s = math.cos(rotation), math.sin(rotation)
        local = local @ np.array([[c, -s], [s, c]])
    res = points_in_unit_snowflake(local, depth)
    return bool(res[0]) if scalar else res


# ---------------------------------------------------------------------------
# density evaluators


@dataclass
class DensityEvaluator:
    """Pointwise evaluator of the level-n density of one realization.

    Subclasses implement :meth:`evaluate`. ``level`` is the default level used
    when ``evaluate`` is called without ``n``.

    Attributes
    ----------
    model : object
        The :class:`~simart.models.ModelSpec` (or a plain description) the
        realization was drawn from.
    d : int
    alpha : float
    growth_constant : float
        Pointwise bound ``C`` with ``mu_{n+1} <= C mu_n``.
    depth : int
        Deepest level available.
    support : Box
        Box containing the seed domain.
    """

    model: object
    d: int
    alpha: float
    growth_constant: float
    depth: int
    support: Box
    level: int = field(default=0)

    def evaluate(self, x, n: int | None = None) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError

    def __call__(self, x, n: int | None = None) -> np.ndarray:
        return self.evaluate(x, n)

    def _level(self, n):
        n = self.level if n is None else int(n)
        if n < 0 or n > self.depth:
            raise ValidationError(f"level {n} outside 0..{self.depth}")
        return n

    def total_mass(self, n: int) -> float:  # pragma: no cover
        raise NotImplementedError


def as_points(x, d: int) -> tuple[np.ndarray, bool]:
    """Coerce ``x`` to shape (m, d); second value tells whether it was one point."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
        return arr, True
    if d == 1 and arr.ndim == 1:
        return arr.reshape(-1, 1), arr.shape[0] == 1 and np.ndim(x) == 0
    if arr.ndim == 1:
        if arr.shape[0] != d:
            raise ValidationError(f"point of length {arr.shape[0]} in dimension {d}")
        return arr.reshape(1, d), True
    if arr.shape[-1] != d:
        raise ValidationError(f"points have dimension {arr.shape[-1]}, expected {d}")
    return arr.reshape(-1, d), False


def ball_volume(d: int, radius: float = 1.0) -> float:
    """Lebesgue measure of a d-dimensional ball."""
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * radius**d


def validate_sequence(values: Sequence[float], name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} must be finite")
    return arr
