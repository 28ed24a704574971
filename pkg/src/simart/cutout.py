"""Poissonian cutout random sets and their densities.

A cutout realization is a finite list of shapes ``c + s * Lambda`` with
diameters ``s`` in ``[2**-depth, 1)``. The surviving set at level ``n`` is the
seed domain minus every shape of diameter at least ``2**-n``; its density is
``2**(alpha n)`` on survivors and 0 elsewhere.

Sampling works in the coordinates ``(c, s)`` where the intensity reads
``r * s**(-d-1) dc ds``. For each dyadic scale band the region of centres whose
shape can reach the seed domain (or a query window) is explicit, so the band
count is Poisson with a closed-form mean and every draw is accepted.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from . import kernels
from .core import (
    Box,
    DensityEvaluator,
    ResourceError,
    SeedPath,
    UnsupportedShapeError,
    ValidationError,
    as_points,
    ball_volume,
    derive_stream,
    points_in_unit_snowflake,
    snowflake_area,
)

SHAPE_KINDS = ("ball", "snowflake", "rotated-snowflake")
_KIND_CODE = {k: i for i, k in enumerate(SHAPE_KINDS)}
DEFAULT_COUNT_CAP = 10**8
_ROW_CHUNK = 1 << 18


@dataclass(frozen=True)
class IntensitySpec:
    """Shape atoms of the reference measure.

    Attributes
    ----------
    atoms : tuple of (kind, weight)
        Each atom puts mass ``weight`` on a diameter-1 shape of ``kind``.
    shape_scale : float
        Linear shrink factor applied to every shape (1 for the plain model,
        below 1 for inner approximations).
    snowflake_depth : int
        Polygonal level used for snowflake areas and membership.
    """

    atoms: tuple = ()
    shape_scale: float = 1.0
    snowflake_depth: int = 8

    def __post_init__(self):
        atoms = tuple((str(k), float(w)) for k, w in self.atoms)
        for kind, w in atoms:
            if kind not in _KIND_CODE:
                raise UnsupportedShapeError(f"unknown shape kind {kind!r}")
            if not (w >= 0 and math.isfinite(w)):
                raise ValidationError(f"atom weight must be finite and >= 0, got {w}")
        if not (0 < self.shape_scale <= 1):
            raise ValidationError("shape_scale must lie in (0, 1]")
        object.__setattr__(self, "atoms", atoms)

    @property
    def total_weight(self) -> float:
        return math.fsum(w for _, w in self.atoms)

    def to_dict(self) -> dict:
        return {
            "atoms": [[k, w] for k, w in self.atoms],
            "shape_scale": self.shape_scale,
            "snowflake_depth": self.snowflake_depth,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "IntensitySpec":
        return cls(
            tuple(tuple(a) for a in data.get("atoms", ())),
            float(data.get("shape_scale", 1.0)),
            int(data.get("snowflake_depth", 8)),
        )


def alpha_of_intensity(spec: IntensitySpec, d: int) -> float:
    """Expected Lebesgue measure of the reference shapes, ``sum r Leb(Lambda)``."""
    if d not in (1, 2, 3):
        raise ValidationError(f"d must be 1, 2 or 3, got {d}")
    total = []
    for kind, w in spec.atoms:
        if kind == "ball":
            leb = ball_volume(d, 0.5 * spec.shape_scale)
        elif kind in ("snowflake", "rotated-snowflake"):
            if d != 2:
                raise UnsupportedShapeError("snowflake shapes exist only in d = 2")
            leb = snowflake_area(spec.snowflake_depth, spec.shape_scale)
        else:  # pragma: no cover - rejected by IntensitySpec
            raise UnsupportedShapeError(kind)
        total.append(w * leb)
    return math.fsum(total)


@dataclass(frozen=True)
class Domain:
    """Seed domain: a ball ``B(center, radius)`` or a snowflake of a diameter."""

    kind: str = "ball"
    d: int = 2
    size: float = 1.0  # radius for balls, diameter for snowflakes
    center: tuple = ()
    snowflake_depth: int = 8

    def __post_init__(self):
        if self.kind not in ("ball", "snowflake"):
            raise ValidationError(f"unknown domain kind {self.kind!r}")
        if self.kind == "snowflake" and self.d != 2:
            raise ValidationError("snowflake domains need d = 2")
        center = tuple(float(v) for v in self.center) or (0.0,) * self.d
        if len(center) != self.d:
            raise ValidationError("domain centre has wrong dimension")
        object.__setattr__(self, "center", center)

    @property
    def circumradius(self) -> float:
        return self.size if self.kind == "ball" else 0.5 * self.size

    def bounding_box(self) -> Box:
        c = np.asarray(self.center)
        R = self.circumradius
        return Box(c - R, c + R + 1e-12 * max(R, 1.0))

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, self.d)
        local = pts - np.asarray(self.center)
        if self.kind == "ball":
            return np.sum(local * local, axis=1) <= self.size**2
        return points_in_unit_snowflake(local / self.size, self.snowflake_depth)

    def volume(self) -> float:
        if self.kind == "ball":
            return ball_volume(self.d, self.size)
        return snowflake_area(self.snowflake_depth, self.size)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "d": self.d, "size": self.size,
                "center": list(self.center), "snowflake_depth": self.snowflake_depth}

    @classmethod
    def from_dict(cls, data: dict) -> "Domain":
        return cls(data["kind"], int(data["d"]), float(data["size"]),
                   tuple(data.get("center", ())), int(data.get("snowflake_depth", 8)))


def canonical_domain(spec: IntensitySpec, d: int) -> Domain:
    """Unit ball for ball models, diameter-1 snowflake when snowflakes are present."""
    if any(k != "ball" for k, _ in spec.atoms):
        return Domain("snowflake", 2, 1.0, (), spec.snowflake_depth)
    return Domain("ball", d, 1.0)


def band_of_scale(s: float) -> int:
    """Band index ``k`` with ``2**-(k+1) <= s < 2**-k`` (exact, via the exponent)."""
    m, e = math.frexp(s)  # s = m 2**e with m in [0.5, 1)
    return -e


# ---------------------------------------------------------------------------
# band geometry


def _power_integral(e: int, a: float, b: float) -> float:
    if e == -1:
        return math.log(b / a)
    return (b ** (e + 1) - a ** (e + 1)) / (e + 1)


def _power_inverse(e: int, a: float, b: float, u: np.ndarray) -> np.ndarray:
    if e == -1:
        return a * (b / a) ** u
    lo, hi = a ** (e + 1), b ** (e + 1)
    return (lo + u * (hi - lo)) ** (1.0 / (e + 1))


@dataclass(frozen=True)
class _BandGeometry:
    """Mixture of power laws describing the centre-region volume ``V(s)``.

    ``V(s) = sum_j coef[j] * s**j`` and the scale density is
    ``s**(-d-1) V(s)`` on the band.
    """

    d: int
    coef: tuple
    kind: str  # "ball" (centre in a ball of radius R + s/2) or "box"
    R: float = 0.0
    low: tuple = ()
    high: tuple = ()


def _geometry(domain: Domain, window) -> _BandGeometry:
    d = domain.d
    if window is None:
        R = domain.circumradius
        om = ball_volume(d, 1.0)
        # omega_d (R + s/2)**d = sum_j C(d, j) R**(d-j) 2**-j s**j
        coef = tuple(om * math.comb(d, j) * R ** (d - j) * 0.5**j for j in range(d + 1))
        return _BandGeometry(d, coef, "ball", R=R)
    low = np.asarray(window[0], dtype=float)
    high = np.asarray(window[1], dtype=float)
    # box expanded by s/2 on each side: prod (w_i + s)
    widths = high - low
    # np.poly(-w) lists the coefficients of prod (s + w_i), highest power first
    coef = tuple(float(v) for v in np.poly(-widths)[::-1])
    return _BandGeometry(d, coef, "box", low=tuple(low), high=tuple(high))


def band_means(spec: IntensitySpec, domain: Domain, depth: int, window=None) -> np.ndarray:
    """Poisson means of the number of sampled shapes per band ``k = 0..depth-1``.

    Without a window these are exactly the means of the numbers of shapes
    whose circumscribed ball meets the circumscribed ball of the domain.
    """
    geo = _geometry(domain, window)
    r = spec.total_weight
    d = domain.d
    out = np.empty(depth)
    for k in range(depth):
        a, b = 2.0 ** (-(k + 1)), 2.0 ** (-k)
        out[k] = r * math.fsum(
            c * _power_integral(j - d - 1, a, b) for j, c in enumerate(geo.coef)
        )
    return out


def _uniform_ball(u: np.ndarray, radius: np.ndarray, d: int) -> np.ndarray:
    if d == 1:
        return (radius * (2 * u[:, 0] - 1))[:, None]
    if d == 2:
        rr = radius * np.sqrt(u[:, 0])
        th = 2 * math.pi * u[:, 1]
        return np.column_stack([rr * np.cos(th), rr * np.sin(th)])
    rr = radius * np.cbrt(u[:, 0])
    ct = 2 * u[:, 1] - 1
    st = np.sqrt(np.maximum(0.0, 1 - ct * ct))
    ph = 2 * math.pi * u[:, 2]
    return np.column_stack([rr * st * np.cos(ph), rr * st * np.sin(ph), rr * ct])


def _sample_band(spec: IntensitySpec, domain: Domain, k: int, seed: SeedPath,
                 geo: _BandGeometry, mean: float) -> dict:
    """Draw the shapes of scale band ``k`` (independent stream per band)."""
    d = domain.d
    rng = derive_stream(seed.child(k))
    count = int(rng.poisson(mean)) if mean > 0 else 0
    a, b = 2.0 ** (-(k + 1)), 2.0 ** (-k)
    weights = np.array([c * _power_integral(j - d - 1, a, b) for j, c in enumerate(geo.coef)])
    cum_mix = np.cumsum(weights / weights.sum())
    kinds = [kd for kd, w in spec.atoms if w > 0]
    kw = np.array([w for _, w in spec.atoms if w > 0])
    cum_kind = np.cumsum(kw / kw.sum()) if len(kw) else np.ones(1)
    # column layout: mixture, scale, [kind], [rotation], centre
    multi = len(kinds) > 1
    rotated = "rotated-snowflake" in kinds
    cols = 2 + multi + rotated + d
    cpos = 2 + multi + rotated
    parts = []
    done = 0
    while done < count:
        m = min(_ROW_CHUNK, count - done)
        u = rng.random((m, cols))
        done += m
        comp = np.minimum(np.searchsorted(cum_mix, u[:, 0], side="right"), d)
        s = np.empty(m)
        for j in range(d + 1):
            sel = comp == j
            if sel.any():
                s[sel] = _power_inverse(j - d - 1, a, b, u[sel, 1])
        s = np.clip(s, a, np.nextafter(b, 0.0))
        if multi:
            kidx = np.minimum(np.searchsorted(cum_kind, u[:, 2], side="right"), len(kinds) - 1)
        else:
            kidx = np.zeros(m, dtype=np.int64)
        rot = 2 * math.pi * u[:, 2 + multi] if rotated else np.zeros(m)
        if geo.kind == "ball":
            c = _uniform_ball(u[:, cpos:], geo.R + 0.5 * s, d) + np.asarray(domain.center)
        else:
            lo = np.asarray(geo.low)
            hi = np.asarray(geo.high)
            c = lo - 0.5 * s[:, None] + u[:, cpos:cpos + d] * (hi - lo + s[:, None])
        parts.append((c, s, kidx, rot))
    if not parts:
        return {"c": np.zeros((0, d)), "s": np.zeros(0), "kind": np.zeros(0, np.int8),
                "rot": np.zeros(0)}
    c = np.concatenate([p[0] for p in parts])
    s = np.concatenate([p[1] for p in parts])
    kidx = np.concatenate([p[2] for p in parts])
    rot = np.concatenate([p[3] for p in parts])
    code = np.array([_KIND_CODE[kd] for kd in kinds], dtype=np.int8)[kidx]
    rot = np.where(code == _KIND_CODE["rotated-snowflake"], rot, 0.0)
    # discard shapes that cannot meet the domain (or the window)
    reach = 0.5 * s
    off = c - np.asarray(domain.center)
    keep = np.sqrt(np.sum(off * off, axis=1)) <= domain.circumradius + reach
    if geo.kind == "box":
        gap = np.maximum(np.maximum(np.asarray(geo.low) - c, c - np.asarray(geo.high)), 0.0)
        keep &= np.sqrt(np.sum(gap * gap, axis=1)) <= reach
    return {"c": c[keep], "s": s[keep], "kind": code[keep], "rot": rot[keep]}


@dataclass
class CutoutRealization:
    """Sampled cutouts of one run.

    Attributes
    ----------
    spec : IntensitySpec
    domain : Domain
    depth : int
    seed : SeedPath
    centers : ndarray, shape (m, d)
    scales : ndarray, shape (m,)
        Shape diameters before ``spec.shape_scale`` is applied.
    kinds : ndarray of int8
        Index into ``SHAPE_KINDS``.
    rotations : ndarray
    window : tuple of arrays or None
        Closed box the sample was restricted to; densities are only valid
        inside it.
    """

    spec: IntensitySpec
    domain: Domain
    depth: int
    seed: SeedPath
    centers: np.ndarray
    scales: np.ndarray
    kinds: np.ndarray
    rotations: np.ndarray
    window: tuple | None = None
    _hash: object = field(default=None, repr=False, compare=False)

    @property
    def d(self) -> int:
        return self.domain.d

    @property
    def alpha(self) -> float:
        return alpha_of_intensity(self.spec, self.d)

    @property
    def growth_constant(self) -> float:
        return 2.0**self.alpha

    @cached_property
    def bands(self) -> np.ndarray:
        # s in [2**-(k+1), 2**-k)  <=>  frexp exponent is -k
        return -np.frexp(self.scales)[1].astype(np.int64)

    @cached_property
    def radii(self) -> np.ndarray:
        """Radius of the ball (circumscribed ball for snowflakes) of each shape."""
        return 0.5 * self.scales * self.spec.shape_scale

    def __len__(self) -> int:
        return len(self.scales)

    def disc_hash(self) -> kernels.DiscHash:
        if self._hash is None:
            self._hash = kernels.DiscHash(self.centers, self.radii, self.bands)
        return self._hash

    def kill_levels(self, pts) -> np.ndarray:
        """First level at which each point is covered (255 when never)."""
        pts = np.asarray(pts, dtype=float).reshape(-1, self.d)
        if len(self.scales) == 0:
            return np.full(len(pts), kernels.NEVER, dtype=np.uint8)
        h = self.disc_hash()
        if np.all(self.kinds == _KIND_CODE["ball"]):
            return h.kill_levels(pts)
        kill = np.full(len(pts), kernels.NEVER, dtype=np.uint8)
        pi, qi = h.candidate_pairs(pts)
        if len(pi) == 0:
            return kill
        hit = self.kinds[qi] == _KIND_CODE["ball"]
        snow = ~hit
        if snow.any():
            local = self._snowflake_local(pts[pi[snow]], qi[snow])
            hit[snow] = points_in_unit_snowflake(local, self.spec.snowflake_depth)
        np.minimum.at(kill, pi[hit], (self.bands[qi[hit]] + 1).astype(np.uint8))
        return kill

    def _snowflake_local(self, pts, q):
        local = (pts - self.centers[q]) / (self.scales[q] * self.spec.shape_scale)[:, None]
        th = self.rotations[q]
        c, s = np.cos(th), np.sin(th)
        # rotate by -theta into the reference frame
        return np.column_stack([c * local[:, 0] + s * local[:, 1],
                                -s * local[:, 0] + c * local[:, 1]])

    def in_window(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, self.d)
        if self.window is None:
            return np.ones(len(pts), dtype=bool)
        lo, hi = self.window
        return np.all((pts >= lo) & (pts <= hi), axis=1)

    def density(self, pts, n: int) -> np.ndarray:
        """``2**(alpha n)`` on points of ``A_n`` and 0 elsewhere."""
        if n < 0 or n > self.depth:
            raise ValidationError(f"level {n} outside 0..{self.depth}")
        pts = np.asarray(pts, dtype=float).reshape(-1, self.d)
        alive = self.domain.contains(pts)
        if n > 0 and len(self.scales):
            alive &= self.kill_levels(pts) > n
        out = np.where(alive, 2.0 ** (self.alpha * n), 0.0)
        if self.window is not None:
            out = np.where(self.in_window(pts), out, np.nan)
        return out

    def density_levels(self, pts, depth: int | None = None) -> np.ndarray:
        """``density(pts, n)`` for ``n = 0..depth`` stacked, shape (depth + 1, m).

        Kill levels are computed once for all levels.
        """
        depth = self.depth if depth is None else depth
        if depth < 0 or depth > self.depth:
            raise ValidationError(f"level {depth} outside 0..{self.depth}")
        pts = np.asarray(pts, dtype=float).reshape(-1, self.d)
        inside = self.domain.contains(pts)
        kill = self.kill_levels(pts) if len(self.scales) else np.full(len(pts), kernels.NEVER)
        n = np.arange(depth + 1)[:, None]
        alive = inside[None, :] & ((n == 0) | (kill[None, :] > n))
        out = np.where(alive, 2.0 ** (self.alpha * n), 0.0)
        if self.window is not None:
            out = np.where(self.in_window(pts)[None, :], out, np.nan)
        return out

    def evaluator(self, level: int = 0) -> "CutoutEvaluator":
        return CutoutEvaluator(self, self.d, self.alpha, self.growth_constant,
                               self.depth, self.domain.bounding_box(), level, realization=self)

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "model": "cutout",
            "spec": self.spec.to_dict(),
            "domain": self.domain.to_dict(),
            "seed": self.seed.to_list(),
            "depth": self.depth,
            "alpha": self.alpha,
            "window": None if self.window is None else [list(map(float, w)) for w in self.window],
            "cutouts": [
                {"c": [float(v) for v in c], "s": float(s), "kind": SHAPE_KINDS[int(k)],
                 "rot": float(r)}
                for c, s, k, r in zip(self.centers, self.scales, self.kinds, self.rotations)
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "CutoutRealization":
        if data.get("model") != "cutout":
            raise ValidationError("not a cutout realization document")
        domain = Domain.from_dict(data["domain"])
        cuts = data["cutouts"]
        d = domain.d
        window = data.get("window")
        return cls(
            IntensitySpec.from_dict(data["spec"]),
            domain,
            int(data["depth"]),
            SeedPath.from_list(data["seed"]),
            np.array([c["c"] for c in cuts], dtype=float).reshape(len(cuts), d),
            np.array([c["s"] for c in cuts], dtype=float),
            np.array([_KIND_CODE[c["kind"]] for c in cuts], dtype=np.int8),
            np.array([c["rot"] for c in cuts], dtype=float),
            None if window is None else tuple(np.asarray(w, dtype=float) for w in window),
        )

    @classmethod
    def from_json(cls, text: str) -> "CutoutRealization":
        return cls.from_dict(json.loads(text))


@dataclass
class CutoutEvaluator(DensityEvaluator):
    """Density evaluator bound to a :class:`CutoutRealization`."""

    realization: CutoutRealization = None

    def evaluate(self, x, n=None):
        n = self._level(n)
        pts, scalar = as_points(x, self.d)
        out = self.realization.density(pts, n)
        return float(out[0]) if scalar else out


def _check_window(window, d):
    if window is None:
        return None
    lo = np.asarray(window[0], dtype=float).reshape(d)
    hi = np.asarray(window[1], dtype=float).reshape(d)
    if np.any(hi < lo):
        raise ValidationError("window needs low <= high")
    return lo, hi


def sample_cutouts(spec: IntensitySpec, domain: Domain | None, depth: int, seed: SeedPath,
                   window=None, count_cap: float = DEFAULT_COUNT_CAP,
                   d: int | None = None) -> CutoutRealization:
    """Sample the shapes with diameters in ``[2**-depth, 1)`` reaching the domain.

    Parameters
    ----------
    spec : IntensitySpec
    domain : Domain or None
        Seed domain; ``None`` selects the canonical one (needs ``d``).
    depth : int
        Number of scale bands, ``>= 1``.
    seed : SeedPath
        Band ``k`` uses the stream ``seed.child(k)``.
    window : (low, high) or None
        Optional closed box. Only shapes reaching both the domain and the
        window are drawn; the result is exact for density queries inside the
        window and much cheaper when the window is small.
    count_cap : float
        Refuse when the expected number of shapes exceeds this.

    Returns
    -------
    CutoutRealization
    """
    if depth < 1:
        raise ValidationError("depth must be >= 1")
    if domain is None:
        domain = canonical_domain(spec, d or 2)
    window = _check_window(window, domain.d)
    if any(k != "ball" for k, w in spec.atoms if w > 0) and domain.d != 2:
        raise UnsupportedShapeError("snowflake shapes exist only in d = 2")
    means = band_means(spec, domain, depth, window)
    expected = float(means.sum())
    if expected > count_cap:
        raise ResourceError(
            f"expected {expected:.3g} cutouts exceeds the cap {count_cap:.3g}; lower the depth"
        )
    geo = _geometry(domain, window)
    bands = [_sample_band(spec, domain, k, seed, geo, means[k]) for k in range(depth)]
    return CutoutRealization(
        spec, domain, depth, seed,
        np.concatenate([b["c"] for b in bands]).reshape(-1, domain.d),
        np.concatenate([b["s"] for b in bands]),
        np.concatenate([b["kind"] for b in bands]).astype(np.int8),
        np.concatenate([b["rot"] for b in bands]),
        window,
    )


def band_counts(spec: IntensitySpec, domain: Domain, depth: int, seed: SeedPath,
                window=None) -> np.ndarray:
    """Number of kept shapes per band (the sample of :func:`sample_cutouts`)."""
    real = sample_cutouts(spec, domain, depth, seed, window)
    return np.bincount(real.bands, minlength=depth)[:depth]


def raster_kill_levels(spec: IntensitySpec, domain: Domain, depth: int, seed: SeedPath,
                       resolution: int, count_cap: float = DEFAULT_COUNT_CAP) -> np.ndarray:
    """Kill-level raster of the domain's bounding square, streamed band by band.

    Produces the same raster as rasterizing :func:`sample_cutouts` output but
    only holds one band of shapes in memory. Pixel ``(j, i)`` has centre
    ``low + ((i, j) + 0.5) * h`` with ``h = 2 R / resolution``. Only ball
    shapes in ``d = 2`` are supported.
    """
    if domain.d != 2 or any(k != "ball" for k, w in spec.atoms if w > 0):
        raise UnsupportedShapeError("streamed rasters support ball shapes in d = 2")
    means = band_means(spec, domain, depth)
    if means.sum() > count_cap:
        raise ResourceError(f"expected {means.sum():.3g} cutouts exceeds the cap")
    geo = _geometry(domain, None)
    R = domain.circumradius
    x0 = domain.center[0] - R
    y0 = domain.center[1] - R
    h = 2 * R / resolution
    kill = np.full((resolution, resolution), kernels.NEVER, dtype=np.uint8)
    for k in range(depth):
        b = _sample_band(spec, domain, k, seed, geo, means[k])
        lv = np.full(len(b["s"]), k + 1, dtype=np.uint8)
        kernels.raster_kill_2d(b["c"][:, 0], b["c"][:, 1], 0.5 * b["s"] * spec.shape_scale,
                               lv, x0, y0, h, kill)
    return kill


def pixel_centers(domain: Domain, resolution: int) -> np.ndarray:
    R = domain.circumradius
    t = (np.arange(resolution) + 0.5) * (2 * R / resolution)
    xs = domain.center[0] - R + t
    ys = domain.center[1] - R + t
    X, Y = np.meshgrid(xs, ys)
    return np.column_stack([X.ravel(), Y.ravel()])


def density_raster(real: CutoutRealization, n: int, resolution: int) -> np.ndarray:
    """Raster of ``mu_n`` over the domain's bounding square (row ``j`` is y)."""
    if real.d != 2:
        raise UnsupportedShapeError("rasters need d = 2")
    pts = pixel_centers(real.domain, resolution)
    out = np.zeros(len(pts))
    step = 1 << 20
    for s in range(0, len(pts), step):
        out[s:s + step] = real.density(pts[s:s + step], n)
    return out.reshape(resolution, resolution)


def inner_approximation(real: CutoutRealization, rho: float) -> CutoutRealization:
    """Shrink every ball cutout so it keeps a ``1 - rho`` volume fraction.

    Radii are multiplied by ``(1 - rho)**(1/d)``; the returned realization
    has ``alpha_rho = alpha (1 - rho)``.
    """
    if not (0 <= rho < 1):
        raise ValidationError("rho must lie in [0, 1)")
    if any(k != "ball" for k, _ in real.spec.atoms) or np.any(real.kinds != _KIND_CODE["ball"]):
        raise UnsupportedShapeError("inner approximations are implemented for balls only")
    if rho == 0:
        return real
    factor = (1.0 - rho) ** (1.0 / real.d)
    spec = replace(real.spec, shape_scale=real.spec.shape_scale * factor)
    return CutoutRealization(spec, real.domain, real.depth, real.seed, real.centers,
                             real.scales, real.kinds, real.rotations, real.window)


def inner_margin(rho: float, d: int) -> float:
    """Relative margin ``beta = (1 - (1 - rho)**(1/d)) / 2`` of the shrunk balls."""
    return 0.5 * (1.0 - (1.0 - rho) ** (1.0 / d))
