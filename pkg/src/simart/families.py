"""Deterministic measure families: affine planes, algebraic curves, self-similar measures."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .core import CurveSingularityError, ValidationError, ball_volume

__all__ = [
    "PlaneParam",
    "CurveParam",
    "CurveTrace",
    "IFSParam",
    "similarity_dimension",
    "plane_metric",
    "trace_curve",
    "curve_distance",
    "family_from_dict",
]

GRAD_TOL = 1e-6


# ---------------------------------------------------------------------------
# planes


@dataclass(frozen=True)
class PlaneParam:
    """Affine k-plane ``basepoint + span(basis)`` carrying k-dimensional Hausdorff measure.

    Attributes
    ----------
    basepoint : ndarray, shape (d,)
    basis : ndarray, shape (k, d)
        Orthonormal rows.
    """

    basepoint: np.ndarray
    basis: np.ndarray
    name: str = ""

    def __post_init__(self):
        a = np.asarray(self.basepoint, dtype=float).reshape(-1)
        B = np.atleast_2d(np.asarray(self.basis, dtype=float))
        if B.shape[1] != a.shape[0]:
            raise ValidationError("basis vectors and basepoint differ in dimension")
        if B.shape[0] >= B.shape[1]:
            raise ValidationError("a plane needs k < d")
        if not np.allclose(B @ B.T, np.eye(B.shape[0]), atol=1e-10, rtol=0):
            raise ValidationError("basis must be orthonormal to 1e-10")
        a.flags.writeable = False
        B.flags.writeable = False
        object.__setattr__(self, "basepoint", a)
        object.__setattr__(self, "basis", B)

    @property
    def d(self) -> int:
        return self.basepoint.shape[0]

    @property
    def k(self) -> int:
        return self.basis.shape[0]

    @property
    def projector(self) -> np.ndarray:
        return self.basis.T @ self.basis

    @property
    def normal_offset(self) -> np.ndarray:
        """Component of the basepoint orthogonal to the plane."""
        return self.basepoint - self.projector @ self.basepoint

    @property
    def frostman(self) -> tuple:
        """(C, s) with ``eta(B(x, r)) <= C r**s``."""
        return ball_volume(self.k, 1.0), float(self.k)

    @classmethod
    def line(cls, point, direction, name: str = "") -> "PlaneParam":
        u = np.asarray(direction, dtype=float)
        return cls(point, u / np.linalg.norm(u), name)

    def to_dict(self) -> dict:
        return {"type": "plane", "point": self.basepoint.tolist(), "basis": self.basis.tolist()}


def plane_metric(V: PlaneParam, W: PlaneParam) -> float:
    """Operator-norm distance of the projectors plus distance of the normal offsets."""
    if (V.d, V.k) != (W.d, W.k):
        raise ValidationError("planes must share (d, k)")
    op = np.linalg.norm(V.projector - W.projector, ord=2)
    return float(op + np.linalg.norm(V.normal_offset - W.normal_offset))


# ---------------------------------------------------------------------------
# algebraic curves


def monomial_exponents(degree: int) -> list:
    """Graded-lex exponents ``[(0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...]``."""
    out = []
    for t in range(degree + 1):
        for i in range(t, -1, -1):
            out.append((i, t - i))
    return out


_N_MONO = {len(monomial_exponents(k)): k for k in range(5)}


@dataclass(frozen=True)
class CurveParam:
    """Zero set of a bivariate polynomial of degree at most 4, clipped to a region.

    Attributes
    ----------
    coeffs : tuple of float
        Dense graded-lex coefficients ``[1, x, y, x^2, xy, y^2, x^3, ...]``.
    clip_radius : float
        Radius of the clip ball (ignored when ``clip_box`` is given).
    clip_center : tuple
    clip_box : tuple or None
        ``((xmin, ymin), (xmax, ymax))`` closed clip box.
    """

    coeffs: tuple
    clip_radius: float = 1.0
    clip_center: tuple = (0.0, 0.0)
    clip_box: tuple | None = None
    name: str = ""

    def __post_init__(self):
        c = tuple(float(v) for v in self.coeffs)
        if len(c) not in _N_MONO:
            raise ValidationError(
                f"need 1, 3, 6, 10 or 15 graded-lex coefficients, got {len(c)}"
            )
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "clip_center", tuple(float(v) for v in self.clip_center))
        if self.clip_box is not None:
            lo, hi = (tuple(float(v) for v in p) for p in self.clip_box)
            if not (lo[0] < hi[0] and lo[1] < hi[1]):
                raise ValidationError("clip box needs low < high")
            object.__setattr__(self, "clip_box", (lo, hi))
        elif not self.clip_radius > 0:
            raise ValidationError("clip radius must be positive")

    @property
    def degree(self) -> int:
        return _N_MONO[len(self.coeffs)]

    @property
    def frostman(self) -> tuple:
        # Crofton: a degree-D curve meets a line at most D times
        return math.pi * max(self.degree, 1), 1.0

    def bounds(self) -> tuple:
        if self.clip_box is not None:
            return np.array(self.clip_box[0]), np.array(self.clip_box[1])
        c = np.array(self.clip_center)
        return c - self.clip_radius, c + self.clip_radius

    def value(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast(x, y).shape)
        for c, (i, j) in zip(self.coeffs, monomial_exponents(self.degree)):
            if c:
                out = out + c * x**i * y**j
        return out

    def gradient(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        gx = np.zeros(np.broadcast(x, y).shape)
        gy = np.zeros_like(gx)
        for c, (i, j) in zip(self.coeffs, monomial_exponents(self.degree)):
            if not c:
                continue
            if i:
                gx = gx + c * i * x ** (i - 1) * y**j
            if j:
                gy = gy + c * j * x**i * y ** (j - 1)
        return gx, gy

    def margin(self, pts) -> np.ndarray:
        """Distance from points to the complement of the clip region (0 outside)."""
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        if self.clip_box is not None:
            lo, hi = self.bounds()
            return np.maximum(0.0, np.minimum(pts - lo, hi - pts).min(axis=1))
        r = np.linalg.norm(pts - np.array(self.clip_center), axis=1)
        return np.maximum(0.0, self.clip_radius - r)

    def to_dict(self) -> dict:
        out = {"type": "curve", "coeffs": list(self.coeffs)}
        if self.clip_box is not None:
            out["clip_box"] = [list(self.clip_box[0]), list(self.clip_box[1])]
        else:
            out["clip_radius"] = self.clip_radius
            out["clip_center"] = list(self.clip_center)
        return out


@dataclass
class CurveTrace:
    """Polyline approximation of a clipped curve.

    Attributes
    ----------
    pieces : list of ndarray
        Polylines (m_i, 2) inside the clip region.
    points, tangents, grad_norm : ndarray
        Vertices of all pieces with unit tangents and ``|grad P|``.
    """

    pieces: list
    points: np.ndarray
    tangents: np.ndarray
    grad_norm: np.ndarray

    def segments(self) -> tuple:
        """Segment start and end points over all pieces."""
        a = [p[:-1] for p in self.pieces if len(p) > 1]
        b = [p[1:] for p in self.pieces if len(p) > 1]
        if not a:
            return np.zeros((0, 2)), np.zeros((0, 2))
        return np.concatenate(a), np.concatenate(b)

    @property
    def length(self) -> float:
        a, b = self.segments()
        return math.fsum(np.linalg.norm(b - a, axis=1).tolist())

    def __len__(self):
        return len(self.points)


def _scalar_eval(curve: CurveParam):
    terms = [(c, i, j) for c, (i, j) in zip(curve.coeffs, monomial_exponents(curve.degree)) if c]

    def f(x, y):
        v = gx = gy = 0.0
        for c, i, j in terms:
            v += c * x**i * y**j
            if i:
                gx += c * i * x ** (i - 1) * y**j
            if j:
                gy += c * j * x**i * y ** (j - 1)
        return v, gx, gy

    return f


def _newton(f, x, y, tol=1e-13, iters=30):
    for _ in range(iters):
        v, gx, gy = f(x, y)
        g2 = gx * gx + gy * gy
        if g2 < GRAD_TOL**2:
            raise CurveSingularityError((x, y), math.sqrt(g2))
        dx, dy = v * gx / g2, v * gy / g2
        x, y = x - dx, y - dy
        if abs(dx) + abs(dy) < tol:
            break
    return x, y


def _raise_if_singular(f, x, y, step, iters=50):
    """Newton on ``grad P = 0`` from ``(x, y)``; raise if it lands on the curve."""
    h = 1e-7
    for _ in range(iters):
        v, gx, gy = f(x, y)
        if math.hypot(gx, gy) < GRAD_TOL:
            if abs(v) < 1e-9:
                raise CurveSingularityError((x, y), math.hypot(gx, gy))
            return
        _, gxx, gyx = f(x + h, y)
        _, gxy, gyy = f(x, y + h)
        a, b = (gxx - gx) / h, (gxy - gx) / h
        c, d = (gyx - gy) / h, (gyy - gy) / h
        det = a * d - b * c
        if det == 0:
            return
        dx, dy = (d * gx - b * gy) / det, (a * gy - c * gx) / det
        x, y = x - dx, y - dy
        if math.hypot(dx, dy) > 4 * step:
            return


def _walk(f, x0, y0, step, sign, lo, hi, start, max_steps):
    """Follow the curve from a point in one tangent direction."""
    pts = [(x0, y0)]
    x, y = x0, y0
    closed = False
    travelled = 0.0
    for _ in range(max_steps):
        v, gx, gy = f(x, y)
        g = math.hypot(gx, gy)
        if g < GRAD_TOL:
            raise CurveSingularityError((x, y), g)
        tx, ty = -gy / g * sign, gx / g * sign
        h = step
        for _attempt in range(8):
            px, py = x + h * tx, y + h * ty
            try:
                nx, ny = _newton(f, px, py)
            except CurveSingularityError:
                raise
            dist = math.hypot(nx - x, ny - y)
            _, gx2, gy2 = f(nx, ny)
            g2 = math.hypot(gx2, gy2)
            turn = ((-gy2 / g2 * sign) * tx + (gx2 / g2 * sign) * ty) if g2 > 0 else -1
            if 0.5 * step <= dist <= 2 * step and turn > 0.5:
                break
            h *= 0.5 if dist > 2 * step or turn <= 0.5 else 1.5
        if turn <= 0:
            # the tangent reversed within one step: look for a critical point of P nearby
            _raise_if_singular(f, 0.5 * (x + nx), 0.5 * (y + ny), step)
        x, y = nx, ny
        travelled += dist
        if travelled > 3 * step and math.hypot(x - start[0], y - start[1]) < step:
            closed = True
            break
        pts.append((x, y))
        if x < lo[0] or y < lo[1] or x > hi[0] or y > hi[1]:
            break
    return pts, closed


def _clip_polyline(poly: np.ndarray, curve: CurveParam) -> list:
    """Split a polyline into the pieces inside the closed clip region."""
    if len(poly) < 2:
        return []
    a, b = poly[:-1], poly[1:]
    d = b - a
    if curve.clip_box is not None:
        lo, hi = curve.bounds()
        t0 = np.zeros(len(a))
        t1 = np.ones(len(a))
        for i in range(2):
            with np.errstate(divide="ignore", invalid="ignore"):
                ta = (lo[i] - a[:, i]) / d[:, i]
                tb = (hi[i] - a[:, i]) / d[:, i]
            par = d[:, i] == 0
            inside = (a[:, i] >= lo[i]) & (a[:, i] <= hi[i])
            t0 = np.maximum(t0, np.where(par, np.where(inside, 0.0, np.inf), np.minimum(ta, tb)))
            t1 = np.minimum(t1, np.where(par, np.where(inside, 1.0, -np.inf), np.maximum(ta, tb)))
    else:
        c = np.array(curve.clip_center)
        R = curve.clip_radius
        w = a - c
        A = np.sum(d * d, axis=1)
        B = 2 * np.sum(w * d, axis=1)
        C = np.sum(w * w, axis=1) - R * R
        disc = B * B - 4 * A * C
        ok = (disc >= 0) & (A > 0)
        sq = np.sqrt(np.where(ok, disc, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            r0 = np.where(ok, (-B - sq) / (2 * A), np.inf)
            r1 = np.where(ok, (-B + sq) / (2 * A), -np.inf)
        t0 = np.maximum(0.0, r0)
        t1 = np.minimum(1.0, r1)
    pieces = []
    cur = []
    for i in range(len(a)):
        if t1[i] > t0[i]:
            p = a[i] + t0[i] * d[i]
            q = a[i] + t1[i] * d[i]
            if not cur:
                cur = [p]
            elif t0[i] > 0:
                pieces.append(np.array(cur))
                cur = [p]
            cur.append(q)
            if t1[i] < 1:
                pieces.append(np.array(cur))
                cur = []
        elif cur:
            pieces.append(np.array(cur))
            cur = []
    if cur:
        pieces.append(np.array(cur))
    return [p for p in pieces if len(p) > 1]


def trace_curve(curve: CurveParam, step: float = 1e-3, grid: int = 128,
                max_steps: int = 10**7) -> CurveTrace:
    """Trace ``P = 0`` inside the clip region.

    Components are seeded from sign changes along the edges of a ``grid`` x
    ``grid`` lattice over the clip bounds and followed by a tangent predictor
    with a Newton corrector. Tracing runs in a slightly enlarged box and the
    polylines are clipped exactly afterwards.

    Raises
    ------
    CurveSingularityError
        When ``|grad P| < 1e-6`` at a traced point.
    """
    if step <= 0:
        raise ValidationError("step must be positive")
    f = _scalar_eval(curve)
    lo, hi = curve.bounds()
    pad = 0.02 * float(np.max(hi - lo)) + 2 * step
    tlo, thi = lo - pad, hi + pad
    xs = np.linspace(tlo[0], thi[0], grid + 1)
    ys = np.linspace(tlo[1], thi[1], grid + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    V = curve.value(X, Y)
    seeds = []
    # sign changes along x-edges and y-edges
    for axis in (0, 1):
        v0 = V[:-1, :] if axis == 0 else V[:, :-1]
        v1 = V[1:, :] if axis == 0 else V[:, 1:]
        hit = np.argwhere((v0 == 0) | (np.sign(v0) != np.sign(v1)))
        for i, j in hit:
            if axis == 0:
                p0, p1 = (xs[i], ys[j]), (xs[i + 1], ys[j])
            else:
                p0, p1 = (xs[i], ys[j]), (xs[i], ys[j + 1])
            seeds.append((p0, p1))
    cell = float(np.max(thi - tlo)) / grid
    pieces_all = []
    traced = []  # arrays of traced vertices, to discard consumed seeds
    for p0, p1 in seeds:
        g = lambda t: f(p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1]))[0]
        ga, gb = g(0.0), g(1.0)
        if ga == 0:
            t = 0.0
        elif gb == 0:
            t = 1.0
        else:
            t = brentq(g, 0.0, 1.0, xtol=1e-15)
        sx, sy = p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1])
        if any(np.min(np.hypot(tr[:, 0] - sx, tr[:, 1] - sy)) < cell for tr in traced):
            continue
        sx, sy = _newton(f, sx, sy)
        fwd, closed = _walk(f, sx, sy, step, 1.0, tlo, thi, (sx, sy), max_steps)
        if closed:
            poly = np.array(fwd + [fwd[0]])
        else:
            bwd, _ = _walk(f, sx, sy, step, -1.0, tlo, thi, (sx, sy), max_steps)
            poly = np.array(bwd[::-1] + fwd[1:])
        traced.append(poly)
        pieces_all.extend(_clip_polyline(poly, curve))
    if pieces_all:
        pts = np.concatenate(pieces_all)
        gx, gy = curve.gradient(pts[:, 0], pts[:, 1])
        gn = np.hypot(gx, gy)
        if np.any(gn < GRAD_TOL):
            i = int(np.argmin(gn))
            raise CurveSingularityError(pts[i], gn[i])
        tang = np.column_stack([-gy, gx]) / gn[:, None]
    else:
        pts = np.zeros((0, 2))
        tang = np.zeros((0, 2))
        gn = np.zeros(0)
    return CurveTrace(pieces_all, pts, tang, gn)


def _probe_values(pts: np.ndarray, support: CurveParam, count: int) -> np.ndarray:
    """Values of the first ``count`` dictionary probes at ``pts``, shape (count, m).

    Probes are 1-Lipschitz and vanish outside the support region: the plateau
    ``min(1, m)``, clamped coordinates ``median(-m, <x, e> - c, m)`` and cones
    ``min(m, max(0, r - |x - z|))``, where ``m`` is the distance to the
    complement of the support.
    """
    m = support.margin(pts)
    lo, hi = support.bounds()
    out = [np.minimum(1.0, m)]
    level = 1
    while len(out) < count:
        # level-j refinement: coordinate offsets and cone centres on a 2**j grid
        nodes = (np.arange(2**level) + 0.5) / 2**level
        for axis in (0, 1):
            for t in nodes:
                c = lo[axis] + t * (hi[axis] - lo[axis])
                out.append(np.clip(pts[:, axis] - c, -m, m))
        radius = 0.5 * float(np.max(hi - lo)) / 2 ** (level - 1)
        for tx in nodes:
            for ty in nodes:
                z = lo + np.array([tx, ty]) * (hi - lo)
                cone = np.maximum(0.0, radius - np.linalg.norm(pts - z, axis=1))
                out.append(np.minimum(m, cone))
        level += 1
    return np.array(out[:count])


def _trace_integrals(trace: CurveTrace, support: CurveParam, count: int) -> np.ndarray:
    a, b = trace.segments()
    if len(a) == 0:
        return np.zeros(count)
    mid = 0.5 * (a + b)
    w = np.linalg.norm(b - a, axis=1)
    return _probe_values(mid, support, count) @ w


def curve_distance(V: CurveParam, W: CurveParam, probe_functions: int = 64,
                   step: float = 1e-3, support: CurveParam | None = None) -> float:
    """Dictionary lower bound of the Lipschitz-dual distance of two curve measures.

    Parameters
    ----------
    probe_functions : int
        Number of leading dictionary probes; the estimate is nondecreasing in it.
    support : CurveParam or None
        Region carrying the test functions; defaults to ``V``'s clip region.
    """
    support = support or V
    tv = trace_curve(V, step)
    tw = trace_curve(W, step)
    iv = _trace_integrals(tv, support, probe_functions)
    iw = _trace_integrals(tw, support, probe_functions)
    return float(np.max(np.abs(iv - iw)))


# ---------------------------------------------------------------------------
# self-similar measures


def similarity_dimension(ratios) -> float:
    """Positive root ``s`` of ``sum ratio_i**s = 1``."""
    r = np.asarray(ratios, dtype=float).reshape(-1)
    if len(r) == 0:
        raise ValidationError("need at least one ratio")
    if np.any((r <= 0) | (r >= 1)):
        raise ValidationError("ratios must lie in (0, 1)")
    if len(r) == 1:
        warnings.warn("a single contraction has a one-point attractor; returning 0",
                      RuntimeWarning, stacklevel=2)
        return 0.0
    f = lambda s: math.fsum((r**s).tolist()) - 1.0
    # sum r_i**s <= m r_max**s, which drops below 1 just past this point
    hi = 1.01 * math.log(len(r)) / math.log(1.0 / r.max())
    s = brentq(f, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    # polish with Newton steps on the exact residual
    for _ in range(3):
        g = -math.fsum((r**s * np.log(1.0 / r)).tolist())
        s -= f(s) / g
    return float(s)


@dataclass(frozen=True)
class IFSParam:
    """Contracting similarities ``x -> ratio R(angle) x + translate`` with weights.

    Attributes
    ----------
    ratios : tuple of float
    angles : tuple of float
        Rotation angles in radians (``0`` or ``pi`` in ``d = 1``).
    translations : ndarray, shape (m, d)
    probs : tuple of float or None
        ``None`` selects the natural weights ``ratio_i**sim_dim``.
    """

    ratios: tuple
    angles: tuple
    translations: np.ndarray
    probs: tuple | None = None
    name: str = ""
    natural: bool = field(init=False, default=False)
    sim_dim: float = field(init=False, default=0.0)

    def __post_init__(self):
        r = tuple(float(v) for v in self.ratios)
        t = np.atleast_2d(np.asarray(self.translations, dtype=float))
        ang = tuple(float(v) for v in self.angles) if self.angles else (0.0,) * len(r)
        if len(r) == 0 or len(ang) != len(r) or t.shape[0] != len(r):
            raise ValidationError("ratios, angles and translations must match")
        if t.shape[1] not in (1, 2):
            raise ValidationError("self-similar families are supported in d = 1 and 2")
        if any(not (0 < v < 1) for v in r):
            raise ValidationError("ratios must lie in (0, 1)")
        if t.shape[1] == 1 and any(not (math.isclose(math.cos(a), 1) or math.isclose(math.cos(a), -1))
                                   for a in ang):
            raise ValidationError("in d = 1 only angles 0 and pi are allowed")
        s = similarity_dimension(r) if len(r) > 1 else 0.0
        natural = self.probs is None
        if natural:
            p = tuple(v**s for v in r)
        else:
            p = tuple(float(v) for v in self.probs)
            if len(p) != len(r) or any(v <= 0 for v in p) or abs(math.fsum(p) - 1) > 1e-12:
                raise ValidationError("probs must be positive and sum to 1")
        t.flags.writeable = False
        object.__setattr__(self, "ratios", r)
        object.__setattr__(self, "angles", ang)
        object.__setattr__(self, "translations", t)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "natural", natural)
        object.__setattr__(self, "sim_dim", s)

    @property
    def d(self) -> int:
        return self.translations.shape[1]

    @property
    def m(self) -> int:
        return len(self.ratios)

    def linear_parts(self) -> np.ndarray:
        """Matrices ``ratio R(angle)``, shape (m, d, d)."""
        out = []
        for r, a in zip(self.ratios, self.angles):
            if self.d == 1:
                out.append(np.array([[r * round(math.cos(a))]]))
            else:
                c, s = math.cos(a), math.sin(a)
                out.append(r * np.array([[c, -s], [s, c]]))
        return np.array(out)

    def apply(self, i: int, x: np.ndarray) -> np.ndarray:
        return x @ self.linear_parts()[i].T + self.translations[i]

    def bounding_ball(self) -> tuple:
        """Centre and radius of a ball mapped into itself by every map."""
        A = self.linear_parts()
        fixed = [np.linalg.solve(np.eye(self.d) - A[i], self.translations[i]) for i in range(self.m)]
        c = np.mean(fixed, axis=0)
        R = max(np.linalg.norm(self.apply(i, c) - c) / (1 - self.ratios[i]) for i in range(self.m))
        return c, float(R)

    def cylinder_mass(self, word) -> float:
        return math.prod(self.probs[i] for i in word)

    def strongly_separated(self) -> bool:
        """Certified check: second-level image balls of distinct first maps are disjoint."""
        c, R = self.bounding_ball()
        A = self.linear_parts()
        groups = []
        for i in range(self.m):
            balls = []
            for j in range(self.m):
                centre = self.apply(i, self.apply(j, c))
                balls.append((centre, self.ratios[i] * self.ratios[j] * R))
            groups.append(balls)
        del A
        for i in range(self.m):
            for j in range(i + 1, self.m):
                for ci, ri in groups[i]:
                    for cj, rj in groups[j]:
                        if np.linalg.norm(ci - cj) <= ri + rj:
                            return False
        return True

    def sample(self, rng: np.random.Generator, size: int, length: int = 48) -> np.ndarray:
        """Points distributed by the self-similar measure (codes truncated at ``length``)."""
        A = self.linear_parts()
        codes = rng.choice(self.m, size=(size, length), p=np.asarray(self.probs))
        c, _ = self.bounding_ball()
        x = np.broadcast_to(c, (size, self.d)).copy()
        for col in range(length - 1, -1, -1):
            idx = codes[:, col]
            x = np.einsum("nij,nj->ni", A[idx], x) + self.translations[idx]
        return x

    def to_dict(self) -> dict:
        return {
            "type": "ifs",
            "maps": [{"ratio": r, "angle_degrees": math.degrees(a), "translate": t.tolist()}
                     for r, a, t in zip(self.ratios, self.angles, self.translations)],
            "probs": "natural" if self.natural else list(self.probs),
        }


def family_from_dict(data: dict):
    """Build a family member from its JSON description."""
    kind = data.get("type")
    name = data.get("id", "")
    if kind == "plane":
        return PlaneParam(data["point"], data["basis"], name)
    if kind == "line":
        return PlaneParam.line(data["point"], data["direction"], name)
    if kind == "curve":
        box = data.get("clip_box")
        return CurveParam(tuple(data["coeffs"]), float(data.get("clip_radius", 1.0)),
                          tuple(data.get("clip_center", (0.0, 0.0))),
                          None if box is None else (tuple(box[0]), tuple(box[1])), name)
    if kind == "ifs":
        maps = data["maps"]
        probs = data.get("probs", "natural")
        return IFSParam(
            tuple(m["ratio"] for m in maps),
            tuple(math.radians(m.get("angle_degrees", 0.0)) for m in maps),
            np.array([np.atleast_1d(m["translate"]) for m in maps], dtype=float),
            None if probs == "natural" else tuple(probs),
            name,
        )
    raise ValidationError(f"unknown family type {kind!r}")


def frostman_exponent(family) -> float:
    if isinstance(family, (PlaneParam, CurveParam)):
        return family.frostman[1]
    if isinstance(family, IFSParam):
        return family.sim_dim if family.natural else min(
            math.log(p) / math.log(r) for p, r in zip(family.probs, family.ratios))
    raise ValidationError(f"not a family member: {family!r}")
