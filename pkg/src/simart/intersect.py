"""Intersection masses ``Y_n = int mu_n d eta`` against planes, curves and self-similar measures.

Two engines are available for lines:

* ``exact``: for dyadic trees the line is clipped against every surviving cell;
  for ball cutouts the chord of the seed ball minus the union of the disc
  chords is measured directly.
* ``quadrature``: a composite midpoint rule along the family member.

Every other family is discretized into weighted nodes (quadrature points,
curve segment midpoints or self-similar cylinder centres) and the density is
evaluated at the nodes for all requested levels at once.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import ResourceError, ValidationError, clip_segment_spans
from .cutout import CutoutRealization
from .families import CurveParam, IFSParam, PlaneParam, frostman_exponent, trace_curve
from .reports import AnalysisReport, linear_fit
from .subdivision import SubdivisionTree

__all__ = [
    "MassSequence",
    "ProjectionProfile",
    "mass_on_plane",
    "mass_on_curve",
    "mass_on_ifs",
    "mass_sequence",
    "projection_profile",
    "holder_fit",
    "GrowthRegimeWarning",
    "sampling_window",
    "ifs_leaves",
]

MAX_NODES = 5 * 10**8
MAX_LEAVES = 10**7


class GrowthRegimeWarning(UserWarning):
    """The family's Frostman exponent does not exceed the model's alpha."""


def _realization(obj):
    if isinstance(obj, (CutoutRealization, SubdivisionTree)):
        return obj
    for name in ("realization", "tree"):
        real = getattr(obj, name, None)
        if real is not None:
            return real
    raise ValidationError(f"cannot find a realization behind {obj!r}")


def _support_box(real):
    if isinstance(real, SubdivisionTree):
        return np.zeros(real.d), np.ones(real.d)
    b = real.domain.bounding_box()
    return b.low, b.high


def _line_span(a, u, low, high):
    """Parameter interval of ``a + t u`` inside the closed box, or None."""
    t0, t1 = -np.inf, np.inf
    for i in range(len(a)):
        if u[i] == 0:
            if a[i] < low[i] or a[i] > high[i]:
                return None
            continue
        ta = (low[i] - a[i]) / u[i]
        tb = (high[i] - a[i]) / u[i]
        t0 = max(t0, min(ta, tb))
        t1 = min(t1, max(ta, tb))
    return (t0, t1) if t1 > t0 else None


# ---------------------------------------------------------------------------
# exact line engines


def _tree_line_masses(tree: SubdivisionTree, V: PlaneParam, levels) -> np.ndarray:
    a, u = V.basepoint, V.basis[0]
    span = _line_span(a, u, np.full(tree.d, -1.0), np.full(tree.d, 2.0))
    out = np.zeros(len(levels))
    if span is None:
        return out
    p0 = a + span[0] * u
    p1 = a + span[1] * u
    seg_len = float(np.linalg.norm(p1 - p0))
    for i, m in enumerate(levels):
        low = tree.cell_lows(m)
        if len(low) == 0:
            continue
        h = 2.0 ** (-m)
        w = low + 0.5 * h - a
        tc = w @ u
        perp2 = np.sum(w * w, axis=1) - tc * tc
        near = perp2 <= (0.5 * h * math.sqrt(tree.d)) ** 2 * (1 + 1e-9) + 1e-300
        spans, _ = clip_segment_spans(p0, p1, low[near], low[near] + h)
        out[i] = seg_len * math.fsum((tree.density(m)[near] * spans).tolist())
    return out


def _ball_chord(center, radius, a, u):
    w = np.asarray(center, dtype=float) - a
    tc = float(w @ u)
    q2 = float(w @ w) - tc * tc
    if q2 > radius * radius:
        return None
    half = math.sqrt(max(radius * radius - q2, 0.0))
    return tc - half, tc + half


def _line_hits(real: CutoutRealization, a, u):
    """Discs meeting the line ``a + t u``: indices, chord centres ``tc`` and half-chords."""
    c, r = real.centers, real.radii
    if real.d == 2:
        perp = (c[:, 0] - a[0]) * u[1] - (c[:, 1] - a[1]) * u[0]
        q2 = perp * perp
    else:
        w = c - a
        tc_all = w @ u
        q2 = np.einsum("ij,ij->i", w, w) - tc_all * tc_all
    idx = np.flatnonzero(q2 <= r * r)
    tc = (c[idx] - a) @ u
    half = np.sqrt(np.maximum(r[idx] ** 2 - q2[idx], 0.0))
    return idx, tc, half


def _cutout_line_masses(real: CutoutRealization, V: PlaneParam, levels) -> np.ndarray:
    if real.domain.kind != "ball":
        raise ValidationError("the exact cutout engine needs a ball seed domain")
    if np.any(real.kinds != 0):
        raise ValidationError("the exact cutout engine supports ball cutouts only")
    a, u = V.basepoint, V.basis[0]
    chord = _ball_chord(real.domain.center, real.domain.size, a, u)
    out = np.zeros(len(levels))
    if chord is None:
        return out
    t0, t1 = chord
    if real.window is not None:
        lo, hi = real.window
        ends = np.array([a + t0 * u, a + t1 * u])
        if not np.all((ends >= lo - 1e-12) & (ends <= hi + 1e-12)):
            raise ValidationError("the line leaves the sampling window of this realization")
    hit, tc, half = _line_hits(real, a, u)
    s = np.maximum(tc - half, t0)
    e = np.minimum(tc + half, t1)
    lv = real.bands[hit] + 1
    tol = 1e-12 * 2 * real.domain.size
    alpha = real.alpha
    for i, m in enumerate(levels):
        sel = lv <= m
        removed = kernels.interval_union_length(s[sel], e[sel], tol)
        out[i] = 2.0 ** (alpha * m) * max(0.0, (t1 - t0) - removed)
    return out


def _cutout_line_quadrature(real: CutoutRealization, V: PlaneParam, levels, step: float) -> np.ndarray:
    """Midpoint rule along the seed-ball chord using the segment kill kernel."""
    a, u = V.basepoint, V.basis[0]
    chord = _ball_chord(real.domain.center, real.domain.size, a, u)
    out = np.zeros(len(levels))
    if chord is None:
        return out
    t0, t1 = chord
    count = int(math.ceil((t1 - t0) / step))
    if count > MAX_NODES:
        raise ResourceError(f"quadrature needs {count} nodes; raise tol")
    h = (t1 - t0) / count
    if real.window is not None:
        lo, hi = real.window
        ends = np.array([a + t0 * u, a + t1 * u])
        if not np.all((ends >= lo - 1e-12) & (ends <= hi + 1e-12)):
            raise ValidationError("the line leaves the sampling window of this realization")
    hit, _, _ = _line_hits(real, a, u)
    r = real.radii
    kill = np.full(count, kernels.NEVER, dtype=np.uint8)
    kernels.segment_kill(a + t0 * u, u, h, real.centers[hit], r[hit],
                         (real.bands[hit] + 1).astype(np.uint8), kill)
    for i, m in enumerate(levels):
        out[i] = 2.0 ** (real.alpha * m) * h * int(np.count_nonzero(kill > m))
    return out


def _exact_supported(real, V) -> bool:
    if not isinstance(V, PlaneParam) or V.k != 1:
        return False
    if isinstance(real, SubdivisionTree):
        return True
    return real.domain.kind == "ball" and bool(np.all(real.kinds == 0))


# ---------------------------------------------------------------------------
# weighted nodes


def _plane_nodes(real, V: PlaneParam, step: float):
    low, high = _support_box(real)
    if V.k == 1:
        a, u = V.basepoint, V.basis[0]
        if isinstance(real, CutoutRealization) and real.domain.kind == "ball":
            span = _ball_chord(real.domain.center, real.domain.size, a, u)
        else:
            span = _line_span(a, u, low, high)
        if span is None:
            return np.zeros((0, V.d)), np.zeros(0)
        t0, t1 = span
        count = int(math.ceil((t1 - t0) / step))
        if count > MAX_NODES:
            raise ResourceError(f"quadrature needs {count} nodes; raise tol")
        h = (t1 - t0) / count
        t = t0 + (np.arange(count) + 0.5) * h
        return a + t[:, None] * u, np.full(count, h)
    # k >= 2: tensor grid over the projection of the support box
    corners = np.array(np.meshgrid(*zip(low, high), indexing="ij")).reshape(V.d, -1).T
    coords = (corners - V.basepoint) @ V.basis.T
    lo_c, hi_c = coords.min(axis=0), coords.max(axis=0)
    counts = np.ceil((hi_c - lo_c) / step).astype(np.int64)
    total = int(np.prod(counts))
    if total > MAX_NODES:
        raise ResourceError(f"quadrature needs {total} nodes; raise tol")
    hs = (hi_c - lo_c) / counts
    axes = [lo_c[i] + (np.arange(counts[i]) + 0.5) * hs[i] for i in range(V.k)]
    grid = np.array(np.meshgrid(*axes, indexing="ij")).reshape(V.k, -1).T
    pts = V.basepoint + grid @ V.basis
    inside = np.all((pts >= low) & (pts <= high), axis=1)
    return pts[inside], np.full(int(inside.sum()), float(np.prod(hs)))


def _curve_nodes(curve: CurveParam, step: float, weighted: bool):
    trace = trace_curve(curve, step)
    a, b = trace.segments()
    mid = 0.5 * (a + b)
    w = np.linalg.norm(b - a, axis=1)
    if weighted and len(mid):
        gx, gy = curve.gradient(mid[:, 0], mid[:, 1])
        w = w / np.hypot(gx, gy)
    return mid, w


def ifs_leaves(ifs: IFSParam, diam_tol: float, max_leaves: int = MAX_LEAVES):
    """Cylinder centres and masses with image-ball diameter at most ``diam_tol``."""
    c, R = ifs.bounding_ball()
    A = ifs.linear_parts()
    ratios = np.asarray(ifs.ratios)
    probs = np.asarray(ifs.probs)
    d = ifs.d
    mats = np.eye(d)[None]
    offs = np.zeros((1, d))
    rho = np.ones(1)
    mass = np.ones(1)
    leaf_pts, leaf_w = [], []
    nleaves = 0
    while len(rho):
        done = 2 * rho * R <= diam_tol
        if done.any():
            leaf_pts.append(np.einsum("nij,j->ni", mats[done], c) + offs[done])
            leaf_w.append(mass[done])
            nleaves += int(done.sum())
        keep = ~done
        mats, offs, rho, mass = mats[keep], offs[keep], rho[keep], mass[keep]
        if len(rho) == 0:
            break
        if nleaves + len(rho) * ifs.m > max_leaves:
            raise ResourceError(f"cylinder recursion exceeds {max_leaves} leaves")
        # children: F_w o F_i
        mats_new = np.einsum("nij,mjk->nmik", mats, A).reshape(-1, d, d)
        offs_new = (np.einsum("nij,mj->nmi", mats, ifs.translations) + offs[:, None, :]).reshape(-1, d)
        rho = (rho[:, None] * ratios[None, :]).reshape(-1)
        mass = (mass[:, None] * probs[None, :]).reshape(-1)
        mats, offs = mats_new, offs_new
    if not leaf_pts:
        return np.zeros((0, d)), np.zeros(0)
    return np.concatenate(leaf_pts), np.concatenate(leaf_w)


def _levels_from_nodes(real, pts, w, levels) -> np.ndarray:
    """``sum_j w_j mu_m(x_j)`` for every requested level ``m``."""
    out = np.zeros(len(levels))
    if len(pts) == 0:
        return out
    if isinstance(real, SubdivisionTree):
        for i, m in enumerate(levels):
            out[i] = math.fsum((w * real.density_at(pts, m)).tolist())
        return out
    if real.window is not None and not np.all(real.in_window(pts)):
        raise ValidationError("nodes leave the sampling window of this realization")
    alive0 = real.domain.contains(pts)
    kill = real.kill_levels(pts) if len(real) else np.full(len(pts), kernels.NEVER, np.uint8)
    for i, m in enumerate(levels):
        alive = alive0 & (kill > m)
        out[i] = 2.0 ** (real.alpha * m) * math.fsum(w[alive].tolist())
    return out


# ---------------------------------------------------------------------------
# public operations


def mass_on_plane(evaluator, V: PlaneParam, n: int, method: str = "exact",
                  tol: float = 1e-3) -> float:
    """``Y_n`` for an affine plane.

    Parameters
    ----------
    evaluator : DensityEvaluator or realization
    V : PlaneParam
    n : int
    method : {"exact", "quadrature"}
        ``exact`` needs a line and a dyadic tree or a ball-cutout realization.
    tol : float
        Quadrature step is ``tol * 2**-n``.
    """
    real = _realization(evaluator)
    if V.d != real.d:
        raise ValidationError("plane and realization dimensions differ")
    if method == "exact":
        if not _exact_supported(real, V):
            raise ValidationError("exact engine needs a line and a dyadic or ball-cutout model")
        if isinstance(real, SubdivisionTree):
            return float(_tree_line_masses(real, V, [n])[0])
        return float(_cutout_line_masses(real, V, [n])[0])
    if method != "quadrature":
        raise ValidationError(f"unknown method {method!r}")
    if isinstance(real, CutoutRealization) and _exact_supported(real, V):
        return float(_cutout_line_quadrature(real, V, [n], tol * 2.0 ** (-n))[0])
    pts, w = _plane_nodes(real, V, tol * 2.0 ** (-n))
    return float(_levels_from_nodes(real, pts, w, [n])[0])


def mass_on_curve(evaluator, curve: CurveParam, n: int, step: float = 1e-3,
                  weighted: bool = False) -> float:
    """``Y_n`` against length measure on a traced curve (optionally ``|grad P|**-1`` weighted)."""
    real = _realization(evaluator)
    if real.d != 2:
        raise ValidationError("curves live in d = 2")
    pts, w = _curve_nodes(curve, step, weighted)
    return float(_levels_from_nodes(real, pts, w, [n])[0])


def mass_on_ifs(evaluator, ifs: IFSParam, n: int, diam_tol: float | None = None,
                max_leaves: int = MAX_LEAVES) -> float:
    """``Y_n`` against a self-similar measure by cylinder recursion.

    ``diam_tol`` defaults to ``2**-n / 4``.
    """
    real = _realization(evaluator)
    if ifs.d != real.d:
        raise ValidationError("IFS and realization dimensions differ")
    diam_tol = 2.0 ** (-n) / 4 if diam_tol is None else diam_tol
    pts, w = ifs_leaves(ifs, diam_tol, max_leaves)
    return float(_levels_from_nodes(real, pts, w, [n])[0])


@dataclass
class MassSequence:
    """Trajectory ``Y_0, ..., Y_n`` of one family member.

    Attributes
    ----------
    family_id : str
    values : ndarray
    increments : ndarray
        ``|Y_{m+1} - Y_m|``.
    method : str
        ``exact``, ``quadrature``, ``curve`` or ``cylinder``.
    regime : str
        ``limit`` when the family's Frostman exponent exceeds alpha, else
        ``growth-regime``.
    decay_slope : float
        Slope of ``log2 |Y_{m+1} - Y_m|`` against ``m`` over the last half of
        the levels (nonzero increments only).
    growth_slope : float
        Slope of ``log2 Y_m`` over the same window (reported in the growth regime).
    """

    family_id: str
    values: np.ndarray
    increments: np.ndarray
    method: str
    regime: str = "limit"
    frostman_s: float = math.nan
    alpha: float = math.nan
    decay_slope: float = math.nan
    decay_intercept: float = math.nan
    growth_slope: float = math.nan
    fit_window: tuple = ()
    flags: list = field(default_factory=list)

    @property
    def limit(self) -> float:
        return float(self.values[-1])


def _decay_fit(values: np.ndarray):
    inc = np.abs(np.diff(values))
    n_max = len(values) - 1
    lo = n_max // 2
    ms = np.arange(lo, n_max)
    sel = inc[lo:n_max] > 0
    slope, icpt, _, _ = linear_fit(ms[sel], np.log2(inc[lo:n_max][sel])) if sel.sum() >= 2 else (
        math.nan, math.nan, math.nan, math.nan)
    pos = values[lo:] > 0
    gms = np.arange(lo, n_max + 1)
    gslope = linear_fit(gms[pos], np.log2(values[lo:][pos]))[0] if pos.sum() >= 2 else math.nan
    return slope, icpt, gslope, (int(lo), int(n_max))


def mass_sequence(realization, t, n_max: int, method: str = "auto", tol: float = 1e-3,
                  step: float = 1e-3, diam_tol: float | None = None, weighted: bool = False,
                  family_id: str | None = None) -> MassSequence:
    """Compute ``Y_0..Y_{n_max}`` with the engine matching the family.

    ``method="auto"`` uses the exact line engine when it applies and
    quadrature otherwise. Curves are traced once and self-similar cylinders
    are expanded once (at ``diam_tol`` for ``n_max``) for all levels.
    """
    real = _realization(realization)
    if n_max > real.depth:
        raise ValidationError(f"n_max {n_max} exceeds the realization depth {real.depth}")
    levels = list(range(n_max + 1))
    if isinstance(t, PlaneParam):
        if method in ("auto", "exact") and _exact_supported(real, t):
            vals = (_tree_line_masses(real, t, levels) if isinstance(real, SubdivisionTree)
                    else _cutout_line_masses(real, t, levels))
            tag = "exact"
        elif method == "exact":
            raise ValidationError("exact engine needs a line and a dyadic or ball-cutout model")
        elif isinstance(real, CutoutRealization) and _exact_supported(real, t):
            vals = _cutout_line_quadrature(real, t, levels, tol * 2.0 ** (-n_max))
            tag = "quadrature"
        else:
            pts, w = _plane_nodes(real, t, tol * 2.0 ** (-n_max))
            vals = _levels_from_nodes(real, pts, w, levels)
            tag = "quadrature"
    elif isinstance(t, CurveParam):
        pts, w = _curve_nodes(t, step, weighted)
        vals = _levels_from_nodes(real, pts, w, levels)
        tag = "quadrature"
    elif isinstance(t, IFSParam):
        dt = 2.0 ** (-n_max) / 4 if diam_tol is None else diam_tol
        pts, w = ifs_leaves(t, dt)
        vals = _levels_from_nodes(real, pts, w, levels)
        tag = "cylinder"
    else:
        raise ValidationError(f"unsupported family member {t!r}")
    s = frostman_exponent(t)
    alpha = real.alpha
    regime = "limit"
    flags = []
    if s <= alpha:
        regime = "growth-regime"
        flags.append("s<=alpha")
        warnings.warn(
            f"family Frostman exponent s={s:.4g} does not exceed alpha={alpha:.4g}; "
            "the masses need not converge (hypothesis s > alpha fails)",
            GrowthRegimeWarning, stacklevel=2)
    vals = np.asarray(vals, dtype=float)
    slope, icpt, gslope, window = _decay_fit(vals)
    return MassSequence(family_id or getattr(t, "name", "") or "", vals, np.abs(np.diff(vals)),
                        tag, regime, s, alpha, slope, icpt, gslope, window, flags)


@dataclass
class ProjectionProfile:
    """Fiber masses ``f_n(t)`` of the projection onto a direction.

    Attributes
    ----------
    direction : ndarray, shape (k, d)
        Orthonormal basis of the plane projected onto.
    offsets : ndarray
        Fiber offsets ``t`` (midpoints of an equispaced grid), shape (G,) or (G, k).
    values : ndarray
    spacing : float
        Cell volume of the offset grid.
    riemann_mass : float
    total_mass : float
        Exact ``||mu_n||`` when available (NaN otherwise).
    mass_defect : float
    """

    direction: np.ndarray
    offsets: np.ndarray
    values: np.ndarray
    spacing: float
    riemann_mass: float
    total_mass: float
    mass_defect: float
    method: str

    def jumps(self) -> np.ndarray:
        return np.abs(np.diff(self.values))


def projection_profile(realization, W, n: int, grid_points: int = 512, method: str = "auto",
                       tol: float = 1e-3) -> ProjectionProfile:
    """Sample the projected density ``t -> Y_n`` of the fiber planes over ``W``.

    ``W`` is a :class:`PlaneParam` (its basis spans the target) or an array
    of direction vectors. Fiber offsets cover the projection of the
    realization's support box.
    """
    real = _realization(realization)
    basis = np.atleast_2d(W.basis if isinstance(W, PlaneParam) else
                          np.asarray(W, dtype=float) / np.linalg.norm(W))
    if basis.shape[1] != real.d or basis.shape[0] >= real.d:
        raise ValidationError("need d - k >= 1 for a projection")
    kdim = basis.shape[0]
    if kdim != 1:
        raise ValidationError("profiles are implemented for projections onto lines")
    w = basis[0]
    # fiber basis: orthonormal complement of w
    full = np.linalg.svd(np.vstack([w, np.eye(real.d)]).T)[0]
    comp = full[:, 1:real.d].T
    low, high = _support_box(real)
    corners = np.array(np.meshgrid(*zip(low, high), indexing="ij")).reshape(real.d, -1).T
    proj = corners @ w
    t_lo, t_hi = float(proj.min()), float(proj.max())
    dt = (t_hi - t_lo) / grid_points
    ts = t_lo + (np.arange(grid_points) + 0.5) * dt
    vals = np.zeros(grid_points)
    tag = None
    for i, t in enumerate(ts):
        fiber = PlaneParam(t * w, comp)
        if method in ("auto", "exact") and _exact_supported(real, fiber):
            vals[i] = mass_on_plane(real, fiber, n, "exact")
            tag = tag or "exact"
        else:
            vals[i] = mass_on_plane(real, fiber, n, "quadrature", tol)
            tag = tag or "quadrature"
    riemann = math.fsum((vals * dt).tolist())
    total = real.total_mass(n) if isinstance(real, SubdivisionTree) else math.nan
    return ProjectionProfile(basis, ts, vals, dt, riemann, total,
                             abs(riemann - total) if not math.isnan(total) else math.nan,
                             tag or "exact")


def holder_fit(samples, metric=None, min_pairs: int = 4) -> AnalysisReport:
    """Fit ``|f(t) - f(u)| <= K d(t, u)**gamma`` from samples.

    Pairs are binned by ``j = round(-log2 d(t, u))``; the oscillation of a bin
    is the largest value difference in it. ``gamma`` is the least-squares
    slope of ``log2 osc`` against ``log2`` of the bin distance, over bins with
    at least ``min_pairs`` pairs, excluding the finest bin.

    Parameters
    ----------
    samples : sequence of (t, value)
    metric : callable or None
        ``metric(T, U)`` on arrays of parameters; Euclidean by default.
    """
    ts = [np.atleast_1d(np.asarray(s[0], dtype=float)) for s in samples]
    vals = np.array([float(s[1]) for s in samples])
    if len(vals) < 16:
        raise ValidationError("holder_fit needs at least 16 samples")
    T = np.array(ts)
    if np.ptp(vals) == 0:
        return AnalysisReport("holder", math.inf, 0.0, (), 0.0, ["constant"], {})
    i, j = np.triu_indices(len(vals), 1)
    if metric is None:
        dist = np.linalg.norm(T[i] - T[j], axis=1)
    else:
        dist = np.asarray(metric(T[i], T[j]), dtype=float)
    osc = np.abs(vals[i] - vals[j])
    ok = dist > 0
    dist, osc = dist[ok], osc[ok]
    jbin = np.round(-np.log2(dist)).astype(np.int64)
    table = {"scale": [], "oscillation": [], "pairs": []}
    for b in np.unique(jbin):
        sel = jbin == b
        table["scale"].append(int(b))
        table["oscillation"].append(float(osc[sel].max()))
        table["pairs"].append(int(sel.sum()))
    sc = np.array(table["scale"])
    ov = np.array(table["oscillation"])
    pr = np.array(table["pairs"])
    use = (pr >= min_pairs) & (ov > 0)
    if use.sum() > 2:
        use[np.flatnonzero(use)[-1]] = False  # finest scale is undersampled
    if use.sum() < 2:
        return AnalysisReport("holder", math.nan, math.nan, (), math.nan, ["too-few-scales"], table)
    x = -sc[use].astype(float)
    y = np.log2(ov[use])
    slope, icpt, _, res = linear_fit(x, y)
    return AnalysisReport("holder", slope, 2.0**icpt, (int(sc[use].min()), int(sc[use].max())),
                          res, [], table)


def sampling_window(model, t):
    """Closed box containing the part of family member ``t`` inside the seed domain.

    Cutout realizations sampled with this window give exact masses for ``t``.
    """
    dom = model.domain()
    box = dom.bounding_box()
    lo, hi = box.low.copy(), box.high.copy()
    if isinstance(t, PlaneParam) and t.k == 1 and dom.kind == "ball":
        ch = _ball_chord(dom.center, dom.circumradius, t.basepoint, t.basis[0])
        if ch is None:
            return lo, lo.copy()
        ends = np.array([t.basepoint + ch[0] * t.basis[0], t.basepoint + ch[1] * t.basis[0]])
        return ends.min(axis=0), ends.max(axis=0)
    if isinstance(t, CurveParam):
        clo, chi = t.bounds()
        return np.maximum(lo, clo), np.minimum(hi, chi)
    if isinstance(t, IFSParam):
        c, R = t.bounding_ball()
        return np.maximum(lo, c - R), np.minimum(hi, c + R)
    return lo, hi
