"""Replicated experiments shared by the calibration script and the acceptance suite.

Each function is a pure function of its arguments and a root :class:`SeedPath`;
replicate ``r`` always uses ``seed.child(r)`` (or a documented sub-node).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analysis import box_dimension, convolve, fourier_dimension_estimate, sumset_interior
from .core import SeedPath
from .cutout import pixel_centers, raster_kill_levels, sample_cutouts
from .families import PlaneParam
from .intersect import mass_on_plane, mass_sequence, projection_profile, sampling_window
from .models import ModelSpec, realize
from .subdivision import SubdivisionTree

__all__ = [
    "survival_counts",
    "cutout_box_dimensions",
    "engine_gaps_cutout",
    "engine_gaps_percolation",
    "pointwise_martingale",
    "line_decay_slopes",
    "projection_contrast",
    "salem_fourier_estimates",
    "salem_convolution_sups",
    "sumset_detections",
    "random_lines",
]


def survival_counts(alpha: float, point, depth: int, replicates: int, seed: SeedPath) -> np.ndarray:
    """Number of replicates with ``x`` alive at each level ``1..depth`` (ball cutouts, d = 2)."""
    model = ModelSpec("ball-cutout", 2, {"alpha": alpha})
    spec, dom = model.intensity(), model.domain()
    x = np.asarray(point, dtype=float)
    window = (x, x)
    counts = np.zeros(depth, dtype=np.int64)
    for r in range(replicates):
        real = sample_cutouts(spec, dom, depth, seed.child(r), window)
        kill = int(real.kill_levels(x[None, :])[0])
        counts += kill > np.arange(1, depth + 1)
    return counts


def cutout_box_dimensions(alpha: float, depth: int, resolution: int, survivors: int,
                          seed: SeedPath, fit_window=None, max_replicates: int | None = None):
    """Box-dimension fits of ``A_depth`` for the first ``survivors`` surviving replicates.

    The support is rasterized over the seed ball's bounding square with the
    streamed kernel; the fit runs over levels ``3 .. depth - 2`` by default
    (cells between a quarter of the domain and four times the finest cutout
    diameter).

    Returns
    -------
    fits : list of DimensionFit
    extinct : int
        Replicates skipped because ``A_depth`` was empty on the raster.
    """
    model = ModelSpec("ball-cutout", 2, {"alpha": alpha})
    spec, dom = model.intensity(), model.domain()
    inside = dom.contains(pixel_centers(dom, resolution)).reshape(resolution, resolution)
    fw = (3, depth - 2) if fit_window is None else fit_window
    fits, extinct, r = [], 0, 0
    limit = max_replicates or 4 * survivors
    while len(fits) < survivors and r < limit:
        kill = raster_kill_levels(spec, dom, depth, seed.child(r), resolution)
        mask = (kill > depth) & inside
        del kill
        if mask.any():
            fits.append(box_dimension(mask, fw))
        else:
            extinct += 1
        r += 1
    return fits, extinct


def random_lines(rng: np.random.Generator, count: int, radius: float = 0.9, d: int = 2):
    """Lines through uniform points of ``B(0, radius)`` with uniform directions."""
    out = []
    for _ in range(count):
        while True:
            p = rng.uniform(-radius, radius, d)
            if p @ p <= radius * radius:
                break
        u = rng.normal(size=d)
        out.append(PlaneParam.line(p, u))
    return out


def engine_gaps_cutout(alpha: float, depth: int, realizations: int, lines: int, tol: float,
                       seed: SeedPath) -> np.ndarray:
    """``|exact - quadrature|`` for random lines on ball-cutout realizations, shape (R, L)."""
    model = ModelSpec("ball-cutout", 2, {"alpha": alpha})
    gaps = np.zeros((realizations, lines))
    for r in range(realizations):
        real = realize(model, seed.child(r, 0), depth)
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(
            seed.root_seed, spawn_key=seed.path + (r, 1))))
        for j, V in enumerate(random_lines(rng, lines)):
            gaps[r, j] = abs(mass_on_plane(real, V, depth, "exact")
                             - mass_on_plane(real, V, depth, "quadrature", tol))
    return gaps


def engine_gaps_percolation(p: float, depth: int, realizations: int, lines: int, tol: float,
                            seed: SeedPath) -> np.ndarray:
    """``|segment clipping - fine midpoint sampling|`` on percolation trees, shape (R, L)."""
    gaps = np.zeros((realizations, lines))
    model = ModelSpec("percolation", 2, {"p": p})
    for r in range(realizations):
        tree = realize(model, seed.child(r, 0), depth)
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(
            seed.root_seed, spawn_key=seed.path + (r, 1))))
        for j in range(lines):
            q = rng.uniform(0.1, 0.9, 2)
            V = PlaneParam.line(q, rng.normal(size=2))
            exact = mass_on_plane(tree, V, depth, "exact")
            # brute force: plain midpoint sampling of the clipped segment
            lo, hi = _unit_box_chord(V)
            n_pts = int(math.ceil((hi - lo) / (tol * 2.0**-depth)))
            h = (hi - lo) / n_pts
            t = lo + (np.arange(n_pts) + 0.5) * h
            pts = V.basepoint + t[:, None] * V.basis[0]
            brute = h * float(np.sum(tree.density_at(pts, depth)))
            gaps[r, j] = abs(exact - brute)
    return gaps


def _unit_box_chord(V: PlaneParam):
    a, u = V.basepoint, V.basis[0]
    t0, t1 = -np.inf, np.inf
    for i in range(len(a)):
        if u[i] != 0:
            ta, tb = (0 - a[i]) / u[i], (1 - a[i]) / u[i]
            t0, t1 = max(t0, min(ta, tb)), min(t1, max(ta, tb))
    return t0, t1


@dataclass
class MartingaleCheck:
    """Pointwise statistics of ``mu_n`` at fixed points across replicates.

    Attributes
    ----------
    means, stderr : ndarray, shape (depth + 1,)
        Replicate mean and standard error of the point-averaged ``mu_n``.
    initial : float
        Point-averaged ``mu_0``.
    ratio_max : float
        Largest ``mu_{n+1}(x) / mu_n(x)`` over replicates, points and levels
        with ``mu_n(x) > 0``.
    growth_constant : float
    """

    model: str
    means: np.ndarray
    stderr: np.ndarray
    initial: float
    ratio_max: float
    growth_constant: float
    negative: bool


def pointwise_martingale(model: ModelSpec, points, depth: int, replicates: int,
                         seed: SeedPath) -> MartingaleCheck:
    """Sample ``mu_n(x)`` for ``n = 0..depth`` at fixed points.

    Cutout replicates are sampled in the bounding box of the points.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    window = (pts.min(axis=0), pts.max(axis=0)) if model.is_cutout else None
    vals = np.zeros((replicates, depth + 1, len(pts)))
    for r in range(replicates):
        real = realize(model, seed.child(r), depth, window)
        if isinstance(real, SubdivisionTree):
            for n in range(depth + 1):
                vals[r, n] = real.density_at(pts, n)
        else:
            vals[r] = real.density_levels(pts, depth)
    avg = vals.mean(axis=2)
    means = avg.mean(axis=0)
    stderr = avg.std(axis=0, ddof=1) / math.sqrt(replicates)
    prev, nxt = vals[:, :-1, :], vals[:, 1:, :]
    pos = prev > 0
    ratio = float(np.max(nxt[pos] / prev[pos])) if pos.any() else 0.0
    if np.any((prev == 0) & (nxt > 0)):
        ratio = math.inf  # a dead point came back to life
    return MartingaleCheck(model.kind, means, stderr, float(avg[0, 0] if replicates else 0.0),
                           ratio, model.growth_constant, bool(np.any(vals < 0)))


def line_decay_slopes(alpha: float, depth: int, replicates: int, seed: SeedPath,
                      line: PlaneParam | None = None) -> np.ndarray:
    """Fitted increment decay slopes of ``Y_n`` on a line through the centre (ball cutouts)."""
    model = ModelSpec("ball-cutout", 2, {"alpha": alpha})
    V = PlaneParam.line([0.0, 0.0], [1.0, 0.0]) if line is None else line
    window = sampling_window(model, V)
    out = np.zeros(replicates)
    for r in range(replicates):
        real = realize(model, seed.child(r), depth, window)
        out[r] = mass_sequence(real, V, depth).decay_slope
    return out


def projection_contrast(p: float, depth: int, seed: SeedPath, grid_points: int = 512) -> dict:
    """Max adjacent jump of the x-axis profile over the median jump of the diagonal profile."""
    tree = realize(ModelSpec("percolation", 2, {"p": p}), seed, depth)
    principal = projection_profile(tree, [1.0, 0.0], depth, grid_points)
    diagonal = projection_profile(tree, [1.0, 1.0], depth, grid_points)
    pj, dj = principal.jumps(), diagonal.jumps()
    med = float(np.median(dj))
    return {"max_jump_principal": float(pj.max()), "median_jump_diagonal": med,
            "factor": float(pj.max() / med) if med > 0 else math.inf,
            "mass": tree.total_mass(depth),
            "riemann_principal": principal.riemann_mass, "riemann_diagonal": diagonal.riemann_mass}


def salem_fourier_estimates(alpha0: float, depth: int, k_max: int, replicates: int,
                            seed: SeedPath) -> np.ndarray:
    """Fourier-dimension estimates ``2 sigma`` of Salem-line replicates."""
    model = ModelSpec("salem-line", 1, {"alpha0": alpha0})
    return np.array([fourier_dimension_estimate(realize(model, seed.child(r), depth), depth,
                                                k_max).dimension_estimate
                     for r in range(replicates)])


def salem_convolution_sups(alpha0: float, levels, replicates: int, seed: SeedPath) -> np.ndarray:
    """Sup of ``mu_n * mu_n`` at each level for Salem-line replicates, shape (R, len(levels)).

    The grid spacing equals the cell size ``2**-n``, so node values are exact.
    """
    model = ModelSpec("salem-line", 1, {"alpha0": alpha0})
    depth = max(levels)
    out = np.zeros((replicates, len(levels)))
    for r in range(replicates):
        tree = realize(model, seed.child(r), depth)
        for j, n in enumerate(levels):
            out[r, j] = convolve(tree, tree, None, 2**n, same_realization=True, n=n).sup
    return out


def sumset_detections(p: float, depth: int, pairs: int, seed: SeedPath,
                      threshold_fraction: float = 0.1, min_coarse_cells: int = 4) -> np.ndarray:
    """Nonempty-interior detections for independent d = 1 percolation pairs.

    The convolution density must exceed ``threshold_fraction`` of its maximum
    at depth ``n`` and at depth ``n - 2`` on an interval at least
    ``min_coarse_cells`` coarse cells long.
    """
    model = ModelSpec("percolation", 1, {"p": p})
    hits = np.zeros(pairs, dtype=bool)
    for r in range(pairs):
        a = realize(model, seed.child(r, 0), depth)
        b = realize(model, seed.child(r, 1), depth)
        if a.cell_count(depth) == 0 or b.cell_count(depth) == 0:
            continue
        fine = convolve(a, b, None, 2**depth, n=depth)
        coarse = convolve(a, b, None, 2 ** (depth - 2), n=depth - 2)
        rep = sumset_interior(fine, threshold_fraction, coarse, min_coarse_cells)
        hits[r] = not rep.empty
    return hits
