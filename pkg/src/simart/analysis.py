"""Dimension estimators, Fourier decay, convolution densities and tail audits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .core import SeedPath, ValidationError
from .cutout import CutoutRealization, density_raster
from .families import frostman_exponent
from .reports import AnalysisReport, DimensionFit, SpectrumReport, linear_fit
from .subdivision import SubdivisionTree, density_field

__all__ = [
    "CellField",
    "ConvolutionGrid",
    "SumsetReport",
    "box_dimension",
    "box_counts",
    "correlation_dimension",
    "fourier_coefficient",
    "fourier_dimension_estimate",
    "band_peaks",
    "field_of",
    "convolve",
    "sumset_interior",
    "increment_tail_audit",
]


# ---------------------------------------------------------------------------
# dimension estimators


def box_counts(mask: np.ndarray) -> np.ndarray:
    """Occupied-cell counts ``N_j`` for ``j = 0..L`` of a ``(2**L,)*d`` boolean mask."""
    mask = np.asarray(mask, dtype=bool)
    side = mask.shape[0]
    if any(s != side for s in mask.shape) or side & (side - 1):
        raise ValidationError("mask must be a cube with power-of-two side")
    L = side.bit_length() - 1
    d = mask.ndim
    counts = np.zeros(L + 1, dtype=np.int64)
    cur = mask
    for j in range(L, -1, -1):
        counts[j] = int(cur.sum())
        if j:
            half = cur.shape[0] // 2
            shape = []
            for _ in range(d):
                shape += [half, 2]
            cur = cur.reshape(shape).any(axis=tuple(range(1, 2 * d, 2)))
    return counts


def _fit_levels(kind, levels, values, fit_window) -> DimensionFit:
    levels = np.asarray(levels)
    values = np.asarray(values, dtype=float)
    if fit_window is None:
        lo, hi = int(levels.min()), int(levels.max())
    else:
        lo, hi = int(fit_window[0]), int(fit_window[1])
    sel = (levels >= lo) & (levels <= hi) & np.isfinite(values)
    if sel.sum() < 4:
        raise ValidationError(f"{kind} fit needs at least 4 levels, got {int(sel.sum())}")
    slope, _, se, res = linear_fit(levels[sel], values[sel])
    if not math.isfinite(slope):
        raise ValidationError(f"{kind} fit is degenerate")
    return DimensionFit(kind, lo, hi, levels[sel].tolist(), values[sel].tolist(), slope, se, res)


def box_dimension(cells_or_mask, fit_window=None) -> DimensionFit:
    """Slope of ``log2`` occupied-cell count against level.

    Parameters
    ----------
    cells_or_mask : ndarray or sequence
        A cubic boolean mask with power-of-two side (counts are formed by
        block reduction), a :class:`SubdivisionTree`, or a sequence whose
        entry ``j`` is either the occupied-cell count or the array of occupied
        cells at level ``j``.
    fit_window : (m_lo, m_hi) or None
    """
    if isinstance(cells_or_mask, SubdivisionTree):
        counts = np.array([cells_or_mask.cell_count(n) for n in range(cells_or_mask.depth + 1)])
    elif isinstance(cells_or_mask, np.ndarray) and cells_or_mask.dtype == bool:
        counts = box_counts(cells_or_mask)
    else:
        counts = np.array([c if np.isscalar(c) else len(c) for c in cells_or_mask], dtype=float)
    counts = np.asarray(counts, dtype=float)
    with np.errstate(divide="ignore"):
        logs = np.where(counts > 0, np.log2(np.maximum(counts, 1)), -np.inf)
    return _fit_levels("box", np.arange(len(counts)), logs, fit_window)


def correlation_dimension(masses, fit_window=None) -> DimensionFit:
    """Slope of ``-log2 sum (m_Q / ||mu||)**2`` against level.

    ``masses[j]`` holds the level-``j`` cell masses (or a
    :class:`SubdivisionTree`, whose cell masses are used).
    """
    if isinstance(masses, SubdivisionTree):
        masses = [masses.cell_masses(n) for n in range(masses.depth + 1)]
    vals = []
    for m in masses:
        m = np.asarray(m, dtype=float)
        tot = float(m.sum())
        if tot <= 0:
            raise ValidationError("correlation dimension needs nonzero total mass")
        vals.append(-math.log2(float(np.sum((m / tot) ** 2))))
    return _fit_levels("correlation", np.arange(len(vals)), vals, fit_window)


# ---------------------------------------------------------------------------
# Fourier analysis


@dataclass
class CellField:
    """Piecewise-constant density on a regular grid of cubes.

    Attributes
    ----------
    low : ndarray, shape (d,)
        Lower corner of the grid.
    h : float
        Cell side.
    values : ndarray, shape (N,)*d
        Density values; axis ``j`` runs along coordinate ``j``.
    """

    low: np.ndarray
    h: float
    values: np.ndarray

    def __post_init__(self):
        self.low = np.atleast_1d(np.asarray(self.low, dtype=float))
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != len(self.low):
            raise ValidationError("values and low disagree on the dimension")

    @property
    def d(self) -> int:
        return len(self.low)

    @property
    def mass(self) -> float:
        return math.fsum(self.values.ravel().tolist()) * self.h**self.d

    @classmethod
    def from_tree(cls, tree: SubdivisionTree, n: int) -> "CellField":
        return cls(np.zeros(tree.d), 2.0 ** (-n), density_field(tree, n, 2**n))

    @classmethod
    def from_raster(cls, raster, low=None, extent: float = 1.0) -> "CellField":
        raster = np.asarray(raster, dtype=float)
        low = np.zeros(raster.ndim) if low is None else low
        return cls(low, extent / raster.shape[0], raster)

    def cells(self):
        """Lower corners and values of the nonzero cells."""
        idx = np.argwhere(self.values != 0)
        return self.low + idx * self.h, self.values[tuple(idx.T)]


def _interval_factor(k, low, h):
    """``int_low^{low+h} e(-k x) dx`` for arrays ``k`` and ``low``."""
    return h * np.exp(-2j * np.pi * k * (low + 0.5 * h)) * np.sinc(k * h)


def fourier_coefficient(field, k) -> complex:
    """Exact Fourier coefficient ``int f(x) e(-k.x) dx`` of a piecewise-constant density.

    ``field`` is a :class:`CellField`, a raster on the unit cube or a
    ``(lows, h, values)`` cell list. ``k`` may be non-integer.
    """
    if isinstance(field, tuple):
        lows, h, vals = field
        lows = np.atleast_2d(np.asarray(lows, dtype=float))
        vals = np.asarray(vals, dtype=float)
    else:
        if not isinstance(field, CellField):
            field = CellField.from_raster(field)
        lows, vals = field.cells()
        h = field.h
        lows = lows.reshape(len(vals), -1)
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if len(k) != lows.shape[1]:
        raise ValidationError("frequency dimension mismatch")
    if len(vals) == 0:
        return 0j
    term = vals.astype(complex)
    for ax in range(len(k)):
        term = term * _interval_factor(k[ax], lows[:, ax], h)
    # correctly rounded sums so k = 0 reproduces the mass exactly
    return complex(math.fsum(term.real.tolist()), math.fsum(term.imag.tolist()))


def _coefficients_fft(field: CellField, kmax: int) -> np.ndarray:
    """Exact coefficients at integer ``k`` with ``|k_i| < kmax`` via the DFT of cell values.

    With ``N`` cells of side ``h`` and ``h N`` an integer, ``sum_j v_j e(-k j h)``
    is the DFT of the values at index ``k h N mod N``. Dyadic fields produced
    by this package satisfy this.
    """
    N = field.values.shape[0]
    span = field.h * N
    if abs(span - round(span)) > 1e-12 or round(span) < 1:
        raise ValidationError("FFT route needs an integer grid extent")
    span = int(round(span))
    F = np.fft.fftn(field.values)
    ks = np.arange(-kmax + 1, kmax)
    idx = (ks * span) % N if span > 0 else ks % N
    out = F[np.ix_(*([idx] * field.d))]
    for ax in range(field.d):
        # per-axis phase of the grid origin and the cell integral
        fac = field.h * np.exp(-2j * np.pi * ks * (field.low[ax] + 0.5 * field.h)) * np.sinc(ks * field.h)
        shape = [1] * field.d
        shape[ax] = len(ks)
        out = out * fac.reshape(shape)
    return out


def band_peaks(field: CellField, k_max: int, probe: str = "integer"):
    """Peak moduli over dyadic bands ``2**m <= |k| < 2**(m+1)``, ``m = 0..log2(k_max) - 1``."""
    if k_max < 2 or k_max & (k_max - 1):
        raise ValidationError("k_max must be a power of two")
    M = k_max.bit_length() - 1
    peaks = np.zeros(M)
    where = [None] * M
    if probe == "integer":
        coef = _coefficients_fft(field, k_max)
        ks = np.arange(-k_max + 1, k_max)
        grids = np.meshgrid(*([ks] * field.d), indexing="ij")
        norm = np.sqrt(sum(g.astype(float) ** 2 for g in grids))
        mod = np.abs(coef)
        for m in range(M):
            sel = (norm >= 2**m) & (norm < 2 ** (m + 1))
            vals = np.where(sel, mod, -1.0)
            pos = np.unravel_index(int(np.argmax(vals)), vals.shape)
            peaks[m] = float(vals[pos])
            where[m] = [int(g[pos]) for g in grids]
    elif probe == "half-integer":
        if field.d != 1:
            raise ValidationError("half-integer probes are implemented in d = 1")
        lows, vals = field.cells()
        lows = lows.ravel()
        for m in range(M):
            ks = np.arange(2**m, 2 ** (m + 1)) + 0.5
            ks = ks[ks < 2 ** (m + 1)]
            mods = []
            for chunk in np.array_split(ks, max(1, len(ks) // 256)):
                fac = _interval_factor(chunk[:, None], lows[None, :], field.h)
                mods.append(np.abs(fac @ vals))
            mods = np.concatenate(mods)
            i = int(np.argmax(mods))
            peaks[m] = float(mods[i])
            where[m] = [float(ks[i])]
    else:
        raise ValidationError(f"unknown probe {probe!r}")
    return peaks, where


def fourier_dimension_estimate(realization, n: int, k_max: int, probe: str = "integer",
                               fit_window=None) -> SpectrumReport:
    """Band-peak decay of ``|mu_n^(k)|`` and the implied Fourier dimension ``2 sigma``.

    ``sigma`` is minus the least-squares slope of ``log2`` peak against band
    index. The default window is the upper half of the bands below the top
    band: the top band is excluded because of aliasing, and low bands are
    dominated by the first few subdivision steps.
    """
    if k_max < 32 or k_max & (k_max - 1):
        raise ValidationError("k_max must be a power of two >= 32")
    field_ = field_of(realization, n)
    if field_.d not in (1, 2):
        raise ValidationError("Fourier analysis supports d = 1 and 2")
    peaks, where = band_peaks(field_, k_max, probe)
    M = len(peaks)
    lo, hi = ((M - 1) // 2, M - 2) if fit_window is None else fit_window
    bands = np.arange(M)
    sel = (bands >= lo) & (bands <= hi) & (peaks > 0)
    flags = []
    if sel.sum() >= 2:
        slope, _, se, _ = linear_fit(bands[sel], np.log2(peaks[sel]))
        sigma = -slope
    else:
        sigma, se = math.nan, math.nan
        flags.append("no-positive-peaks")
    zero = fourier_coefficient(field_, np.zeros(field_.d))
    return SpectrumReport(bands.tolist(), peaks.tolist(), where, sigma, 2 * sigma, 2 * se,
                          (int(lo), int(hi)), field_.mass, abs(zero), probe, flags)


def field_of(realization, n: int, resolution: int | None = None) -> CellField:
    """Piecewise-constant field of ``mu_n``.

    Dyadic trees give their level-``n`` cells exactly. Cutouts are rasterized
    over the seed domain's bounding square at ``resolution`` (default
    ``2**(n + 2)``).
    """
    if isinstance(realization, CellField):
        return realization
    if isinstance(realization, SubdivisionTree):
        return CellField.from_tree(realization, n)
    if isinstance(realization, CutoutRealization):
        res = 2 ** (n + 2) if resolution is None else resolution
        R = realization.domain.circumradius
        raster = density_raster(realization, n, res).T  # axis 0 along x
        return CellField(np.asarray(realization.domain.center) - R, 2 * R / res, raster)
    raise ValidationError(f"cannot build a field from {realization!r}")


# ---------------------------------------------------------------------------
# convolution


@dataclass
class ConvolutionGrid:
    """Node values of the density of ``mu' * S mu''``.

    Attributes
    ----------
    resolution : int
        Grid cells per axis of each input after resampling.
    S : ndarray, shape (d, d)
    low : ndarray
        Position of node 0.
    h : float
        Node spacing.
    values : ndarray
        Density at nodes ``low + j h``; the density is interpolated
        multilinearly between nodes.
    flags : list of str
    """

    resolution: int
    S: np.ndarray
    low: np.ndarray
    h: float
    values: np.ndarray
    mass_a: float = math.nan
    mass_b: float = math.nan
    flags: list = field(default_factory=list)

    @property
    def d(self) -> int:
        return self.values.ndim

    @property
    def sup(self) -> float:
        return float(self.values.max()) if self.values.size else 0.0

    @property
    def mass(self) -> float:
        return math.fsum(self.values.ravel().tolist()) * self.h**self.d

    def support_box(self):
        nz = np.argwhere(self.values > 0)
        if len(nz) == 0:
            return None
        return self.low + nz.min(axis=0) * self.h, self.low + nz.max(axis=0) * self.h

    def nodes(self, axis: int = 0) -> np.ndarray:
        return self.low[axis] + np.arange(self.values.shape[axis]) * self.h


def _rebin_axis(values, axis, low, h, new_low, new_h, n_dst) -> np.ndarray:
    """Masses of a piecewise-constant density on a new 1-d grid along ``axis``.

    The cumulative mass is piecewise linear, so interpolating it at the new
    cell edges is exact.
    """
    v = np.moveaxis(values, axis, -1)
    n_src = v.shape[-1]
    cdf = np.concatenate([np.zeros(v.shape[:-1] + (1,)), np.cumsum(v * h, axis=-1)], axis=-1)
    src = low + np.arange(n_src + 1) * h
    dst = new_low + np.arange(n_dst + 1) * new_h
    flat = cdf.reshape(-1, n_src + 1)
    out = np.empty((flat.shape[0], n_dst))
    for i, row in enumerate(flat):
        out[i] = np.diff(np.interp(dst, src, row))
    return np.moveaxis(out.reshape(v.shape[:-1] + (n_dst,)), -1, axis)


def _masses_on_grid(f: CellField, low, h, n) -> np.ndarray:
    """Cell masses of ``f`` on the grid ``low + j h`` (exact overlap integration)."""
    out = f.values
    for ax in range(f.d):
        # integrating one axis at a time leaves a density in the others
        out = _rebin_axis(out, ax, f.low[ax], f.h, low[ax], h, n)
    return out


def _pushforward(f: CellField, S: np.ndarray, supersample: int = 4) -> tuple:
    """Cells of ``S f`` as weighted points (d >= 2) or an exact field (d = 1)."""
    if f.d == 1:
        s = float(S[0, 0])
        vals = f.values / abs(s)
        if s > 0:
            return CellField(f.low * s, f.h * s, vals), None
        n = len(vals)
        return CellField(np.array([(f.low[0] + n * f.h) * s]), f.h * abs(s), vals[::-1].copy()), None
    # d >= 2: split each cell into supersample**d subcells and push their centres
    lows, vals = f.cells()
    q = supersample
    sub = (np.array(np.meshgrid(*([np.arange(q)] * f.d), indexing="ij")).reshape(f.d, -1).T + 0.5) / q
    pts = (lows[:, None, :] + sub[None, :, :] * f.h).reshape(-1, f.d) @ S.T
    w = np.repeat(vals * f.h**f.d / q**f.d, len(sub))
    return None, (pts, w)


def convolve(fieldA, fieldB, S=None, resolution: int = 1024, same_realization: bool = False,
             n: int | None = None) -> ConvolutionGrid:
    """Density of ``mu_A * S mu_B`` on a common grid.

    Both inputs are resampled (exact cell-overlap masses) onto grids of
    ``resolution`` cells per axis with a shared spacing ``h``. For densities
    that are piecewise constant on such grids the convolution is continuous
    and its node values are ``h**d sum_i a_i b_{j-1-i}`` exactly, which is
    what is returned. ``S`` is applied to ``mu_B`` as a measure pushforward:
    exactly in ``d = 1``, by sub-cell splatting in ``d >= 2``.

    Parameters
    ----------
    fieldA, fieldB : CellField, raster, or realization (``n`` required)
    S : array_like or None
        Invertible ``d x d`` matrix (identity by default).
    resolution : int
        Power of two.
    same_realization : bool
        Flags ``S`` within ``1e-9`` of ``{S : S + I singular}``.
    """
    if resolution < 2 or resolution & (resolution - 1):
        raise ValidationError("resolution must be a power of two")
    fa = _as_field(fieldA, n)
    fb = _as_field(fieldB, n)
    if fa.d != fb.d:
        raise ValidationError("fields differ in dimension")
    d = fa.d
    S = np.eye(d) if S is None else np.atleast_2d(np.asarray(S, dtype=float))
    if S.shape != (d, d):
        raise ValidationError("S must be d x d")
    if abs(np.linalg.det(S)) < 1e-300 or np.linalg.svd(S, compute_uv=False).min() < 1e-12:
        raise ValidationError("S is singular")
    flags = []
    if same_realization and np.linalg.svd(S + np.eye(d), compute_uv=False).min() <= 1e-9:
        flags.append("excluded-S")
    fbS, splat = _pushforward(fb, S)
    extent_a = fa.h * np.array(fa.values.shape)
    if fbS is not None:
        low_b, extent_b = fbS.low, fbS.h * np.array(fbS.values.shape)
    else:
        pts, w = splat
        low_b = pts.min(axis=0) - 1e-12
        extent_b = pts.max(axis=0) + 1e-12 - low_b
    h = float(max(extent_a.max(), extent_b.max())) / resolution
    ga = _masses_on_grid(fa, fa.low, h, resolution) / h**d
    if fbS is not None:
        gb = _masses_on_grid(fbS, low_b, h, resolution) / h**d
    else:
        idx = np.clip(np.floor((pts - low_b) / h).astype(np.int64), 0, resolution - 1)
        gb = np.zeros((resolution,) * d)
        np.add.at(gb, tuple(idx.T), w)
        gb /= h**d
    conv = fftconvolve(ga, gb, mode="full") * h**d
    conv = np.maximum(conv, 0.0)  # transform round-off
    # node j (j = 0..2 res) sits at low_a + low_b + j h; node 0 and 2 res are zero
    vals = np.zeros(tuple(s + 2 for s in conv.shape))
    vals[tuple(slice(1, s + 1) for s in conv.shape)] = conv
    ma, mb = fa.mass, float(np.sum(gb)) * h**d
    total = math.fsum(vals.ravel().tolist()) * h**d
    if total > 0:
        # remove transform round-off so the grid carries exactly ma * mb
        vals *= (ma * mb) / total
    return ConvolutionGrid(resolution, S, fa.low + low_b, h, vals, ma, mb, flags)


def _as_field(obj, n) -> CellField:
    if isinstance(obj, CellField):
        return obj
    if isinstance(obj, np.ndarray):
        return CellField.from_raster(obj)
    if n is None:
        raise ValidationError("a level n is needed to convolve realizations")
    return field_of(obj, n)


@dataclass
class SumsetReport:
    """Largest box on which a convolution density stays above threshold."""

    empty: bool
    low: list
    high: list
    threshold: float
    threshold_fraction: float
    cells: int = 0
    flags: list = field(default_factory=list)

    @property
    def width(self) -> float:
        return 0.0 if self.empty else float(np.min(np.array(self.high) - np.array(self.low)))


def _longest_run(mask: np.ndarray) -> tuple:
    best, start, best_s = 0, None, -1
    for i, v in enumerate(np.append(mask, False)):
        if v and start is None:
            start = i
        elif not v and start is not None:
            if i - start > best:
                best, best_s = i - start, start
            start = None
    return best_s, best


def _largest_rectangle(mask: np.ndarray) -> tuple:
    """Largest all-true axis-aligned rectangle (histogram stack method)."""
    rows, cols = mask.shape
    heights = np.zeros(cols, dtype=np.int64)
    best = (0, 0, 0, 0, 0)  # area, r0, r1, c0, c1
    for r in range(rows):
        heights = np.where(mask[r], heights + 1, 0)
        stack = []
        for c in range(cols + 1):
            hcur = heights[c] if c < cols else 0
            start = c
            while stack and stack[-1][1] >= hcur:
                s, hh = stack.pop()
                area = hh * (c - s)
                if area > best[0]:
                    best = (area, r - hh + 1, r + 1, s, c)
                start = s
            stack.append((start, hcur))
    return best


def sumset_interior(grid: ConvolutionGrid, threshold_fraction: float = 0.5,
                    coarse_grid: ConvolutionGrid | None = None,
                    min_coarse_cells: int = 0) -> SumsetReport:
    """Largest box where the convolution density exceeds ``threshold_fraction * max``.

    When ``coarse_grid`` (the same pair at depth ``n - 2``) is given, the
    density must exceed the threshold at both depths; the coarse grid is
    interpolated to the fine nodes. A box shorter than ``min_coarse_cells``
    coarse node spacings on some axis is reported as empty.
    """
    if grid.values.size == 0 or grid.sup <= 0:
        return SumsetReport(True, [], [], 0.0, threshold_fraction, flags=["zero-grid"])
    thr = threshold_fraction * grid.sup
    mask = grid.values > thr
    min_len = 0.0
    if coarse_grid is not None:
        if coarse_grid.sup <= 0:
            return SumsetReport(True, [], [], thr, threshold_fraction, flags=["zero-coarse-grid"])
        cthr = threshold_fraction * coarse_grid.sup
        mask &= _interpolate_to(coarse_grid, grid) > cthr
        min_len = min_coarse_cells * coarse_grid.h
    if grid.d == 1:
        s, length = _longest_run(mask)
        if length == 0:
            return SumsetReport(True, [], [], thr, threshold_fraction)
        lo = [float(grid.low[0] + s * grid.h)]
        hi = [float(grid.low[0] + (s + length - 1) * grid.h)]
        cells = length
    elif grid.d == 2:
        area, r0, r1, c0, c1 = _largest_rectangle(mask)
        if area == 0:
            return SumsetReport(True, [], [], thr, threshold_fraction)
        lo = [float(grid.low[0] + r0 * grid.h), float(grid.low[1] + c0 * grid.h)]
        hi = [float(grid.low[0] + (r1 - 1) * grid.h), float(grid.low[1] + (c1 - 1) * grid.h)]
        cells = int(area)
    else:
        raise ValidationError("sumset detection supports d = 1 and 2")
    if min(h - l for l, h in zip(lo, hi)) < min_len:
        return SumsetReport(True, [], [], thr, threshold_fraction, flags=["below-min-width"])
    return SumsetReport(False, lo, hi, thr, threshold_fraction, cells)


def _interpolate_to(src: ConvolutionGrid, dst: ConvolutionGrid) -> np.ndarray:
    if src.d == 1:
        return np.interp(dst.nodes(0), src.nodes(0), src.values[:], left=0.0, right=0.0)
    from scipy.interpolate import RegularGridInterpolator

    interp = RegularGridInterpolator([src.nodes(a) for a in range(src.d)], src.values,
                                     bounds_error=False, fill_value=0.0)
    pts = np.array(np.meshgrid(*[dst.nodes(a) for a in range(dst.d)], indexing="ij"))
    return interp(pts.reshape(dst.d, -1).T).reshape(dst.values.shape)


# ---------------------------------------------------------------------------
# large-deviation audit


def increment_tail_audit(model, t, n: int, kappas, replicates: int,
                         seed: SeedPath | int = 0) -> AnalysisReport:
    """Frequency of ``|Y_{n+1} - Y_n| > kappa sqrt(Y_n)`` over replicates.

    Fits ``log`` frequency against ``kappa**2 * 2**((s - alpha) n)`` over the
    kappas with positive frequency; ``estimate`` is that slope. The flag
    ``non-negative-slope`` is raised when the fitted slope is not negative.
    Cutout replicates are sampled in a window around the family member.
    """
    from .intersect import mass_sequence, sampling_window
    from .models import realize

    s = frostman_exponent(t)
    alpha = model.alpha
    if not s > alpha:
        raise ValidationError(f"tail audit needs s > alpha (s={s:.4g}, alpha={alpha:.4g})")
    seed = seed if isinstance(seed, SeedPath) else SeedPath(int(seed))
    kappas = np.asarray(sorted(float(k) for k in kappas))
    window = sampling_window(model, t) if model.is_cutout else None
    inc = np.zeros(replicates)
    base = np.zeros(replicates)
    for r in range(replicates):
        real = realize(model, seed.child(r), n + 1, window)
        seq = mass_sequence(real, t, n + 1)
        base[r] = seq.values[n]
        inc[r] = abs(seq.values[n + 1] - seq.values[n])
    counts = np.array([int(np.sum(inc > k * np.sqrt(base))) for k in kappas])
    freq = counts / replicates
    x = kappas**2 * 2.0 ** ((s - alpha) * n)
    pos = freq > 0
    flags = []
    if pos.sum() >= 2:
        slope, icpt, _, res = linear_fit(x[pos], np.log(freq[pos]))
        if not slope < 0:
            flags.append("non-negative-slope")
    else:
        slope, icpt, res = math.nan, math.nan, math.nan
        flags.append("too-few-positive-frequencies")
    if np.any(np.diff(freq) > 0):
        flags.append("not-monotone")
    table = {"kappa": kappas.tolist(), "count": counts.tolist(), "frequency": freq.tolist(),
             "x": x.tolist(), "replicates": replicates, "n": n, "s": s, "alpha": alpha}
    return AnalysisReport("tail-audit", slope, icpt, (float(kappas.min()), float(kappas.max())),
                          res, flags, table)
