"""Hot kernels with a compiled backend and a numpy fallback.

The compiled extension is used when it was built; set ``SIMART_PURE_PYTHON=1``
to force the numpy implementations. ``BACKEND`` names the active one.
"""

from __future__ import annotations

import importlib
import os

import numpy as np

from . import _pykernels

NEVER = 255  # kill level of a point no cutout removes

def _load_compiled():
    if os.environ.get("SIMART_PURE_PYTHON", "") == "1":
        return None
    try:
        return importlib.import_module(__name__ + "._ckernels")
    except ImportError:  # extension not built
        return None


_ckernels = _load_compiled()

_impl = _ckernels if _ckernels is not None else _pykernels
BACKEND = "cython" if _ckernels is not None else "numpy"


def backends() -> dict:
    """Available kernel modules by name."""
    out = {"numpy": _pykernels}
    if _ckernels is not None:
        out["cython"] = _ckernels
    return out


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def _u8(a):
    return np.ascontiguousarray(a, dtype=np.uint8)


def raster_kill_2d(cx, cy, rad, level, x0, y0, h, kill, impl=None):
    (impl or _impl).raster_kill_2d(_f64(cx), _f64(cy), _f64(rad), _u8(level),
                                   float(x0), float(y0), float(h), kill)


def segment_kill(p, u, step, centers, rad, level, kill, impl=None):
    centers = np.asarray(centers, dtype=np.float64)
    if centers.ndim == 1:
        centers = centers.reshape(-1, len(p))
    (impl or _impl).segment_kill(_f64(p), _f64(u), float(step), _f64(centers),
                                 _f64(rad), _u8(level), kill)


class DiscHash:
    """Per-band spatial hash of discs for point kill-level queries.

    Parameters
    ----------
    centers : ndarray, shape (m, d)
    rad : ndarray, shape (m,)
    band : ndarray of int, shape (m,)
        Scale band ``k``; radii in band ``k`` must be below ``2**-(k+1)``.
    """

    def __init__(self, centers, rad, band):
        centers = np.asarray(centers, dtype=float)
        if centers.ndim != 2:
            centers = centers.reshape(len(rad), -1) if len(rad) else centers.reshape(0, 1)
        centers = _f64(centers)
        self.centers = centers
        self.rad = _f64(rad)
        band = np.asarray(band, dtype=np.int64)
        self.d = centers.shape[1] if centers.ndim == 2 else 1
        levels = np.unique(band)
        starts = [0]
        cells, los, dims, keys, orders = [], [], [], [], []
        for k in levels:
            idx = np.flatnonzero(band == k)
            g = 2.0 ** (-int(k))
            ij = np.floor(centers[idx] / g).astype(np.int64)
            lo = ij.min(axis=0) - 1
            dim = ij.max(axis=0) - lo + 2
            strides = np.concatenate([[1], np.cumprod(dim[:-1])]).astype(np.int64)
            key = (ij - lo) @ strides
            srt = np.argsort(key, kind="stable")
            keys.append(key[srt])
            orders.append(idx[srt])
            cells.append(g)
            los.append(lo)
            dims.append(dim)
            starts.append(starts[-1] + len(idx))
        self.band_level = _u8(levels + 1)
        self.band_start = np.asarray(starts, dtype=np.int64)
        self.band_cell = _f64(cells)
        self.band_lo = np.ascontiguousarray(np.asarray(los, dtype=np.int64).reshape(len(levels), self.d))
        self.band_dims = np.ascontiguousarray(np.asarray(dims, dtype=np.int64).reshape(len(levels), self.d))
        self.keys = np.ascontiguousarray(np.concatenate(keys) if keys else np.zeros(0, np.int64), dtype=np.int64)
        self.order = np.ascontiguousarray(np.concatenate(orders) if orders else np.zeros(0, np.int64), dtype=np.int64)
        self.level = _u8(np.asarray(band) + 1)

    def kill_levels(self, pts, cap: int = NEVER, impl=None) -> np.ndarray:
        """Kill level per point considering discs with level ``<= cap``."""
        pts = _f64(np.asarray(pts, dtype=float).reshape(-1, self.d))
        kill = np.full(len(pts), NEVER, dtype=np.uint8)
        if len(self.rad) == 0 or len(pts) == 0:
            return kill
        nb = int(np.searchsorted(self.band_level, min(cap, NEVER - 1), side="right"))
        (impl or _impl).point_kill(
            pts, self.centers, self.rad, self.level, self.band_start[: nb + 1],
            self.band_cell[:nb], self.band_lo[:nb], self.band_dims[:nb], self.keys,
            self.order, self.band_level[:nb], kill,
        )
        return kill

    def candidate_pairs(self, pts, cap: int = NEVER):
        """All (point, disc) index pairs with the point in the closed disc."""
        pts = np.asarray(pts, dtype=float).reshape(-1, self.d)
        offs = _pykernels._neighbour_offsets(self.d)
        pi_all, qi_all = [], []
        for b in range(len(self.band_cell)):
            if self.band_level[b] > cap:
                break
            lo, hi = int(self.band_start[b]), int(self.band_start[b + 1])
            bkeys = self.keys[lo:hi]
            border = self.order[lo:hi]
            dims = self.band_dims[b]
            strides = np.concatenate([[1], np.cumprod(dims[:-1])]).astype(np.int64)
            base = np.floor(pts / self.band_cell[b]).astype(np.int64) - self.band_lo[b]
            for off in offs:
                cc = base + off
                vi = np.flatnonzero(np.all((cc >= 0) & (cc < dims), axis=1))
                if len(vi) == 0:
                    continue
                key = cc[vi] @ strides
                left = np.searchsorted(bkeys, key, side="left")
                cnt = np.searchsorted(bkeys, key, side="right") - left
                tot = int(cnt.sum())
                if tot == 0:
                    continue
                own = np.repeat(np.arange(len(vi)), cnt)
                pos = left[own] + (np.arange(tot) - (np.cumsum(cnt) - cnt)[own])
                q = border[pos]
                p = vi[own]
                diff = pts[p] - self.centers[q]
                ok = np.sum(diff * diff, axis=1) <= self.rad[q] ** 2
                pi_all.append(p[ok])
                qi_all.append(q[ok])
        if not pi_all:
            return np.zeros(0, np.int64), np.zeros(0, np.int64)
        return np.concatenate(pi_all), np.concatenate(qi_all)


def interval_union_length(starts, ends, tol: float = 0.0) -> float:
    """Total length of a union of intervals by sort and sweep.

    Gaps shorter than ``tol`` are closed.
    """
    s = np.asarray(starts, dtype=float)
    e = np.asarray(ends, dtype=float)
    keep = e > s
    s, e = s[keep], e[keep]
    if len(s) == 0:
        return 0.0
    o = np.argsort(s, kind="stable")
    s, e = s[o], e[o]
    reach = np.maximum.accumulate(e)
    prev = np.concatenate([[-np.inf], reach[:-1]])
    gap = s - prev
    contrib = np.maximum(0.0, e - np.maximum(s, prev))
    # a gap below tol is absorbed into the union
    contrib += np.where((gap > 0) & (gap <= tol), gap, 0.0)
    return float(np.sum(contrib))
