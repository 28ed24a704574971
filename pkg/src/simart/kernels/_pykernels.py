"""Numpy implementations of the disc kernels (fallback and reference)."""

from __future__ import annotations

import numpy as np

_CHUNK = 1 << 22


def raster_kill_2d(cx, cy, rad, level, x0, y0, h, kill):
    """Lower ``kill[j, i]`` to the disc level for every pixel centre in a disc.

    Discs are grouped by their pixel bounding-box size so that each group is
    processed with one offset stencil.
    """
    cx = np.asarray(cx, dtype=float)
    cy = np.asarray(cy, dtype=float)
    rad = np.asarray(rad, dtype=float)
    level = np.asarray(level, dtype=np.uint8)
    ny, nx = kill.shape
    if len(cx) == 0:
        return
    i0 = np.ceil((cx - rad - x0) / h - 0.5).astype(np.int64)
    i1 = np.floor((cx + rad - x0) / h - 0.5).astype(np.int64)
    j0 = np.ceil((cy - rad - y0) / h - 0.5).astype(np.int64)
    j1 = np.floor((cy + rad - y0) / h - 0.5).astype(np.int64)
    width = np.maximum(i1 - i0 + 1, 0)
    height = np.maximum(j1 - j0 + 1, 0)
    span = np.maximum(width, height)
    flat = kill.reshape(-1)
    for w in np.unique(span[span > 0]):
        sel = np.flatnonzero(span == w)
        oj, oi = np.meshgrid(np.arange(w), np.arange(w), indexing="ij")
        oj = oj.reshape(-1)
        oi = oi.reshape(-1)
        per = max(1, _CHUNK // (w * w))
        for s in range(0, len(sel), per):
            q = sel[s:s + per]
            jj = j0[q, None] + oj[None, :]
            ii = i0[q, None] + oi[None, :]
            px = x0 + (ii + 0.5) * h
            py = y0 + (jj + 0.5) * h
            dx = px - cx[q, None]
            dy = py - cy[q, None]
            ok = (dx * dx + dy * dy <= (rad[q] ** 2)[:, None])
            ok &= (ii >= 0) & (ii < nx) & (jj >= 0) & (jj < ny)
            lin = (jj * nx + ii)[ok]
            lv = np.broadcast_to(level[q, None], ok.shape)[ok]
            np.minimum.at(flat, lin, lv)


def segment_kill(p, u, step, centers, rad, level, kill):
    """Kill levels at midpoints ``p + (j + 0.5) step u`` of a sampled segment."""
    p = np.asarray(p, dtype=float)
    u = np.asarray(u, dtype=float)
    centers = np.asarray(centers, dtype=float)
    rad = np.asarray(rad, dtype=float)
    level = np.asarray(level, dtype=np.uint8)
    ns = kill.shape[0]
    if len(rad) == 0:
        return
    w = centers - p
    tc = w @ u
    q2 = np.sum(w * w, axis=1) - tc * tc
    hitline = q2 <= rad * rad
    tc, q2, rad_h, lv_h, cen = tc[hitline], np.maximum(q2[hitline], 0), rad[hitline], level[hitline], centers[hitline]
    half = np.sqrt(rad_h * rad_h - q2)
    j0 = np.maximum(np.ceil((tc - half) / step - 0.5).astype(np.int64) - 1, 0)
    j1 = np.minimum(np.floor((tc + half) / step - 0.5).astype(np.int64) + 1, ns - 1)
    cnt = np.maximum(j1 - j0 + 1, 0)
    total = int(cnt.sum())
    if total == 0:
        return
    owner = np.repeat(np.arange(len(cnt)), cnt)
    start = np.cumsum(cnt) - cnt
    j = j0[owner] + (np.arange(total) - start[owner])
    t = (j + 0.5) * step
    pts = p[None, :] + t[:, None] * u[None, :]
    diff = pts - cen[owner]
    ok = np.sum(diff * diff, axis=1) <= rad_h[owner] ** 2
    np.minimum.at(kill, j[ok], lv_h[owner][ok])


def _neighbour_offsets(d):
    grids = np.meshgrid(*([np.arange(3) - 1] * d), indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=1)


def point_kill(pts, centers, rad, level, band_start, band_cell, band_lo, band_dims,
               keys, order, band_level, kill):
    """Kill levels of points through per-band spatial hashes (see compiled version)."""
    pts = np.asarray(pts, dtype=float)
    npts, d = pts.shape
    offs = _neighbour_offsets(d)
    for b in range(len(band_cell)):
        lo, hi = int(band_start[b]), int(band_start[b + 1])
        if lo == hi:
            continue
        lv = np.uint8(band_level[b])
        todo = np.flatnonzero(kill > lv)
        if len(todo) == 0:
            continue
        bkeys = keys[lo:hi]
        border = order[lo:hi]
        g = band_cell[b]
        base = np.floor(pts[todo] / g).astype(np.int64) - band_lo[b]
        dims = band_dims[b]
        strides = np.concatenate([[1], np.cumprod(dims[:-1])]).astype(np.int64)
        hit = np.zeros(len(todo), dtype=bool)
        for off in offs:
            cc = base + off
            valid = np.all((cc >= 0) & (cc < dims), axis=1) & ~hit
            if not valid.any():
                continue
            vi = np.flatnonzero(valid)
            key = cc[vi] @ strides
            left = np.searchsorted(bkeys, key, side="left")
            right = np.searchsorted(bkeys, key, side="right")
            cnt = right - left
            # walk the r-th entry of every bucket simultaneously
            r = 0
            while True:
                act = np.flatnonzero(cnt > r)
                if len(act) == 0:
                    break
                q = border[left[act] + r]
                diff = pts[todo[vi[act]]] - centers[q]
                ok = np.sum(diff * diff, axis=1) <= rad[q] ** 2
                hit[vi[act[ok]]] = True
                r += 1
        kill[todo[hit]] = lv
