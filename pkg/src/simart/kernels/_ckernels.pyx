# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops for disc cutouts.

Kill levels are stored as uint8: a point dies at level ``kill`` (the first
level at which a covering disc is active); 255 means never killed.
"""

from libc.math cimport floor, ceil, sqrt

import numpy as np
cimport numpy as cnp

ctypedef cnp.uint8_t u8


def raster_kill_2d(const double[::1] cx, const double[::1] cy, const double[::1] rad,
                   const u8[::1] level, double x0, double y0, double h,
                   u8[:, ::1] kill):
    """Lower ``kill[j, i]`` to the disc level for every pixel centre in a disc.

    Pixel (j, i) has centre (x0 + (i + 0.5) h, y0 + (j + 0.5) h).
    """
    cdef Py_ssize_t m = cx.shape[0]
    cdef Py_ssize_t ny = kill.shape[0]
    cdef Py_ssize_t nx = kill.shape[1]
    cdef Py_ssize_t q, i, j, i0, i1, j0, j1
    cdef double r, r2, px, py, dx, dy
    cdef u8 lv
    with nogil:
        for q in range(m):
            r = rad[q]
            r2 = r * r
            lv = level[q]
            i0 = <Py_ssize_t> ceil((cx[q] - r - x0) / h - 0.5)
            i1 = <Py_ssize_t> floor((cx[q] + r - x0) / h - 0.5)
            j0 = <Py_ssize_t> ceil((cy[q] - r - y0) / h - 0.5)
            j1 = <Py_ssize_t> floor((cy[q] + r - y0) / h - 0.5)
            if i0 < 0:
                i0 = 0
            if j0 < 0:
                j0 = 0
            if i1 > nx - 1:
                i1 = nx - 1
            if j1 > ny - 1:
                j1 = ny - 1
            for j in range(j0, j1 + 1):
                py = y0 + (j + 0.5) * h
                dy = py - cy[q]
                dy = dy * dy
                if dy > r2:
                    continue
                for i in range(i0, i1 + 1):
                    if kill[j, i] <= lv:
                        continue
                    px = x0 + (i + 0.5) * h
                    dx = px - cx[q]
                    if dx * dx + dy <= r2:
                        kill[j, i] = lv


def segment_kill(const double[::1] p, const double[::1] u, double step,
                 const double[:, ::1] centers, const double[::1] rad,
                 const u8[::1] level, u8[::1] kill):
    """Kill levels at midpoints ``p + (j + 0.5) step u`` of a sampled segment.

    ``u`` must be a unit vector.
    """
    cdef Py_ssize_t m = centers.shape[0]
    cdef Py_ssize_t d = centers.shape[1]
    cdef Py_ssize_t ns = kill.shape[0]
    cdef Py_ssize_t q, a, j, j0, j1
    cdef double tc, q2, r2, half, t, acc, diff, w
    cdef u8 lv
    with nogil:
        for q in range(m):
            r2 = rad[q] * rad[q]
            lv = level[q]
            tc = 0.0
            q2 = 0.0
            for a in range(d):
                w = centers[q, a] - p[a]
                tc = tc + w * u[a]
                q2 = q2 + w * w
            q2 = q2 - tc * tc
            if q2 > r2:
                continue
            if q2 < 0:
                q2 = 0
            half = sqrt(r2 - q2)
            j0 = <Py_ssize_t> ceil((tc - half) / step - 0.5) - 1
            j1 = <Py_ssize_t> floor((tc + half) / step - 0.5) + 1
            if j0 < 0:
                j0 = 0
            if j1 > ns - 1:
                j1 = ns - 1
            for j in range(j0, j1 + 1):
                if kill[j] <= lv:
                    continue
                t = (j + 0.5) * step
                acc = 0.0
                for a in range(d):
                    diff = p[a] + t * u[a] - centers[q, a]
                    acc = acc + diff * diff
                if acc <= r2:
                    kill[j] = lv


cdef inline Py_ssize_t _lower_bound(const cnp.int64_t[::1] keys, Py_ssize_t lo,
                                    Py_ssize_t hi, cnp.int64_t key) noexcept nogil:
    cdef Py_ssize_t mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if keys[mid] < key:
            lo = mid + 1
        else:
            hi = mid
    return lo


def point_kill(const double[:, ::1] pts, const double[:, ::1] centers,
               const double[::1] rad, const u8[::1] level,
               const cnp.int64_t[::1] band_start, const double[::1] band_cell,
               const cnp.int64_t[:, ::1] band_lo, const cnp.int64_t[:, ::1] band_dims,
               const cnp.int64_t[::1] keys, const cnp.int64_t[::1] order,
               const u8[::1] band_level, u8[::1] kill):
    """Kill levels of arbitrary points through per-band spatial hashes.

    Bands are ordered by increasing level, so the first hit is the minimum.
    Band ``b`` owns ``keys[band_start[b]:band_start[b+1]]`` (sorted linear
    cell keys) and ``order`` maps those entries back to disc indices.
    """
    cdef Py_ssize_t npts = pts.shape[0]
    cdef Py_ssize_t d = pts.shape[1]
    cdef Py_ssize_t nb = band_cell.shape[0]
    cdef Py_ssize_t i, b, a, nbr, nnbr, lo, hi, e, q, rem
    cdef cnp.int64_t key, stride, cc, base[3]
    cdef double g, acc, diff, r2
    cdef bint hit, valid
    nnbr = 1
    for a in range(d):
        nnbr = nnbr * 3
    with nogil:
        for i in range(npts):
            hit = False
            for b in range(nb):
                if band_level[b] >= kill[i]:
                    break
                lo = band_start[b]
                hi = band_start[b + 1]
                if lo == hi:
                    continue
                g = band_cell[b]
                for a in range(d):
                    base[a] = <cnp.int64_t> floor(pts[i, a] / g) - band_lo[b, a]
                for nbr in range(nnbr):
                    rem = nbr
                    key = 0
                    stride = 1
                    valid = True
                    for a in range(d):
                        cc = base[a] + (rem % 3) - 1
                        rem = rem // 3
                        if cc < 0 or cc >= band_dims[b, a]:
                            valid = False
                            break
                        key = key + cc * stride
                        stride = stride * band_dims[b, a]
                    if not valid:
                        continue
                    e = _lower_bound(keys, lo, hi, key)
                    while e < hi and keys[e] == key:
                        q = order[e]
                        r2 = rad[q] * rad[q]
                        acc = 0.0
                        for a in range(d):
                            diff = pts[i, a] - centers[q, a]
                            acc = acc + diff * diff
                        if acc <= r2:
                            hit = True
                            break
                        e = e + 1
                    if hit:
                        break
                if hit:
                    kill[i] = band_level[b]
                    break
