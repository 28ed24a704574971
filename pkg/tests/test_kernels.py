import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from simart import kernels
from simart.kernels import NEVER, DiscHash, interval_union_length

IMPLS = kernels.backends()


def random_discs(seed, m, d=2):
    rng = np.random.default_rng(seed)
    band = rng.integers(0, 6, m)
    rad = rng.uniform(0.05, 0.5, m) * 2.0 ** -(band + 1.0)
    centers = rng.uniform(-1, 1, (m, d))
    return centers, rad, band


def brute_kill(pts, centers, rad, level):
    d2 = ((pts[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    hit = d2 <= rad[None, :] ** 2
    lv = np.where(hit, level[None, :].astype(int), NEVER)
    return lv.min(axis=1, initial=NEVER).astype(np.uint8)


def test_backend_names():
    assert kernels.BACKEND in IMPLS
    assert "numpy" in IMPLS


@pytest.mark.parametrize("name", sorted(IMPLS))
@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), m=st.integers(0, 200))
def test_raster_kill_matches_brute_force(name, seed, m):
    centers, rad, band = random_discs(seed, m)
    level = (band + 1).astype(np.uint8)
    N, h = 48, 2.0 / 48
    kill = np.full((N, N), NEVER, dtype=np.uint8)
    kernels.raster_kill_2d(centers[:, 0], centers[:, 1], rad, level, -1.0, -1.0, h, kill,
                           impl=IMPLS[name])
    c = -1.0 + (np.arange(N) + 0.5) * h
    X, Y = np.meshgrid(c, c)
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    assert np.array_equal(kill.ravel(), brute_kill(pts, centers, rad, level))


@pytest.mark.parametrize("name", sorted(IMPLS))
@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), m=st.integers(0, 200), angle=st.floats(0, 6.3))
def test_segment_kill_matches_brute_force(name, seed, m, angle):
    centers, rad, band = random_discs(seed, m)
    level = (band + 1).astype(np.uint8)
    p = np.array([-1.2, 0.1])
    u = np.array([np.cos(angle), np.sin(angle)])
    ns, step = 500, 2.4 / 500
    kill = np.full(ns, NEVER, dtype=np.uint8)
    kernels.segment_kill(p, u, step, centers, rad, level, kill, impl=IMPLS[name])
    pts = p + ((np.arange(ns) + 0.5) * step)[:, None] * u
    assert np.array_equal(kill, brute_kill(pts, centers, rad, level))


@pytest.mark.parametrize("name", sorted(IMPLS))
@pytest.mark.parametrize("d", [1, 2, 3])
@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), m=st.integers(0, 150), cap=st.integers(1, 255))
def test_point_kill_matches_brute_force(name, d, seed, m, cap):
    centers, rad, band = random_discs(seed, m, d)
    level = (band + 1).astype(np.uint8)
    pts = np.random.default_rng(seed + 1).uniform(-1, 1, (300, d))
    got = DiscHash(centers, rad, band).kill_levels(pts, cap, impl=IMPLS[name])
    keep = level <= cap
    assert np.array_equal(got, brute_kill(pts, centers[keep], rad[keep], level[keep]))


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_candidate_pairs(seed):
    centers, rad, band = random_discs(seed, 80)
    pts = np.random.default_rng(seed + 2).uniform(-1, 1, (200, 2))
    p, q = DiscHash(centers, rad, band).candidate_pairs(pts)
    got = set(zip(p.tolist(), q.tolist()))
    d2 = ((pts[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    want = set(zip(*np.nonzero(d2 <= rad[None, :] ** 2)))
    assert got == {(int(a), int(b)) for a, b in want}


class TestIntervalUnion:
    def test_overlaps(self):
        assert interval_union_length([0, 0.5, 2], [1, 1.5, 3]) == pytest.approx(2.5)

    def test_small_gaps_closed(self):
        assert interval_union_length([0, 1.01], [1, 2], tol=0.05) == pytest.approx(2.0)
        assert interval_union_length([0, 1.01], [1, 2]) == pytest.approx(1.99)

    def test_empty(self):
        assert interval_union_length([], []) == 0.0
        assert interval_union_length([1.0], [0.5]) == 0.0

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.tuples(st.floats(0, 10), st.floats(0, 3)), max_size=30))
    def test_against_grid(self, ivs):
        s = np.array([a for a, _ in ivs])
        e = np.array([a + b for a, b in ivs])
        x = (np.arange(130_000) + 0.5) * 1e-4
        covered = np.zeros_like(x, dtype=bool)
        for a, b in zip(s, e):
            covered |= (x >= a) & (x < b)
        assert interval_union_length(s, e) == pytest.approx(covered.sum() * 1e-4, abs=1e-4 * (2 * len(ivs) + 1))


def test_pure_python_switch():
    import os
    import subprocess
    import sys
    env = dict(os.environ, SIMART_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from simart import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
