import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from simart.analysis import (CellField, box_dimension, convolve, correlation_dimension,
                             fourier_coefficient, fourier_dimension_estimate,
                             increment_tail_audit, sumset_interior)
from simart.core import SeedPath, ValidationError
from simart.families import PlaneParam
from simart.models import ModelSpec
from simart.subdivision import SalemLineSpec, generate_percolation, generate_salem_line


def cantor_mask(level_bits=16, ternary_depth=10):
    """Dyadic cells of side 2**-level_bits meeting the ternary Cantor construction."""
    lows = np.array([0.0])
    for j in range(1, ternary_depth + 1):
        lows = np.concatenate([lows, lows + 2 * 3.0**-j])
    highs = lows + 3.0**-ternary_depth
    N = 2**level_bits
    mask = np.zeros(N, dtype=bool)
    first = np.floor(lows * N).astype(int)
    last = np.ceil(highs * N).astype(int) - 1
    for a, b in zip(first, last):
        mask[a:b + 1] = True
    return mask


def three_quadrant_mask(levels=8):
    """Keep three of the four quadrants at every scale: an equal-mass monofractal."""
    m = np.ones((1, 1), dtype=bool)
    for _ in range(levels):
        z = np.zeros_like(m)
        m = np.block([[m, m], [m, z]])
    return m


class TestBoxDimension:
    def test_full_square(self):
        fit = box_dimension(np.ones((256, 256), dtype=bool))
        assert fit.slope == pytest.approx(2.0, abs=0.01)

    def test_cantor(self):
        # ten construction levels on the first dyadic grid finer than 3**-10
        assert 2.0**-16 < 3.0**-10 < 2.0**-15
        fit = box_dimension(cantor_mask())
        assert fit.slope == pytest.approx(0.63, abs=0.05)

    def test_counts_from_tree(self):
        tree = generate_percolation(2, 1.0, 6, SeedPath(0))
        assert box_dimension(tree).slope == pytest.approx(2.0, abs=1e-12)

    def test_too_few_levels(self):
        with pytest.raises(ValidationError):
            box_dimension(np.ones((4, 4), dtype=bool))


class TestCorrelationDimension:
    def test_lebesgue(self):
        masses = [np.full(2**n, 2.0**-n) for n in range(12)]
        assert correlation_dimension(masses).slope == pytest.approx(1.0, abs=1e-12)

    def test_salem_line(self):
        tree = generate_salem_line(0.6, 16, SeedPath(1))
        fit = correlation_dimension(tree)
        assert fit.slope == pytest.approx(0.6, abs=0.05)
        P = SalemLineSpec(0.6, 16).products
        assert np.allclose(fit.values, [math.log2(P[n]) for n in range(17)], atol=1e-12)

    def test_point_mass(self):
        assert correlation_dimension([np.array([1.0])] * 8).slope == pytest.approx(0.0, abs=1e-15)

    def test_agrees_with_box_on_monofractal(self):
        mask = three_quadrant_mask(8)
        box = box_dimension(mask).slope
        masses = []
        for j in range(9):
            b = 2 ** (8 - j)
            blocks = mask.reshape(2**j, b, 2**j, b).sum(axis=(1, 3)).ravel()
            masses.append(blocks[blocks > 0].astype(float))
        corr = correlation_dimension(masses).slope
        assert box == pytest.approx(math.log2(3), abs=1e-12)
        assert abs(box - corr) <= 0.1


class TestFourier:
    def test_zero_frequency_is_mass(self):
        tree = generate_percolation(2, 0.7, 6, SeedPath(2))
        f = CellField.from_tree(tree, 6)
        assert fourier_coefficient(f, [0, 0]).real == tree.total_mass(6)
        assert fourier_coefficient(CellField.from_raster(np.ones(64)), 0) == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("k", [1, 2, 5, 17])
    def test_lebesgue_integer_frequencies_vanish(self, k):
        assert abs(fourier_coefficient(CellField.from_raster(np.ones(64)), k)) <= 1e-14

    def test_half_interval(self):
        f = CellField([0.0], 0.5, np.array([2.0, 0.0]))
        assert abs(fourier_coefficient(f, 1)) == pytest.approx(2 / math.pi, abs=1e-15)
        assert 2 / math.pi == pytest.approx(0.6366198, abs=1e-7)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32), st.floats(-40, 40), st.floats(-40, 40))
    def test_conjugate_symmetry(self, seed, k1, k2):
        f = CellField.from_raster(np.random.default_rng(seed).uniform(0, 2, (8, 8)))
        a = fourier_coefficient(f, [k1, k2])
        b = fourier_coefficient(f, [-k1, -k2])
        assert abs(a - b.conjugate()) <= 1e-12

    def test_parseval(self):
        # the band |k| < M N misses at most 2 / (pi**2 (M - 1)) of the L2 mass
        N, M = 16, 64
        vals = np.random.default_rng(3).uniform(0, 1, N)
        f = CellField.from_raster(vals)
        l2 = float(np.sum(vals**2)) / N
        ks = np.arange(-M * N + 1, M * N)
        energy = math.fsum(abs(fourier_coefficient(f, k)) ** 2 for k in ks)
        assert 0 <= l2 - energy <= 2 / (math.pi**2 * (M - 1)) * l2

    def test_lebesgue_has_no_integer_peaks(self):
        tree = generate_percolation(1, 1.0, 10, SeedPath(0))
        rep = fourier_dimension_estimate(tree, 10, 256)
        assert max(rep.peaks) <= 1e-12
        assert rep.zero_mode == pytest.approx(1.0, abs=1e-15)

    def test_lebesgue_half_integer_probes(self):
        # |int_0^1 e(-(k + 1/2) x) dx| = 1 / (pi (k + 1/2)) so peaks decay like 2**-m
        tree = generate_percolation(1, 1.0, 10, SeedPath(0))
        rep = fourier_dimension_estimate(tree, 10, 256, probe="half-integer")
        assert rep.sigma == pytest.approx(1.0, abs=0.05)

    def test_salem_peaks_decay(self):
        rep = fourier_dimension_estimate(generate_salem_line(0.6, 12, SeedPath(4)), 12, 1024)
        assert rep.sigma > 0
        assert rep.fit_window == (4, 8)

    def test_null_control(self):
        # critical d = 1 percolation: d - alpha = 0, so 2 sigma is only required to be >= 0
        ests = []
        r = 0
        while len(ests) < 5:
            tree = generate_percolation(1, 0.5, 14, SeedPath(5, (r,)))
            r += 1
            if tree.cell_count(14):
                ests.append(fourier_dimension_estimate(tree, 14, 2048).dimension_estimate)
        assert np.median(ests) >= 0.8 * 0.0

    def test_k_max_checks(self):
        tree = generate_percolation(1, 1.0, 6, SeedPath(0))
        with pytest.raises(ValidationError):
            fourier_dimension_estimate(tree, 6, 48)


def unit_interval(N=256):
    return CellField([0.0], 1.0 / N, np.ones(N))


class TestConvolve:
    def test_tent(self):
        res = 1024
        g = convolve(unit_interval(), unit_interval(), resolution=res)
        x = g.nodes(0)
        tent = np.maximum(0.0, 1 - np.abs(x - 1))
        assert np.max(np.abs(g.values - tent)) <= 2 / res
        assert np.interp(1.0, x, g.values) == pytest.approx(1.0, abs=2 / res)

    def test_mass_law(self):
        tree = generate_percolation(1, 0.8, 10, SeedPath(6))
        other = generate_percolation(1, 0.8, 10, SeedPath(7))
        g = convolve(tree, other, n=10, resolution=1024)
        assert g.mass == pytest.approx(tree.total_mass(10) * other.total_mass(10), abs=1e-9)

    def test_scaled_pushforward_keeps_mass(self):
        g = convolve(unit_interval(), unit_interval(), S=[[-2.0]], resolution=512)
        assert g.mass == pytest.approx(1.0, abs=1e-9)
        assert g.support_box()[0][0] == pytest.approx(-2.0, abs=2 * g.h)

    def test_two_dimensional_mass_law(self):
        a = np.random.default_rng(8).uniform(0, 1, (16, 16))
        b = np.random.default_rng(9).uniform(0, 1, (16, 16))
        S = [[0.6, 0.3], [-0.2, 0.9]]
        g = convolve(a, b, S=S, resolution=64)
        fa, fb = CellField.from_raster(a), CellField.from_raster(b)
        assert g.mass == pytest.approx(fa.mass * fb.mass, abs=1e-9)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32), st.floats(0.1, 3), st.floats(0.1, 3))
    def test_bilinear(self, seed, a, b):
        rng = np.random.default_rng(seed)
        A, B, C = (rng.uniform(0, 1, 32) for _ in range(3))
        lhs = convolve(a * A + b * B, C, resolution=64).values
        rhs = a * convolve(A, C, resolution=64).values + b * convolve(B, C, resolution=64).values
        assert np.max(np.abs(lhs - rhs)) <= 1e-9

    def test_singular_matrix(self):
        with pytest.raises(ValidationError):
            convolve(np.ones((4, 4)), np.ones((4, 4)), S=[[1, 2], [2, 4]], resolution=8)

    def test_excluded_matrix_flag(self):
        g = convolve(unit_interval(), unit_interval(), S=[[-1.0]], resolution=64,
                     same_realization=True)
        assert "excluded-S" in g.flags
        g = convolve(unit_interval(), unit_interval(), S=[[1.0]], resolution=64,
                     same_realization=True)
        assert "excluded-S" not in g.flags

    def test_resolution_power_of_two(self):
        with pytest.raises(ValidationError):
            convolve(unit_interval(), unit_interval(), resolution=100)


class TestSumset:
    def test_tent_half_threshold(self):
        g = convolve(unit_interval(), unit_interval(), resolution=1024)
        rep = sumset_interior(g, 0.5)
        assert not rep.empty
        assert rep.low[0] == pytest.approx(0.5, abs=g.h)
        assert rep.high[0] == pytest.approx(1.5, abs=g.h)

    def test_zero_grid(self):
        g = convolve(np.zeros(16), np.ones(16), resolution=16)
        assert sumset_interior(g).empty

    def test_coarse_confirmation(self):
        g = convolve(unit_interval(), unit_interval(), resolution=1024)
        c = convolve(unit_interval(64), unit_interval(64), resolution=256)
        rep = sumset_interior(g, 0.5, c, min_coarse_cells=4)
        assert rep.low[0] == pytest.approx(0.5, abs=c.h) and rep.high[0] == pytest.approx(1.5, abs=c.h)


class TestTailAudit:
    def test_full_square_has_no_increments(self):
        model = ModelSpec("percolation", 2, {"p": 1.0})
        rep = increment_tail_audit(model, PlaneParam.line([0.5, 0.5], [1, 1]), 4,
                                   [0.1, 0.5, 1.0], 20, SeedPath(1))
        assert rep.table["count"] == [0, 0, 0]

    def test_frequencies_non_increasing(self):
        model = ModelSpec("ball-cutout", 2, {"alpha": 0.5})
        rep = increment_tail_audit(model, PlaneParam.line([0, 0], [1, 0]), 4,
                                   [1.0, 0.05, 0.25, 0.5], 200, SeedPath(2))
        f = np.array(rep.table["frequency"])
        assert rep.table["kappa"] == sorted(rep.table["kappa"])
        assert np.all(np.diff(f) <= 0)
        assert "not-monotone" not in rep.flags

    def test_requires_limit_regime(self):
        model = ModelSpec("percolation", 2, {"p": 0.3})
        with pytest.raises(ValidationError):
            increment_tail_audit(model, PlaneParam.line([0.5, 0.5], [1, 0]), 3, [1.0], 5)
