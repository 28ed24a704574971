import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from simart.core import ResourceError, SeedPath, UnsupportedShapeError, ValidationError, snowflake_area
from simart.cutout import (CutoutRealization, Domain, IntensitySpec, alpha_of_intensity,
                           band_counts, band_means, inner_approximation, inner_margin,
                           raster_kill_levels, sample_cutouts, pixel_centers)
from simart.models import ModelSpec, realize

UNIT_BALL = Domain("ball", 2, 1.0)


def ball_spec(alpha, d=2):
    return IntensitySpec((("ball", alpha / alpha_of_intensity(IntensitySpec((("ball", 1.0),)), d)),))


class TestAlpha:
    def test_unit_ball_atom(self):
        assert alpha_of_intensity(IntensitySpec((("ball", 1.0),)), 2) == pytest.approx(math.pi / 4, rel=1e-15)

    def test_empty_atoms(self):
        for d in (1, 2, 3):
            assert alpha_of_intensity(IntensitySpec(()), d) == 0.0

    def test_snowflake_atom_matches_rasterized_area(self):
        # exact polygon area; the rasterized cross-check lives in the core tests
        a = alpha_of_intensity(IntensitySpec((("snowflake", 1.0),), snowflake_depth=12), 2)
        assert a == pytest.approx(snowflake_area(12), rel=1e-15)
        assert a == pytest.approx(3 * math.sqrt(3) / 10, rel=1e-4)

    def test_one_and_three_dimensional_balls(self):
        assert alpha_of_intensity(IntensitySpec((("ball", 2.0),)), 1) == pytest.approx(2.0)
        assert alpha_of_intensity(IntensitySpec((("ball", 1.0),)), 3) == pytest.approx(math.pi / 6)

    def test_unknown_shape_rejected(self):
        with pytest.raises(UnsupportedShapeError):
            IntensitySpec((("square", 1.0),))

    def test_snowflake_outside_plane_rejected(self):
        with pytest.raises(UnsupportedShapeError):
            alpha_of_intensity(IntensitySpec((("snowflake", 1.0),)), 3)


class TestSampling:
    def test_zero_weights_give_no_cutouts(self):
        real = sample_cutouts(IntensitySpec((("ball", 0.0),)), UNIT_BALL, 6, SeedPath(1))
        assert len(real) == 0
        pts = np.array([[0.1, 0.2], [-0.5, 0.5]])
        for n in range(7):
            assert np.all(real.density(pts, n) == 1.0)

    def test_scales_lie_in_bands(self):
        real = sample_cutouts(ball_spec(0.5), UNIT_BALL, 7, SeedPath(2))
        assert np.all(real.scales >= 2.0**-7) and np.all(real.scales < 1.0)
        assert np.all((real.scales >= 2.0 ** -(real.bands + 1)) & (real.scales < 2.0 ** -real.bands))

    def test_kept_shapes_reach_the_domain(self):
        real = sample_cutouts(ball_spec(0.5), UNIT_BALL, 6, SeedPath(3))
        dist = np.linalg.norm(real.centers, axis=1)
        assert np.all(dist <= 1.0 + real.radii + 1e-12)

    def test_band_means_closed_form(self):
        spec = ball_spec(0.5)
        r = spec.total_weight
        means = band_means(spec, UNIT_BALL, 6)
        for k in range(6):
            # centres within 1 + s/2 of the origin, intensity r s**-3 dc ds
            val, _ = integrate.quad(lambda s: r * s**-3 * math.pi * (1 + s / 2) ** 2,
                                    2.0 ** -(k + 1), 2.0**-k, epsabs=0, epsrel=1e-13)
            assert means[k] == pytest.approx(val, rel=1e-11)

    def test_band_counts_match_means(self):
        spec = ball_spec(0.5)
        reps = 10_000
        depth = 3
        counts = np.array([band_counts(spec, UNIT_BALL, depth, SeedPath(4, (r,))) for r in range(reps)])
        means = band_means(spec, UNIT_BALL, depth)
        se = np.sqrt(means / reps)
        assert np.all(np.abs(counts.mean(axis=0) - means) <= 3 * se)

    def test_scale_invariance_of_band_intensity(self):
        # with the domain boundary term removed the band means scale by 2**d
        spec = ball_spec(0.5)
        r = spec.total_weight
        ratios = []
        for k in range(4):
            lam = [integrate.quad(lambda s: r * s**-3, 2.0 ** -(j + 1), 2.0**-j)[0] for j in (k, k + 1)]
            ratios.append(lam[1] / lam[0])
        assert np.allclose(ratios, 4.0, rtol=1e-12)
        means = band_means(spec, UNIT_BALL, 12)
        assert means[11] / means[10] == pytest.approx(4.0, rel=1e-3)

    def test_count_cap(self):
        with pytest.raises(ResourceError):
            sample_cutouts(ball_spec(0.5), UNIT_BALL, 20, SeedPath(1), count_cap=1e4)

    def test_depth_must_be_positive(self):
        with pytest.raises(ValidationError):
            sample_cutouts(ball_spec(0.5), UNIT_BALL, 0, SeedPath(1))

    def test_same_seed_same_realization(self):
        a = sample_cutouts(ball_spec(0.5), UNIT_BALL, 6, SeedPath(5))
        b = sample_cutouts(ball_spec(0.5), UNIT_BALL, 6, SeedPath(5))
        assert a.to_json() == b.to_json()

    def test_json_round_trip(self):
        model = ModelSpec("snowflake-cutout", 2, {"alpha": 0.4, "rotated": True})
        real = realize(model, SeedPath(6), 5)
        back = CutoutRealization.from_json(real.to_json())
        assert back.to_json() == real.to_json()
        pts = np.random.default_rng(0).uniform(-0.5, 0.5, (500, 2))
        assert np.array_equal(back.density(pts, 5), real.density(pts, 5))

    def test_windowed_sample_agrees_inside_window(self):
        # a windowed sample is a different draw, but its law at a point is the same;
        # here check the window bookkeeping: densities outside are undefined
        real = sample_cutouts(ball_spec(0.5), UNIT_BALL, 6, SeedPath(7), ([0.0, 0.0], [0.1, 0.1]))
        assert np.isnan(real.density([[0.5, 0.5]], 3)[0])
        assert np.isfinite(real.density([[0.05, 0.05]], 3)[0])

    def test_survival_law_small(self):
        # interior point, 4000 replicates, every level within 3 binomial SE
        spec = ball_spec(0.5)
        x = np.array([[0.3, -0.2]])
        reps, depth = 4000, 6
        alive = np.zeros(depth)
        for r in range(reps):
            real = sample_cutouts(spec, UNIT_BALL, depth, SeedPath(8, (r,)), (x[0], x[0]))
            alive += real.kill_levels(x)[0] > np.arange(1, depth + 1)
        p = 2.0 ** (-0.5 * np.arange(1, depth + 1))
        assert np.all(np.abs(alive / reps - p) <= 3 * np.sqrt(p * (1 - p) / reps))


class TestDensity:
    def test_outside_domain_is_zero(self):
        real = sample_cutouts(ball_spec(0.5), UNIT_BALL, 4, SeedPath(1))
        assert real.density([[1.5, 0.0]], 0)[0] == 0.0
        assert real.density([[1.5, 0.0]], 4)[0] == 0.0

    def test_alpha_zero_empty_list_is_one(self):
        real = sample_cutouts(IntensitySpec(()), UNIT_BALL, 5, SeedPath(1))
        assert real.alpha == 0.0
        assert np.all(real.density([[0.2, 0.2]], 5) == 1.0)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32), st.sampled_from(["ball-cutout", "snowflake-cutout"]))
    def test_next_level_is_zero_or_growth(self, seed, kind):
        model = ModelSpec(kind, 2, {"alpha": 0.6})
        real = realize(model, SeedPath(seed), 6)
        pts = np.random.default_rng(seed).uniform(-0.6, 0.6, (300, 2))
        C = 2.0**real.alpha
        for n in range(6):
            a, b = real.density(pts, n), real.density(pts, n + 1)
            ok = (b == 0) | np.isclose(b, C * a, rtol=1e-15, atol=0)
            assert np.all(ok)
            assert np.all(b[a == 0] == 0)  # support monotone

    def test_evaluator_levels(self):
        real = sample_cutouts(ball_spec(0.5), UNIT_BALL, 4, SeedPath(1))
        ev = real.evaluator(level=2)
        assert ev([0.0, 0.0]) == real.density([[0.0, 0.0]], 2)[0]
        with pytest.raises(ValidationError):
            ev([0.0, 0.0], 5)

    def test_streamed_raster_matches_sampled_realization(self):
        spec = ball_spec(0.5)
        seed = SeedPath(9)
        kill = raster_kill_levels(spec, UNIT_BALL, 6, seed, 128)
        real = sample_cutouts(spec, UNIT_BALL, 6, seed)
        direct = real.kill_levels(pixel_centers(UNIT_BALL, 128)).reshape(128, 128)
        assert np.array_equal(kill, direct)

    def test_streamed_raster_rejects_snowflakes(self):
        spec = IntensitySpec((("snowflake", 1.0),))
        with pytest.raises(UnsupportedShapeError):
            raster_kill_levels(spec, Domain("snowflake", 2, 1.0), 4, SeedPath(1), 64)


@pytest.mark.parametrize("kind,params", [("ball-cutout", {"alpha": 0.5}),
                                         ("snowflake-cutout", {"alpha": 0.5, "rotated": True})])
def test_stacked_levels_match_per_level_density(kind, params):
    real = realize(ModelSpec(kind, 2, params), SeedPath(21), 6)
    pts = np.random.default_rng(21).uniform(-0.7, 0.7, (400, 2))
    stacked = real.density_levels(pts)
    assert stacked.shape == (7, 400)
    assert np.array_equal(stacked, np.stack([real.density(pts, n) for n in range(7)]))


class TestInnerApproximation:
    def test_rho_zero_is_identity(self):
        real = sample_cutouts(ball_spec(0.5), UNIT_BALL, 5, SeedPath(1))
        same = inner_approximation(real, 0.0)
        assert same.to_json() == real.to_json()
        assert same.alpha == real.alpha

    def test_rho_019(self):
        real = sample_cutouts(ball_spec(0.5), UNIT_BALL, 5, SeedPath(1))
        shrunk = inner_approximation(real, 0.19)
        assert np.allclose(shrunk.radii, 0.9 * real.radii, rtol=1e-15)
        assert shrunk.alpha == pytest.approx(0.81 * real.alpha, rel=1e-14)
        assert alpha_of_intensity(shrunk.spec, 2) == pytest.approx(0.81 * 0.5, rel=1e-14)

    def test_containment_of_neighbourhood(self):
        # a point removed from the shrunk set at level n has its whole
        # beta 2**-n ball inside one original cutout of level <= n
        real = sample_cutouts(ball_spec(0.6), UNIT_BALL, 7, SeedPath(11))
        rho = 0.3
        shrunk = inner_approximation(real, rho)
        beta = inner_margin(rho, 2)
        pts = np.random.default_rng(1).uniform(-1, 1, (1000, 2))
        pts = pts[np.linalg.norm(pts, axis=1) <= 1]
        for n in (2, 4, 7):
            dead = shrunk.density(pts, n) == 0
            for x in pts[dead]:
                dist = np.linalg.norm(shrunk.centers - x, axis=1)
                hit = (dist <= shrunk.radii) & (shrunk.bands + 1 <= n)
                assert hit.any()
                assert np.any(dist[hit] + beta * 2.0**-n <= real.radii[hit] + 1e-12)

    def test_snowflakes_unsupported(self):
        real = realize(ModelSpec("snowflake-cutout", 2, {"alpha": 0.3}), SeedPath(1), 3)
        with pytest.raises(UnsupportedShapeError):
            inner_approximation(real, 0.1)
