import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from simart.core import CurveSingularityError, ValidationError
from simart.families import (CurveParam, IFSParam, PlaneParam, curve_distance, family_from_dict,
                             frostman_exponent, plane_metric, similarity_dimension, trace_curve)

CANTOR = IFSParam((1 / 3, 1 / 3), (0.0, 0.0), [[0.0], [2 / 3]])

# graded-lex coefficients [1, x, y, x^2, xy, y^2]
CIRCLE_HALF = (-0.25, 0, 0, 1, 0, 1)
X_AXIS = (0, 0, 1)
PARABOLA = (0, 0, 1, -1, 0, 0)  # y - x^2


class TestSimilarityDimension:
    def test_halves(self):
        assert similarity_dimension([0.5, 0.5]) == pytest.approx(1.0, abs=1e-12)

    def test_thirds(self):
        s = similarity_dimension([1 / 3, 1 / 3])
        assert s == pytest.approx(math.log(2) / math.log(3), abs=1e-12)
        assert s == pytest.approx(0.6309298, abs=1e-7)

    def test_golden_ratio_root(self):
        s = similarity_dimension([0.5, 0.25])
        assert s == pytest.approx(math.log2((1 + math.sqrt(5)) / 2), abs=1e-12)
        assert s == pytest.approx(0.6942419, abs=1e-7)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(0.01, 0.95), min_size=2, max_size=8))
    def test_residual(self, ratios):
        s = similarity_dimension(ratios)
        assert abs(math.fsum(r**s for r in ratios) - 1.0) <= 1e-12

    def test_single_map_warns(self):
        with pytest.warns(RuntimeWarning):
            assert similarity_dimension([0.4]) == 0.0

    def test_bad_ratio(self):
        with pytest.raises(ValidationError):
            similarity_dimension([0.5, 1.0])


class TestPlanes:
    def test_basis_must_be_orthonormal(self):
        with pytest.raises(ValidationError):
            PlaneParam([0, 0], [[1.0, 0.1]])
        with pytest.raises(ValidationError):
            PlaneParam([0, 0], [[1, 0], [0, 1]])

    def test_frostman(self):
        V = PlaneParam([0, 0, 0], [[1, 0, 0], [0, 1, 0]])
        C, s = V.frostman
        assert s == 2.0 and C == pytest.approx(math.pi)

    def test_identical_planes(self):
        V = PlaneParam.line([0.3, 0.1], [1, 2])
        assert plane_metric(V, V) == 0.0

    @pytest.mark.parametrize("theta", [0.1, 0.7, math.pi / 3, math.pi / 2])
    def test_angle(self, theta):
        V = PlaneParam.line([0, 0], [1, 0])
        W = PlaneParam.line([0, 0], [math.cos(theta), math.sin(theta)])
        assert plane_metric(V, W) == pytest.approx(abs(math.sin(theta)), abs=1e-12)

    def test_parallel_offset(self):
        h = 0.37
        assert plane_metric(PlaneParam.line([0, 0], [1, 0]),
                            PlaneParam.line([5, h], [1, 0])) == pytest.approx(h, abs=1e-15)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(-1, 1), min_size=12, max_size=12))
    def test_metric_axioms(self, c):
        def line(i):
            u = np.array(c[i + 2:i + 4])
            if np.linalg.norm(u) < 1e-3:
                u = np.array([1.0, 0.0])
            return PlaneParam.line(c[i:i + 2], u)
        A, B, C = line(0), line(4), line(8)
        assert plane_metric(A, B) == pytest.approx(plane_metric(B, A), abs=1e-12)
        assert plane_metric(A, C) <= plane_metric(A, B) + plane_metric(B, C) + 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError):
            plane_metric(PlaneParam.line([0, 0], [1, 0]), PlaneParam.line([0, 0, 0], [1, 0, 0]))


class TestTraceCurve:
    def test_circle(self):
        tr = trace_curve(CurveParam(CIRCLE_HALF), step=1e-3)
        assert tr.length == pytest.approx(math.pi, abs=1e-3)
        assert np.allclose(np.hypot(*tr.points.T), 0.5, atol=1e-12)

    def test_x_axis_chord(self):
        tr = trace_curve(CurveParam(X_AXIS), step=1e-3)
        assert tr.length == pytest.approx(2.0, abs=1e-3)

    def test_parabola_arclength(self):
        exact = math.sqrt(5) + math.asinh(2) / 2
        assert exact == pytest.approx(2.9578857, abs=1e-7)
        tr = trace_curve(CurveParam(PARABOLA, clip_box=((-1, -1), (1, 2))), step=1e-3)
        assert tr.length == pytest.approx(exact, abs=1e-3)

    def test_step_controls_spacing(self):
        tr = trace_curve(CurveParam(CIRCLE_HALF), step=1e-2)
        a, b = tr.segments()
        gaps = np.linalg.norm(b - a, axis=1)
        assert np.all(gaps <= 2e-2)
        # the closing segment of a loop may be shorter
        assert np.all(gaps[:-1] >= 0.5e-2)

    def test_no_crossing_is_empty(self):
        tr = trace_curve(CurveParam((1, 0, 0, 1, 0, 1)))  # x^2 + y^2 + 1 > 0
        assert len(tr) == 0 and tr.length == 0.0

    def test_singular_point_reported(self):
        # x^2 - y^2 has a node at the origin
        with pytest.raises(CurveSingularityError) as err:
            trace_curve(CurveParam((0, 0, 0, 1, 0, -1)), step=1e-3)
        assert np.linalg.norm(err.value.point) < 1e-2

    def test_coefficient_count(self):
        with pytest.raises(ValidationError):
            CurveParam((1, 2))


class TestCurveDistance:
    def test_identical(self):
        V = CurveParam(CIRCLE_HALF)
        assert curve_distance(V, V) <= 1e-9

    @pytest.mark.parametrize("h", [0.01, 0.05])
    def test_parallel_chords(self, h):
        box = ((-1.0, -1.0), (1.0, 1.0))
        V = CurveParam(X_AXIS, clip_box=box)
        W = CurveParam((-h, 0, 1), clip_box=box)
        support = CurveParam((1.0,), clip_radius=10.0)
        assert curve_distance(V, W, support=support) == pytest.approx(2 * h, rel=0.05)

    def test_monotone_in_dictionary(self):
        V = CurveParam(CIRCLE_HALF)
        W = CurveParam((-1 / 16, 0, 0, 1, 0, 1))
        d = [curve_distance(V, W, probe_functions=m, step=5e-3) for m in (1, 8, 32, 64)]
        assert all(a <= b + 1e-15 for a, b in zip(d, d[1:]))
        assert d[0] > 0


class TestSelfSimilar:
    def test_natural_probabilities(self):
        F = IFSParam((0.5, 0.25), (0.0, 0.0), [[0.0], [0.75]])
        assert F.natural
        assert F.probs[0] == pytest.approx(0.5**F.sim_dim, abs=1e-15)
        assert math.fsum(F.probs) == pytest.approx(1.0, abs=1e-12)
        assert frostman_exponent(F) == F.sim_dim

    def test_cantor(self):
        assert CANTOR.sim_dim == pytest.approx(math.log(2) / math.log(3), abs=1e-12)
        assert CANTOR.probs == pytest.approx((0.5, 0.5), abs=1e-12)
        assert CANTOR.strongly_separated()

    def test_overlapping_not_separated(self):
        F = IFSParam((0.6, 0.6), (0.0, 0.0), [[0.0], [0.4]])
        assert not F.strongly_separated()

    def test_cylinder_product_law(self):
        F = IFSParam((0.3, 0.3, 0.3), (0.0, 0.0, 0.0), [[0, 0], [0.7, 0], [0, 0.7]],
                     probs=(0.2, 0.3, 0.5))
        assert F.strongly_separated()
        # strong separation puts each sample in exactly one level-2 image ball
        c, R = F.bounding_ball()
        n = 100_000
        x = F.sample(np.random.default_rng(0), n)
        for word in [(0, 0), (1, 2), (2, 2)]:
            centre = F.apply(word[0], F.apply(word[1], c))
            inside = np.linalg.norm(x - centre, axis=1) <= 0.09 * R + 1e-12
            p = F.cylinder_mass(word)
            assert p == F.probs[word[0]] * F.probs[word[1]]
            assert abs(inside.mean() - p) <= 3 * math.sqrt(p * (1 - p) / n)

    def test_samples_lie_on_attractor(self):
        x = CANTOR.sample(np.random.default_rng(1), 2000)[:, 0]
        # every point stays out of the removed middle thirds up to level 5
        y = x.copy()
        for _ in range(5):
            assert np.all((y <= 1 / 3 + 1e-9) | (y >= 2 / 3 - 1e-9))
            y = np.where(y < 0.5, 3 * y, 3 * y - 2)

    def test_non_natural_frostman(self):
        F = IFSParam((1 / 3, 1 / 3), (0.0, 0.0), [[0.0], [2 / 3]], probs=(0.25, 0.75))
        assert frostman_exponent(F) == pytest.approx(math.log(0.75) / math.log(1 / 3))

    def test_validation(self):
        with pytest.raises(ValidationError):
            IFSParam((0.5, 0.5), (0.0, 0.0), [[0.0], [0.5]], probs=(0.3, 0.3))
        with pytest.raises(ValidationError):
            IFSParam((0.5,), (0.3,), [[0.0]])
        with pytest.raises(ValidationError):
            IFSParam((0.5, 0.5), (0.0, 0.0), [[0, 0, 0], [1, 1, 1]])


class TestParsing:
    def test_line(self):
        V = family_from_dict({"type": "line", "id": "diag", "point": [0, 0], "direction": [1, 1]})
        assert V.name == "diag" and np.allclose(V.basis, [[2**-0.5, 2**-0.5]])

    def test_curve(self):
        C = family_from_dict({"type": "curve", "coeffs": list(CIRCLE_HALF), "clip_radius": 1.0})
        assert C.degree == 2

    def test_ifs_round_trip(self):
        d = CANTOR.to_dict()
        back = family_from_dict(d)
        assert back.ratios == CANTOR.ratios and back.probs == pytest.approx(CANTOR.probs)

    def test_unknown(self):
        with pytest.raises(ValidationError):
            family_from_dict({"type": "spiral"})
