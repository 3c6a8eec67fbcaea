"""
Tests for half-spaces, polytopes, angle functions and facet partitions.
"""

import json
from fractions import Fraction

import numpy as np
import pytest

from core.geometry import (
    ConvexPolytope,
    HalfSpace,
    angle_W,
    angle_Wp,
    dist_halfspace,
    facet_partition,
    field_normal_derivative,
    interface_normal,
    load_polytope,
    nearest_facet,
    normal_pairings,
    pairing_polynomial,
    polygon_prism_sequence,
    regular_polygon_prism,
    sample_interface,
    slab,
    square_prism,
    step2_K_constant,
    support_inside_halfspace,
    support_inside_polytope,
)
from utils.validators import ValidationError


def rational_unit_vector(rng, n):
    """Exact unit vector from inverse stereographic projection of a rational point."""
    t = [Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 7))) for _ in range(n - 1)]
    s = sum(v * v for v in t)
    return tuple([2 * v / (s + 1) for v in t] + [(s - 1) / (s + 1)])


def rational_point(rng, n):
    return tuple(Fraction(int(rng.integers(-50, 51)), int(rng.integers(1, 13))) for _ in range(n))


@pytest.mark.priority1
@pytest.mark.unit
class TestHalfSpace:
    """Normals, distances and serialization."""

    def test_rejects_non_unit_normal(self):
        with pytest.raises(ValidationError):
            HalfSpace((1, 1, 0), 0)

    def test_rejects_empty_normal(self):
        with pytest.raises(ValidationError):
            HalfSpace((), 0)

    def test_from_normal_normalizes(self):
        H = HalfSpace.from_normal((0, 3, 4), 1.0)
        np.testing.assert_allclose(H.nu_array, [0.0, 0.6, 0.8])
        assert H.d == 1.0

    def test_from_normal_rejects_zero(self):
        with pytest.raises(ValidationError):
            HalfSpace.from_normal((0, 0, 0))

    def test_exact_distance(self):
        H = HalfSpace((Fraction(3, 5), Fraction(4, 5), 0), Fraction(-1, 2))
        assert dist_halfspace(H, (1, 1, 7)) == Fraction(19, 10)

    def test_batched_distance(self):
        H = HalfSpace((0, 0, 1), 0.5)
        points = np.array([[0.0, 0.0, 1.0], [2.0, -1.0, 0.25]])
        np.testing.assert_allclose(dist_halfspace(H, points), [0.5, -0.25])

    def test_distance_dimension_mismatch(self):
        H = HalfSpace((0, 0, 1), 0)
        with pytest.raises(ValidationError):
            dist_halfspace(H, (1, 2))

    def test_dict_round_trip_keeps_rationals(self):
        H = HalfSpace((Fraction(3, 5), Fraction(-4, 5)), Fraction(1, 3))
        data = json.loads(json.dumps(H.to_dict()))
        assert data["nu"] == ["3/5", "-4/5"]
        assert HalfSpace.from_dict(data) == H

    def test_from_dict_requires_normal(self):
        with pytest.raises(ValidationError):
            HalfSpace.from_dict({"d": 0})


@pytest.mark.priority1
@pytest.mark.core
class TestHeisenbergAlgebra:
    """Exact pairings for the vertical normal on the Heisenberg group."""

    def test_pairings_and_derivatives_exact(self, heisenberg):
        H = HalfSpace((0, 0, 1), 0)
        g1 = pairing_polynomial(heisenberg, H.nu, 1)
        g2 = pairing_polynomial(heisenberg, H.nu, 2)
        rng = np.random.default_rng(5)
        for _ in range(100):
            x = rational_point(rng, 3)
            if x[2] == 0:
                continue
            assert g1.evaluate(x) == 2 * x[1]
            assert g2.evaluate(x) == -2 * x[0]
            assert field_normal_derivative(heisenberg, H, 1, x) == 0
            assert field_normal_derivative(heisenberg, H, 2, x) == 0
            w_sq = g1.evaluate(x) ** 2 + g2.evaluate(x) ** 2
            ratio = w_sq / dist_halfspace(H, x) ** 2
            assert ratio == 4 * (x[0] ** 2 + x[1] ** 2) / x[2] ** 2
            assert isinstance(ratio, Fraction)

    def test_angle_function_matches_closed_form(self, heisenberg, upper_halfspace):
        rng = np.random.default_rng(6)
        points = rng.uniform(-2.0, 2.0, size=(50, 3))
        expected = 2.0 * np.sqrt(points[:, 0] ** 2 + points[:, 1] ** 2)
        np.testing.assert_allclose(angle_W(heisenberg, upper_halfspace, points), expected, rtol=1e-13)

    def test_angle_wp_two_matches_angle_w(self, heisenberg, horizontal_halfspace):
        points = np.random.default_rng(7).uniform(-1.0, 1.0, size=(20, 3))
        np.testing.assert_allclose(
            angle_Wp(heisenberg, horizontal_halfspace, points, 2.0),
            angle_W(heisenberg, horizontal_halfspace, points),
            rtol=1e-13,
        )

    def test_angle_wp_rejects_small_exponent(self, heisenberg, upper_halfspace):
        with pytest.raises(ValidationError):
            angle_Wp(heisenberg, upper_halfspace, np.zeros((1, 3)), 1.0)

    def test_horizontal_normal_pairings_constant(self, heisenberg, horizontal_halfspace):
        points = np.random.default_rng(8).uniform(-1.0, 1.0, size=(10, 3))
        np.testing.assert_allclose(
            normal_pairings(heisenberg, horizontal_halfspace.nu_array, points),
            np.tile([0.6, 0.8], (10, 1)),
        )

    def test_normal_dimension_mismatch(self, heisenberg):
        with pytest.raises(ValidationError):
            pairing_polynomial(heisenberg, (0, 1), 1)


@pytest.mark.priority1
@pytest.mark.core
class TestEngelAlgebra:
    """Exact normal derivatives on the Engel group."""

    def test_normal_derivatives_exact(self, engel):
        rng = np.random.default_rng(11)
        for _ in range(10):
            H = HalfSpace(rational_unit_vector(rng, 4), Fraction(int(rng.integers(-3, 4)), 2))
            for _ in range(100):
                x = rational_point(rng, 4)
                first = field_normal_derivative(engel, H, 1, x)
                second = field_normal_derivative(engel, H, 2, x)
                assert first == x[1] * H.nu[3] / 3
                assert second == 0

    def test_group_law_convention_second_field_derivative_vanishes(self, engel_law):
        H = HalfSpace((0, 0, 0, 1), 0)
        x = (Fraction(1, 3), Fraction(-2, 7), Fraction(5), Fraction(1, 2))
        assert field_normal_derivative(engel_law, H, 2, x) == 0

    def test_float_points_use_polynomial_evaluation(self, engel):
        H = HalfSpace((0, 0, 0.6, 0.8), 0)
        points = np.random.default_rng(12).uniform(-1.0, 1.0, size=(25, 4))
        np.testing.assert_allclose(
            field_normal_derivative(engel, H, 1, points), points[:, 1] * 0.8 / 3, rtol=1e-12, atol=1e-15
        )


@pytest.mark.priority2
@pytest.mark.core
class TestStepTwoConstant:
    """Trace constant for step-two groups."""

    def test_heisenberg_trace_vanishes(self, heisenberg):
        assert step2_K_constant(heisenberg, (0, 0, 1), -0.5) == 0

    def test_synthetic_trace(self, step2_group):
        nu = (0, 0, 0, Fraction(3, 5), Fraction(4, 5))
        # traces: block 0 -> 1 + 0 + 0, block 1 -> 0
        assert step2_K_constant(step2_group, nu, 2) == Fraction(6, 5)

    def test_rejects_higher_step(self, engel):
        with pytest.raises(ValidationError):
            step2_K_constant(engel, (0, 0, 0, 1), -0.5)


@pytest.mark.priority1
@pytest.mark.unit
class TestPolytopes:
    """Construction, facet partition and interfaces."""

    def test_witness_must_be_interior(self):
        facets = (HalfSpace((1, 0), 0), HalfSpace((-1, 0), -1))
        with pytest.raises(ValidationError):
            ConvexPolytope(facets, (2.0, 0.0))

    def test_mixed_dimensions_rejected(self):
        with pytest.raises(ValidationError):
            ConvexPolytope((HalfSpace((1, 0), 0), HalfSpace((0, 0, 1), 0)), (0.5, 0.5))

    def test_tuple_facets_are_coerced(self):
        P = ConvexPolytope((((1, 0), 0), ((-1, 0), -1)), (0.5, 0.0))
        assert all(isinstance(f, HalfSpace) for f in P.facets)

    def test_square_prism_facet_order(self):
        P = square_prism(3, (0, 1), (0.0, 0.0, 0.0), 1.0)
        np.testing.assert_allclose(
            P.normals, [[1, 0, 0], [0, 1, 0], [-1, 0, 0], [0, -1, 0]]
        )
        np.testing.assert_allclose(P.offsets, [-1, -1, -1, -1])

    def test_facet_partition_lowest_index_on_ties(self):
        P = square_prism(3, (0, 1), (0.0, 0.0, 0.0), 1.0)
        points = np.array([[0.0, 0.0, 5.0], [0.9, 0.0, 0.0], [-0.5, -0.5, 1.0]])
        idx, dist = facet_partition(P, points)
        assert idx.tolist() == [0, 2, 0]
        np.testing.assert_allclose(dist, [1.0, 0.1, 0.5])

    def test_nearest_facet(self):
        P = slab(2, 1, 0.0, 2.0)
        result = nearest_facet(P, (3.0, 1.5))
        assert result.index == 1
        assert result.distance == pytest.approx(0.5)

    def test_nearest_facet_rejects_outside(self):
        with pytest.raises(ValidationError):
            nearest_facet(slab(2, 0, 0.0, 1.0), (1.5, 0.0))

    def test_interface_normal(self):
        normal, gap = interface_normal((1.0, 0.0), (0.0, 1.0))
        np.testing.assert_allclose(normal, np.array([1.0, -1.0]) / np.sqrt(2.0))
        assert gap == pytest.approx(np.sqrt(2.0))

    def test_interface_normal_degenerate(self):
        with pytest.raises(ValidationError):
            interface_normal((0.0, 1.0), (0.0, 1.0))

    def test_sample_interface_on_diagonal(self):
        P = square_prism(3, (0, 1), (0.0, 0.0, 0.0), 1.0)
        box = [(-1.0, 1.0), (-1.0, 1.0), (-2.0, 2.0)]
        points = sample_interface(P, 0, 1, 200, box, seed=4)
        assert points.shape == (200, 3)
        dists = P.distances(points)
        np.testing.assert_allclose(dists[:, 0], dists[:, 1], atol=1e-10)
        assert np.all(dists[:, 0] > 0)
        assert np.all(dists[:, 2:] >= dists[:, :1] - 1e-12)

    def test_sample_interface_is_seeded(self):
        P = square_prism(3, (0, 1), (0.0, 0.0, 0.0), 1.0)
        box = [(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)]
        np.testing.assert_array_equal(
            sample_interface(P, 1, 2, 50, box, seed=9), sample_interface(P, 1, 2, 50, box, seed=9)
        )

    def test_sample_interface_rejects_bad_indices(self):
        P = slab(2, 0, 0.0, 1.0)
        box = [(0.0, 1.0), (0.0, 1.0)]
        with pytest.raises(ValidationError):
            sample_interface(P, 0, 0, 10, box)
        with pytest.raises(ValidationError):
            sample_interface(P, 0, 5, 10, box)

    def test_opposite_slab_faces_share_midplane(self):
        P = slab(2, 0, 0.0, 1.0)
        points = sample_interface(P, 0, 1, 20, [(0.0, 1.0), (-1.0, 1.0)], seed=1)
        np.testing.assert_allclose(points[:, 0], 0.5)

    def test_polygon_prism_inradius(self):
        P = regular_polygon_prism(3, (0, 1), 6, 2.0, (0.0, 0.0, 0.0))
        assert len(P.facets) == 6
        dists = P.distances(np.zeros(3))
        np.testing.assert_allclose(dists, 2.0 * np.cos(np.pi / 6))

    def test_polygon_sequence_is_nested(self):
        polys = polygon_prism_sequence(3, (0, 1), 1.0, (0.0, 0.0, 0.0), 4)
        assert [len(P.facets) for P in polys] == [4, 8, 16, 32]
        rng = np.random.default_rng(2)
        points = rng.uniform(-1.0, 1.0, size=(2000, 3))
        for inner, outer in zip(polys, polys[1:]):
            inside = np.all(inner.distances(points) > 0, axis=1)
            assert np.all(outer.distances(points[inside]) > -1e-12)

    def test_polygon_needs_three_sides(self):
        with pytest.raises(ValidationError):
            regular_polygon_prism(2, (0, 1), 2, 1.0, (0.0, 0.0))

    def test_load_polytope(self, temp_dir):
        P = square_prism(2, (0, 1), (0.0, 0.0), 1.0)
        path = temp_dir / "square.json"
        path.write_text(json.dumps(P.to_dict()))
        assert load_polytope(path) == P

    def test_load_polytope_missing(self, temp_dir):
        with pytest.raises(ValidationError):
            load_polytope(temp_dir / "nope.json")


@pytest.mark.priority2
@pytest.mark.unit
class TestSupportInside:
    """Box margins against domains."""

    def test_halfspace_margin(self):
        H = HalfSpace((0, 0, 1), 0)
        assert support_inside_halfspace(H, [(-1, 1), (-1, 1), (0.5, 2)]) == pytest.approx(0.5)

    def test_tilted_margin_uses_worst_corner(self):
        H = HalfSpace((0.6, 0.8, 0), -0.5)
        margin = support_inside_halfspace(H, [(0, 1), (-1, 1), (0, 1)])
        assert margin == pytest.approx(-0.8 + 0.5)

    def test_polytope_margin(self):
        P = square_prism(3, (0, 1), (0.0, 0.0, 0.0), 1.0)
        assert support_inside_polytope(P, [(-0.5, 0.25), (-0.5, 0.5), (-9, 9)]) == pytest.approx(0.5)
