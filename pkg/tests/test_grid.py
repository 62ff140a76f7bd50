"""Grid algebra, Haar transform, square function, and norm diagnostics."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperhaar import grid
from hyperhaar.grid import (
    DyadicInterval,
    DyadicRectangle,
    GridFunction,
    GridTooLargeError,
    Resolution,
    rectangle,
)


def cell_value(f: GridFunction, point):
    """Value of a piecewise-constant function at a point of [0,1)**d."""
    idx = tuple(
        int(Fraction(x) * (1 << m)) for x, m in zip(point, f.resolution.levels)
    )
    return f.values[idx]


# ---------------------------------------------------------------------------
# dyadic geometry
# ---------------------------------------------------------------------------


class TestDyadicGeometry:
    def test_interval_endpoints(self):
        i = DyadicInterval(2, 2)
        assert i.left == Fraction(1, 2)
        assert i.length == Fraction(1, 4)

    def test_interval_validation(self):
        with pytest.raises(ValueError):
            DyadicInterval(-1, 0)
        with pytest.raises(ValueError):
            DyadicInterval(1, 2)

    def test_containment(self):
        root = DyadicInterval(0, 0)
        assert root.contains(DyadicInterval(3, 5))
        assert not DyadicInterval(2, 1).contains(DyadicInterval(1, 0))

    def test_haar_sign_on_halves(self):
        root = DyadicInterval(0, 0)
        assert root.haar_sign_on(DyadicInterval(1, 0)) == -1
        assert root.haar_sign_on(DyadicInterval(1, 1)) == 1

    def test_rectangle_shape_and_volume(self):
        r = rectangle((1, 2), (0, 3))
        assert r.shape == (1, 2)
        assert r.volume == Fraction(1, 8)

    def test_rectangle_dimension_bounds(self):
        with pytest.raises(ValueError):
            DyadicRectangle(tuple(DyadicInterval(0, 0) for _ in range(4)))

    def test_resolution_cells_and_refinement(self):
        r = Resolution((2, 3))
        assert r.grid_shape == (4, 8)
        assert r.cells == 32
        assert r.refines(Resolution((1, 3)))
        assert not r.refines(Resolution((3, 3)))
        assert r.join(Resolution((3, 1))).levels == (3, 3)

    def test_resolution_cap(self):
        with pytest.raises(GridTooLargeError):
            Resolution((40, 40))


# ---------------------------------------------------------------------------
# Haar functions on grids
# ---------------------------------------------------------------------------


class TestHaarFunctions:
    def test_unit_interval_haar_values(self):
        h = grid.haar_1d(DyadicInterval(0, 0), Resolution((3,)))
        assert cell_value(h, (0.25,)) == -1
        assert cell_value(h, (0.75,)) == 1

    def test_haar_vanishes_outside_support(self):
        h = grid.haar_1d(DyadicInterval(2, 2), Resolution((4,)))
        assert cell_value(h, (0.9,)) == 0
        assert cell_value(h, (0.5,)) == -1

    def test_tensor_haar_left_left(self):
        r = rectangle((0, 0), (0, 0))
        h = grid.haar_tensor(r, Resolution((2, 2)))
        assert cell_value(h, (0.25, 0.25)) == 1
        assert cell_value(h, (0.25, 0.75)) == -1

    def test_tensor_haar_outside_support(self):
        r = rectangle((0, 1), (0, 0))  # [0,1) x [0,0.5)
        h = grid.haar_tensor(r, Resolution((2, 2)))
        assert cell_value(h, (0.75, 0.6)) == 0

    def test_haar_self_inner_product_is_volume(self):
        r = rectangle((1, 0), (0, 0))  # [0,0.5) x [0,1)
        res = Resolution((2, 2))
        h = grid.haar_tensor(r, res)
        assert grid.inner_product(h, h) == Fraction(1, 2)

    def test_distinct_same_shape_haars_orthogonal(self):
        res = Resolution((2, 2))
        h1 = grid.haar_tensor(rectangle((1, 1), (0, 0)), res)
        h2 = grid.haar_tensor(rectangle((1, 1), (1, 0)), res)
        assert grid.inner_product(h1, h2) == 0

    def test_indicator_grid(self):
        r = rectangle((1, 1), (1, 0))
        ind = grid.indicator_grid(r, Resolution((2, 2)))
        assert grid.expectation(ind) == r.volume
        assert set(np.unique(ind.values)) <= {0, 1}


# ---------------------------------------------------------------------------
# algebra
# ---------------------------------------------------------------------------


class TestAlgebra:
    def test_additive_identity(self):
        h = grid.haar_1d(DyadicInterval(1, 0), Resolution((2,)))
        z = GridFunction.zero(h.resolution)
        assert grid.grids_equal(grid.add(h, z), h)

    def test_haar_squares_to_indicator(self):
        i = DyadicInterval(1, 1)
        res = Resolution((3,))
        h = grid.haar_1d(i, res)
        sq = grid.mul(h, h)
        ind = grid.indicator_grid(DyadicRectangle((i,)), res)
        assert grid.grids_equal(sq, ind)

    def test_scale_by_zero(self):
        h = grid.haar_1d(DyadicInterval(0, 0), Resolution((2,)))
        assert grid.grids_equal(grid.scale(h, 0), GridFunction.zero(h.resolution))

    def test_affine(self):
        h = grid.haar_1d(DyadicInterval(0, 0), Resolution((1,)))
        g = grid.affine(h, 2, 3)
        assert list(g.values) == [1, 5]

    def test_mixed_resolution_arithmetic_refines(self):
        a = GridFunction.constant(1, Resolution((1, 1)))
        b = GridFunction.constant(2, Resolution((2, 1)))
        s = grid.add(a, b)
        assert s.resolution.levels == (2, 1)
        assert np.all(s.values == 3)

    def test_exact_fraction_scaling(self):
        f = GridFunction.constant(3, Resolution((1,)))
        g = grid.scale(f, Fraction(1, 2))
        assert g.mode == "exact"
        assert g.values[0] == Fraction(3, 2)

    def test_dimension_mismatch_rejected(self):
        a = GridFunction.constant(1, Resolution((1,)))
        b = GridFunction.constant(1, Resolution((1, 1)))
        with pytest.raises(ValueError):
            grid.add(a, b)


# ---------------------------------------------------------------------------
# expectation, inner product, norms
# ---------------------------------------------------------------------------


class TestMoments:
    def test_haar_mean_zero(self):
        h = grid.haar_tensor(rectangle((1, 2), (1, 2)), Resolution((3, 3)))
        assert grid.expectation(h) == 0

    def test_constant_mean_one(self):
        assert grid.expectation(GridFunction.constant(1, Resolution((2, 2)))) == 1

    def test_haar_square_mean_is_length(self):
        h = grid.haar_1d(DyadicInterval(1, 0), Resolution((2,)))
        assert grid.expectation(grid.mul(h, h)) == Fraction(1, 2)

    def test_lp_norm_of_half_interval_haar(self):
        h = grid.haar_1d(DyadicInterval(1, 0), Resolution((2,)))
        assert grid.lp_norm(h, 2) == pytest.approx(2 ** -0.5)
        assert grid.lp_moment(h, 2) == Fraction(1, 2)

    def test_sup_norm_is_one(self):
        h = grid.haar_tensor(rectangle((1, 1), (0, 1)), Resolution((2, 2)))
        assert grid.sup_norm(h) == 1

    def test_lp_moment_high_power_exact(self):
        f = GridFunction.from_values(Resolution((1,)), np.array([3, -5]))
        assert grid.lp_moment(f, 4) == Fraction(3**4 + 5**4, 2)
        assert grid.lp_moment(f, 16) == Fraction(3**16 + 5**16, 2)

    def test_distribution_counts(self):
        f = GridFunction.from_values(Resolution((2,)), np.array([0, 1, 2, 3]))
        assert grid.distribution(f, 1) == Fraction(2, 4)

    def test_float_mode_moments(self):
        f = GridFunction.constant(2.0, Resolution((1, 1)), mode="float")
        assert grid.expectation(f) == pytest.approx(2.0)
        assert grid.lp_norm(f, 3) == pytest.approx(2.0)


# ---------------------------------------------------------------------------
# Haar transform
# ---------------------------------------------------------------------------


class TestHaarTransform:
    def test_analyze_single_haar(self):
        r = rectangle((1, 2), (1, 3))
        res = Resolution((2, 3))
        spectrum = grid.haar_analyze(grid.haar_tensor(r, res))
        coeffs = spectrum.coefficients
        # axis index 2**k + j addresses the Haar at (level k, position j)
        idx = tuple((1 << side.level) + side.position for side in r.sides)
        assert coeffs[idx] == 1
        coeffs_copy = np.array(coeffs, copy=True)
        coeffs_copy[idx] = 0
        assert not np.any(coeffs_copy)

    def test_analyze_constant(self):
        f = GridFunction.constant(1, Resolution((2, 2)))
        spectrum = grid.haar_analyze(f)
        assert spectrum.coefficients[0, 0] == 1
        rest = np.array(spectrum.coefficients, copy=True)
        rest[0, 0] = 0
        assert not np.any(rest)

    @settings(max_examples=25, deadline=None)
    @given(
        st.integers(1, 3),
        st.integers(0, 3),
        st.integers(0, 200),
    )
    def test_round_trip_random_grids(self, d, level, seed):
        res = Resolution((level,) * d)
        rng = np.random.default_rng(seed)
        f = GridFunction.from_values(
            res, rng.integers(-9, 10, size=res.grid_shape, dtype=np.int64)
        )
        back = grid.haar_synthesize(grid.haar_analyze(f))
        assert back.mode == "exact"
        assert np.array_equal(back.values, f.values)

    def test_round_trip_float(self):
        res = Resolution((3, 2))
        rng = np.random.default_rng(5)
        f = GridFunction(res, rng.standard_normal(res.grid_shape), "float")
        back = grid.haar_synthesize(grid.haar_analyze(f))
        assert np.allclose(back.values, f.values, atol=1e-12)

    def test_parseval_moment_from_spectrum(self):
        res = Resolution((2, 2))
        rng = np.random.default_rng(6)
        f = GridFunction.from_values(
            res, rng.integers(-4, 5, size=res.grid_shape, dtype=np.int64)
        )
        assert grid.parseval_l2_moment(grid.haar_analyze(f)) == grid.lp_moment(f, 2)


# ---------------------------------------------------------------------------
# square function
# ---------------------------------------------------------------------------


class TestSquareFunction:
    def test_square_function_of_single_haar_is_indicator(self):
        i = DyadicInterval(2, 1)
        res = Resolution((3,))
        h = grid.haar_1d(i, res)
        sq = grid.square_function_squared(h)
        ind = grid.indicator_grid(DyadicRectangle((i,)), res)
        assert np.array_equal(sq.values, ind.values)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(1, 2), st.integers(1, 3), st.integers(0, 100))
    def test_parseval_identity_exact(self, d, level, seed):
        res = Resolution((level,) * d)
        rng = np.random.default_rng(seed)
        f = GridFunction.from_values(
            res, rng.integers(-5, 6, size=res.grid_shape, dtype=np.int64)
        )
        assert grid.expectation(grid.square_function_squared(f)) == grid.lp_moment(f, 2)

    def test_homogeneity(self):
        res = Resolution((2, 2))
        rng = np.random.default_rng(7)
        f = GridFunction.from_values(
            res, rng.integers(-3, 4, size=res.grid_shape, dtype=np.int64)
        )
        s1 = grid.square_function(grid.scale(f, -3))
        s2 = grid.square_function(f)
        assert np.allclose(s1.values, 3 * s2.values)

    def test_l2_ratio_is_one(self):
        res = Resolution((3, 2))
        rng = np.random.default_rng(8)
        f = GridFunction.from_values(
            res, rng.integers(-5, 6, size=res.grid_shape, dtype=np.int64)
        )
        prof = grid.lp_profile(f, [2])
        assert prof.entries[0].b_p == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# conditional expectation
# ---------------------------------------------------------------------------


class TestConditionalExpectation:
    def test_haar_averages_to_zero_on_coarser_field(self):
        h = grid.haar_1d(DyadicInterval(1, 0), Resolution((3,)))
        ce = grid.conditional_expectation(h, Resolution((1,)))
        assert not np.any(ce.values != 0)

    def test_same_resolution_identity(self):
        res = Resolution((2, 2))
        rng = np.random.default_rng(9)
        f = GridFunction.from_values(
            res, rng.integers(-5, 6, size=res.grid_shape, dtype=np.int64)
        )
        assert grid.grids_equal(grid.conditional_expectation(f, res), f)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2), st.integers(0, 2), st.integers(0, 100))
    def test_tower_property(self, c1, c2, seed):
        res = Resolution((3, 3))
        rng = np.random.default_rng(seed)
        f = GridFunction.from_values(
            res, rng.integers(-5, 6, size=res.grid_shape, dtype=np.int64)
        )
        coarse = Resolution((c1, c2))
        assert grid.expectation(grid.conditional_expectation(f, coarse)) == \
            grid.expectation(f)

    def test_finer_field_rejected(self):
        f = GridFunction.constant(1, Resolution((1, 1)))
        with pytest.raises(ValueError):
            grid.conditional_expectation(f, Resolution((2, 1)))


# ---------------------------------------------------------------------------
# LP / Orlicz diagnostics
# ---------------------------------------------------------------------------


class TestLPDiagnostics:
    def test_full_interval_haar_profile(self):
        h = grid.haar_1d(DyadicInterval(0, 0), Resolution((1,)))
        for p in (1, 2, 4, 8):
            assert grid.lp_norm(h, p) == pytest.approx(1.0)
        assert grid.orlicz_norm_estimate(h, 1.0, 4) == pytest.approx(1.0)

    def test_ratio_constant_d1_haar_sums(self):
        # b_p / sqrt(p) stays below the frozen regression constant for
        # one-dimensional Haar sums with random sign coefficients.
        worst = 0.0
        for seed in range(10):
            rng = np.random.default_rng(seed)
            res = Resolution((6,))
            spec = np.zeros(res.grid_shape, dtype=np.int64)
            spec[1:] = rng.integers(0, 2, size=spec.size - 1) * 2 - 1
            f = grid.haar_synthesize(grid.HaarSpectrum(res, spec, "exact"))
            prof = grid.lp_profile(f, [2, 4, 8, 16])
            worst = max(worst, max(e.b_p / math.sqrt(e.p) for e in prof.entries))
        assert worst <= 0.75

    def test_orlicz_requires_positive_alpha(self):
        h = grid.haar_1d(DyadicInterval(0, 0), Resolution((1,)))
        with pytest.raises(ValueError):
            grid.orlicz_norm_estimate(h, 0.0, 4)

    def test_lp_profile_requires_increasing_ps(self):
        h = grid.haar_1d(DyadicInterval(0, 0), Resolution((1,)))
        with pytest.raises(ValueError):
            grid.lp_profile(h, [4, 2])


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


class TestSerialization:
    def test_bytes_round_trip_exact(self):
        res = Resolution((2, 1))
        f = GridFunction.from_values(
            res, np.array([[Fraction(1, 3), 2], [0, -1], [5, Fraction(-7, 2)],
                           [1, 1]], dtype=object)
        )
        back = grid.grid_from_bytes(grid.grid_to_bytes(f))
        assert back.mode == "exact"
        assert np.array_equal(back.values, f.values)

    def test_file_round_trip(self, tmp_path):
        res = Resolution((2,))
        f = GridFunction.from_values(res, np.array([1.5, -2.0, 0.0, 3.25]),
                                     mode="float")
        path = tmp_path / "grid.json"
        grid.save_grid(f, path)
        back = grid.load_grid(path)
        assert back.mode == "float"
        assert np.array_equal(back.values, f.values)
