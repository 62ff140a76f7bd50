"""Short Riesz products in d=3: parameters, decomposition, duality, Gamma."""

import math
from fractions import Fraction

import numpy as np
import pytest

from hyperhaar import grid, hyperbolic, riesz
from hyperhaar.hyperbolic import CoefficientField


# ---------------------------------------------------------------------------
# parameters and blocks
# ---------------------------------------------------------------------------


class TestParams:
    def test_reference_values_n100(self):
        p = riesz.make_params(100, a=1.0, eps=0.5)
        assert p.q == 10
        assert p.rho_tilde == pytest.approx(10 ** (1 / 6) / 100)
        assert p.rho == pytest.approx(math.sqrt(10) / 100)

    def test_blocks_partition_level_range(self):
        p = riesz.make_params(6, q=3)
        flat = [b for interval in p.intervals for b in interval]
        assert sorted(flat) == list(range(7))
        shapes = [s for block in p.blocks for s in block]
        assert sorted(shapes) == sorted(hyperbolic.enumerate_shapes(6, 3))

    def test_leading_intervals_take_remainder(self):
        p = riesz.make_params(6, q=3)  # 7 values into 3 intervals
        assert [len(i) for i in p.intervals] == [3, 2, 2]

    def test_rho_tilde_below_rho_iff_small_a(self):
        small = riesz.make_params(50, a=0.5, eps=0.5)
        assert small.rho_tilde < small.rho
        big = riesz.make_params(50, a=5.0, eps=0.5)
        assert big.a > big.q ** Fraction(1, 3)
        assert big.rho_tilde > big.rho

    def test_singleton_blocks(self):
        n = 4
        p = riesz.make_params(n, q=n + 1)
        for t, block in enumerate(p.blocks):
            assert all(s[0] == t for s in block)
            assert len(block) == n - t + 1

    def test_explicit_rho_tilde(self):
        p = riesz.make_params(4, q=2, rho_tilde=0.25)
        assert p.rho_tilde_exact == Fraction(1, 4)

    def test_q_validation(self):
        with pytest.raises(ValueError):
            riesz.make_params(4, q=0)
        with pytest.raises(ValueError):
            riesz.make_params(4, q=6)


class TestBlockSums:
    def test_mean_zero_and_l2(self):
        n = 5
        f = CoefficientField.random_signs(n, 3, 80)
        p = riesz.make_params(n, q=2)
        for t in (1, 2):
            ft = riesz.block_sum(f, p, t)
            assert grid.expectation(ft) == 0
            assert grid.lp_moment(ft, 2) == len(p.blocks[t - 1])

    def test_block_index_validation(self):
        f = CoefficientField.random_signs(3, 3, 81)
        p = riesz.make_params(3, q=2)
        with pytest.raises(ValueError):
            riesz.gamma(f, p, 3)


# ---------------------------------------------------------------------------
# short product
# ---------------------------------------------------------------------------


class TestShortProduct:
    def test_mean_one_small(self):
        f = CoefficientField.random_signs(4, 3, 82)
        p = riesz.make_params(4, q=2)
        psi = riesz.short_product(f, p)
        assert grid.expectation(psi) == 1
        assert riesz.short_product_mean(f, p) == 1

    def test_pooled_mean_matches_grid_mean(self):
        for (n, q) in [(3, 2), (4, 3)]:
            f = CoefficientField.random_signs(n, 3, (83, n, q))
            p = riesz.make_params(n, q=q)
            assert riesz.short_product_mean(f, p) == \
                grid.expectation(riesz.short_product(f, p))

    def test_zero_rho_gives_constant_one(self):
        f = CoefficientField.random_signs(3, 3, 84)
        p = riesz.make_params(3, q=2, rho_tilde=0.0)
        psi = riesz.short_product(f, p)
        assert np.all(psi.values == 1)

    def test_cellwise_lower_bound_in_contraction_regime(self):
        # With rho~ * max||F_t||_inf <= 1 every factor is nonnegative and
        # the product obeys the first-order bound 1 - q * rho~ * max||F||.
        f = CoefficientField.random_signs(4, 3, 85)
        p = riesz.make_params(4, q=2, rho_tilde=1 / 16)
        psi = riesz.short_product(f, p)
        max_sup = max(
            int(grid.sup_norm(riesz.block_sum(f, p, t))) for t in (1, 2))
        assert p.rho_tilde_exact * max_sup <= 1
        bound = 1 - p.q * p.rho_tilde_exact * max_sup
        assert min(psi.values.reshape(-1)) >= bound

    def test_float_mode_close_to_exact(self):
        n, q = 4, 2
        exact_field = CoefficientField.random_signs(n, 3, 86)
        p = riesz.make_params(n, q=q)
        exact = riesz.short_product(exact_field, p).float_values()
        float_field = CoefficientField(
            exact_field.n, exact_field.d,
            {s: v.astype(np.float64) for s, v in exact_field.values.items()},
            "float")
        approx = riesz.short_product(float_field, p).values
        assert np.allclose(exact, approx, rtol=1e-12)

    def test_d2_rejected(self):
        f = CoefficientField.random_signs(3, 2, 87)
        with pytest.raises(ValueError):
            riesz.short_product(f, riesz.make_params(3, q=2))


# ---------------------------------------------------------------------------
# decomposition
# ---------------------------------------------------------------------------


class TestDecomposition:
    def test_q1_complement_vanishes(self):
        n = 3
        f = CoefficientField.random_signs(n, 3, 90)
        p = riesz.make_params(n, q=1)
        sd, nsd = riesz.sd_decomposition(f, p)
        assert not np.any(nsd.values != 0)
        f1 = riesz.block_sum(f, p, 1)
        expected = grid.scale(f1, p.rho_tilde_exact)
        assert grid.grids_equal(sd, expected)

    def test_identity_and_mean_zero(self):
        f = CoefficientField.random_signs(4, 3, 91)
        p = riesz.make_params(4, q=2)
        rep = riesz.decomposition_report(f, p)
        assert rep["identity_ok"]
        assert rep["sd_mean_zero"]

    def test_decomposition_sums_to_product(self):
        f = CoefficientField.random_signs(4, 3, 92)
        p = riesz.make_params(4, q=3)
        psi = riesz.short_product(f, p)
        sd, nsd = riesz.sd_decomposition(f, p)
        recon = grid.add(grid.add(GridOne(psi), sd), nsd)
        assert grid.grids_equal(recon, psi)

    def test_tuple_budget(self):
        f = CoefficientField.random_signs(4, 3, 93)
        p = riesz.make_params(4, q=2)
        old = riesz.SD_TUPLE_BUDGET
        riesz.SD_TUPLE_BUDGET = 1
        try:
            with pytest.raises(grid.BudgetExceededError):
                riesz.sd_decomposition(f, p)
        finally:
            riesz.SD_TUPLE_BUDGET = old


def GridOne(like):
    return grid.GridFunction.constant(1, like.resolution)


# ---------------------------------------------------------------------------
# duality
# ---------------------------------------------------------------------------


class TestDuality:
    def test_certificate_report(self):
        f = CoefficientField.random_signs(4, 3, 94)
        p = riesz.make_params(4, q=2)
        rep = riesz.duality_certificate(f, p)
        assert rep["identity_sd1"]["ok"]
        assert rep["higher_layers"]["ok"]
        assert rep["sd_equals_sd1"]
        for cert in rep["certificates"].values():
            assert cert["sound"]

    def test_first_layer_value(self):
        n = 4
        f = CoefficientField.random_signs(n, 3, 95)
        p = riesz.make_params(n, q=2)
        rep = riesz.duality_certificate(f, p)
        expected = p.rho_tilde_exact * Fraction(f.abs_sum(), 1 << n)
        assert rep["identity_sd1"]["lhs"] == expected

    def test_zero_rho_edge(self):
        f = CoefficientField.random_signs(3, 3, 96)
        p = riesz.make_params(3, q=2, rho_tilde=0.0)
        rep = riesz.duality_certificate(f, p)
        assert rep["certificates"]["psi_sd"]["lower_bound"] == 0
        assert rep["certificates"]["psi_sd"]["sound"]


# ---------------------------------------------------------------------------
# Gamma
# ---------------------------------------------------------------------------


class TestGamma:
    def test_identity_small(self):
        f = CoefficientField.random_signs(4, 3, 97)
        p = riesz.make_params(4, q=2)
        rep = riesz.gamma_identity_report(f, p)
        assert rep["all_ok"], rep

    def test_single_shape_block_gamma_vanishes(self):
        n = 3
        f = CoefficientField.random_signs(n, 3, 98)
        p = riesz.make_params(n, q=n + 1)
        # the last block holds only the shape with first coordinate n
        g = riesz.gamma(f, p, n + 1)
        assert not np.any(g.values != 0)

    def test_gamma_mean_zero(self):
        f = CoefficientField.random_signs(5, 3, 99)
        p = riesz.make_params(5, q=3)
        for t in (1, 2, 3):
            assert grid.expectation(riesz.gamma(f, p, t)) == 0


# ---------------------------------------------------------------------------
# norm report
# ---------------------------------------------------------------------------


class TestNormReport:
    def test_mean_and_negativity(self):
        f = CoefficientField.random_signs(4, 3, 100)
        p = riesz.make_params(4, q=2)
        rep = riesz.norm_report(f, p, v_list=[(), (1,), (1, 2)])
        assert rep.mean == 1
        max_sup = max(
            int(grid.sup_norm(riesz.block_sum(f, p, t))) for t in (1, 2))
        if p.rho_tilde_exact * max_sup < 1:
            assert rep.negative_fraction == 0

    def test_empty_partial_product_is_one(self):
        f = CoefficientField.random_signs(3, 3, 101)
        p = riesz.make_params(3, q=2)
        rep = riesz.norm_report(f, p, v_list=[()])
        empties = [norm for v, r, norm in rep.partial_norms if v == ()]
        assert empties and all(norm == 1 for norm in empties)

    def test_json_export(self):
        f = CoefficientField.random_signs(3, 3, 102)
        p = riesz.make_params(3, q=2)
        obj = riesz.norm_report(f, p).to_json()
        assert obj["mean"] == "1"
        assert "l2" in obj and "a_prime" in obj
