"""Tests for the fourth-derivative SBP operators and the standard alphas."""

import numpy as np
import pytest

from src.errors import GridTooSmallError, InvalidDomainError, TooFewPointsError, UnsupportedOrderError
from src.sbp_core import (REFERENCE_ALPHAS, AlphaPair, build_grid, build_sbp_d4, compute_standard_alphas,
                          default_alphas, is_feasible, is_psd, load_operator_table, min_eigenvalue, minimum_points,
                          n_tilde, operator_data_version, standard_alphas, verify_operator_set)

ORDERS = (2, 4, 6)


@pytest.fixture(scope="module", params=ORDERS)
def ops(request):
    return build_sbp_d4(request.param, build_grid(0.0, 1.0, 41))


class TestGrid:
    def test_spacing_and_points(self):
        grid = build_grid(-1.0, 0.0, 11)
        assert grid.h == pytest.approx(0.1)
        assert grid.points[0] == -1.0 and grid.points[-1] == 0.0
        assert len(grid.points) == 11

    def test_reversed_domain(self):
        with pytest.raises(InvalidDomainError):
            build_grid(1.0, 0.0, 11)

    def test_single_point(self):
        with pytest.raises(TooFewPointsError):
            build_grid(0.0, 1.0, 1)


class TestOperatorData:
    def test_unknown_order(self):
        with pytest.raises(UnsupportedOrderError):
            load_operator_table(3)

    @pytest.mark.parametrize("order", ORDERS)
    def test_version_is_recorded(self, order):
        assert operator_data_version(order)
        ops = build_sbp_d4(order, build_grid(0.0, 1.0, minimum_points(order)))
        assert ops.data_version == operator_data_version(order)

    @pytest.mark.parametrize("order", ORDERS)
    def test_grid_below_minimum(self, order):
        with pytest.raises(GridTooSmallError):
            build_sbp_d4(order, build_grid(0.0, 1.0, minimum_points(order) - 1))

    def test_order2_is_published(self):
        assert load_operator_table(2).is_published


class TestSbpIdentity:
    def test_summation_by_parts(self, ops):
        lhs = ops.H @ ops.D4
        rhs = ops.N + ops.boundary_matrix()
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(lhs))

    def test_N_symmetric_psd(self, ops):
        assert np.array_equal(ops.N, ops.N.T)
        assert is_psd(ops.N, scale=np.linalg.norm(ops.N, 2))

    def test_N_annihilates_linears(self, ops):
        x = ops.grid.points
        scale = np.max(np.abs(ops.N))
        assert np.max(np.abs(ops.N @ np.ones_like(x))) <= 1e-10 * scale
        assert np.max(np.abs(ops.N @ x)) <= 1e-10 * scale

    def test_quadrature(self, ops):
        assert np.sum(ops.norm_weights) == pytest.approx(1.0, abs=1e-13)
        assert np.all(ops.norm_weights > 0)

    def test_mirror_relations(self, ops):
        np.testing.assert_array_equal(ops.e_r, ops.e_l[::-1])
        np.testing.assert_array_equal(ops.d1_r, ops.d1_l[::-1])
        np.testing.assert_array_equal(ops.d2_r, -ops.d2_l[::-1])
        np.testing.assert_array_equal(ops.d3_r, ops.d3_l[::-1])

    def test_report_passes(self, ops):
        report = verify_operator_set(ops)
        assert report.passed, report

    @pytest.mark.parametrize("order", ORDERS)
    def test_minimum_grid(self, order):
        ops = build_sbp_d4(order, build_grid(0.0, 1.0, minimum_points(order)))
        assert verify_operator_set(ops).passed


class TestAccuracy:
    def test_interior_exact_on_quartics(self, ops):
        x = ops.grid.points
        width = load_operator_table(ops.order).closure_width
        interior = slice(width, ops.m - width)
        np.testing.assert_allclose((ops.D4 @ x ** 4)[interior], 24.0, rtol=1e-6)

    def test_boundary_derivatives_exact_on_quadratics(self, ops):
        x = ops.grid.points
        f = 1.0 + 2.0 * x + 3.0 * x ** 2
        # d_k;l approximates -(d/dx)^k at the left end
        assert ops.d1_l @ f == pytest.approx(-2.0, rel=1e-9)
        assert ops.d2_l @ f == pytest.approx(-6.0, rel=1e-9)
        assert ops.d3_l @ f == pytest.approx(0.0, abs=1e-6)
        assert ops.d1_r @ f == pytest.approx(8.0, rel=1e-9)

    def test_d3_exact_on_cubics(self, ops):
        x = ops.grid.points
        assert ops.d3_l @ x ** 3 == pytest.approx(-6.0, rel=1e-8)
        assert ops.d3_r @ x ** 3 == pytest.approx(6.0, rel=1e-8)


class TestStandardAlphas:
    @pytest.mark.parametrize("order", ORDERS)
    def test_matches_reference(self, order):
        pair = standard_alphas(order)
        assert pair.alpha_II == pytest.approx(REFERENCE_ALPHAS[order][0], abs=1e-3), pair
        assert pair.alpha_III == pytest.approx(REFERENCE_ALPHAS[order][1], abs=1e-3), pair

    @pytest.mark.parametrize("order", ORDERS)
    def test_default_pair_is_the_reference(self, order):
        assert default_alphas(order) == AlphaPair(*REFERENCE_ALPHAS[order])
        with pytest.raises(UnsupportedOrderError):
            default_alphas(3)

    @pytest.mark.parametrize("order", ORDERS)
    def test_default_pair_feasible(self, order):
        ops = build_sbp_d4(order, build_grid(0.0, 1.0, 41))
        assert is_feasible(ops, default_alphas(order))

    @pytest.mark.parametrize("order", ORDERS)
    def test_standard_pair_feasible(self, order):
        ops = build_sbp_d4(order, build_grid(0.0, 1.0, 41))
        assert is_feasible(ops, standard_alphas(order))

    @pytest.mark.parametrize("order", ORDERS)
    def test_large_alphas_infeasible(self, order):
        ops = build_sbp_d4(order, build_grid(0.0, 1.0, 41))
        assert not is_feasible(ops, AlphaPair(5.0, 5.0))

    @pytest.mark.parametrize("order", ORDERS)
    def test_grid_independent(self, order):
        coarse = compute_standard_alphas(build_sbp_d4(order, build_grid(0.0, 1.0, 31)))
        fine = standard_alphas(order)
        assert coarse.alpha_II == pytest.approx(fine.alpha_II, abs=1e-3)
        assert coarse.alpha_III == pytest.approx(fine.alpha_III, abs=1e-3)

    def test_n_tilde_at_zero_alphas_is_N(self, ops):
        np.testing.assert_allclose(n_tilde(ops, AlphaPair(0.0, 0.0)), ops.N)

    def test_n_tilde_loses_definiteness_past_the_standard_pair(self, ops):
        pair = standard_alphas(ops.order)
        scale = np.linalg.norm(ops.N, 2)
        assert min_eigenvalue(n_tilde(ops, pair)) >= -1e-9 * scale
        assert min_eigenvalue(n_tilde(ops, AlphaPair(2.5 * pair.alpha_II, 2.5 * pair.alpha_III))) < 0

    def test_negative_tolerance(self, ops):
        with pytest.raises(ValueError):
            is_feasible(ops, AlphaPair(0.1, 0.1), tol=-1.0)
