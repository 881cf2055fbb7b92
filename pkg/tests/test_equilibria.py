"""
Unit tests for fourth- and fifth-order equilibria.
"""

import math
from dataclasses import replace

import numpy as np
import pytest

from synchronverter.dynamics import rhs5
from synchronverter.equilibria import (
    check_assumption1,
    check_existence5,
    equilibria4,
    equilibria5,
    exceptional_pq,
    if_interval,
    lambda_curve,
    necessary_stability_angle,
    positive_power_condition,
    solve_pl_pr,
    symmetric_partner,
    xi_map,
)
from synchronverter.error_handler import DomainError, InfeasibleModelError
from synchronverter.geometry import circle_radius
from synchronverter.models import Branch, EquilibriumKind, IfIntervalKind, State5
from synchronverter.model_core import derived_constants


def _assert_state(point, expected, current_tol, angle_tol_deg, field_tol):
    x = point.x
    i_d, i_q, w, delta_deg, i_f = expected
    assert x.i_d == pytest.approx(i_d, abs=current_tol)
    assert x.i_q == pytest.approx(i_q, abs=current_tol)
    assert x.w == pytest.approx(w, abs=0.01)
    assert math.degrees(x.delta) == pytest.approx(delta_deg, abs=angle_tol_deg)
    assert point.i_f == pytest.approx(i_f, abs=field_tol)


class TestLambdaCurve:
    """Test cases for Λ and its inverse."""

    def test_value_at_nominal_field_current(self, example_a):
        """Test Λ at the field current of the right equilibrium."""
        params, grid = example_a
        assert lambda_curve(params, grid).value(0.5428) == pytest.approx(-0.594, abs=0.002)

    def test_roots_solve_level(self, example_a):
        """Test both roots reproduce the requested level."""
        params, grid = example_a
        curve = lambda_curve(params, grid)
        for level in (-1.0, -0.3, 0.5, 1.0):
            for root in curve.roots(level):
                assert curve.value(root) == pytest.approx(level, abs=1e-12)

    def test_undefined_at_zero(self, example_a):
        """Test Λ rejects i_f = 0."""
        params, grid = example_a
        with pytest.raises(DomainError):
            lambda_curve(params, grid).value(0.0)

    def test_minimum_for_motoring_torque(self, negative_torque_a):
        """Test the interior minimum exists only for T̃_m < 0."""
        params, grid = negative_torque_a
        curve = lambda_curve(params, grid)
        location, value = curve.minimum()

        assert curve.derivative(location) == pytest.approx(0.0, abs=1e-12)
        assert curve.value(location) == pytest.approx(value)
        assert value > 0

    def test_no_minimum_for_generating_torque(self, example_a):
        """Test Λ is monotone for T̃_m > 0."""
        params, grid = example_a
        with pytest.raises(DomainError):
            lambda_curve(params, grid).minimum()


class TestIfInterval:
    """Test cases for Assumption 1 and the interval I_f."""

    def test_assumption_holds_strictly(self, example_a):
        """Test the low-voltage machine satisfies 4Rω_gT̃_m > −V²."""
        params, grid = example_a
        check = check_assumption1(params, grid)
        assert check.holds and check.strict

    def test_low_voltage_interval(self, example_a):
        """Test I_f ≈ [0.37, 3.83] A."""
        params, grid = example_a
        interval = if_interval(params, grid)

        assert interval.kind == IfIntervalKind.CLOSED
        assert interval.lower == pytest.approx(0.37, abs=0.005)
        assert interval.upper == pytest.approx(3.83, abs=0.005)

    def test_high_voltage_interval(self, example_b):
        """Test I_f ≈ [1.21, 9.29] A."""
        params, grid = example_b
        interval = if_interval(params, grid)

        assert interval.lower == pytest.approx(1.21, abs=0.005)
        assert interval.upper == pytest.approx(9.29, abs=0.005)

    def test_zero_torque_is_half_open(self, example_a):
        """Test T̃_m = 0 gives (0, 1/b]."""
        params, grid = example_a
        params = replace(params, T_m=0.0)
        interval = if_interval(params, grid)

        assert interval.kind == IfIntervalKind.HALF_OPEN_AT_ZERO
        assert interval.upper == pytest.approx(1.0 / lambda_curve(params, grid).b)
        assert not interval.contains(0.0)

    def test_motoring_torque_is_closed(self, negative_torque_a):
        """Test T̃_m < 0 keeps a closed interval of positive currents."""
        params, grid = negative_torque_a
        interval = if_interval(params, grid)

        assert interval.kind == IfIntervalKind.CLOSED
        assert 0 < interval.lower < interval.upper

    def test_violated_assumption_is_empty(self, example_a):
        """Test a strongly motoring torque empties I_f."""
        params, grid = example_a
        params = replace(params, T_m=-100.0)

        assert not check_assumption1(params, grid).holds
        assert if_interval(params, grid).is_empty


class TestEquilibria4:
    """Test cases for the fourth-order rest points."""

    def test_nominal_field_current(self, example_a):
        """Test δ₁ ≈ 42.4° and i_q ≈ −16.68 A at i_f = 0.5428 A."""
        params, grid = example_a
        first, second = equilibria4(0.5428, params, grid)

        assert first.branch == Branch.DELTA1
        assert second.branch == Branch.DELTA2
        assert math.degrees(first.x.delta) == pytest.approx(42.4, abs=0.1)
        assert first.x.i_q == pytest.approx(-16.68, abs=0.01)
        assert second.x.i_q == first.x.i_q

    def test_outside_interval(self, example_a):
        """Test field currents outside I_f are rejected with the offending Λ."""
        params, grid = example_a
        with pytest.raises(DomainError) as exc_info:
            equilibria4(10.0, params, grid)
        assert abs(exc_info.value.lambda_value) > 1.0

    def test_branch_angles(self, example_a, example_b):
        """Test sin(δ+φ) is positive on δ₁ and not positive on δ₂."""
        for params, grid in (example_a, example_b):
            phi = derived_constants(params, grid).phi
            for i_f in if_interval(params, grid).linspace(15, inset=0.01):
                first, second = equilibria4(float(i_f), params, grid)
                assert necessary_stability_angle(first.x.delta, phi)
                assert not necessary_stability_angle(second.x.delta, phi)

    def test_xi_is_first_branch(self, example_a):
        """Test Ξ picks the δ₁ rest point."""
        params, grid = example_a
        assert xi_map(1.0, params, grid) == equilibria4(1.0, params, grid)[0].x


class TestExistence:
    """Test cases for the fifth-order existence condition and the power roots."""

    def test_holds_strictly(self, example_a):
        """Test Q̃ = 0 satisfies the existence condition strictly."""
        params, grid = example_a
        check = check_existence5(params, grid)
        assert check.strict
        assert check.margin == pytest.approx(3.70e10, rel=0.01)

    def test_boundary_equality(self, example_a):
        """Test Q̃ = r is the boundary case."""
        params, grid = example_a
        r = circle_radius(grid, derived_constants(params, grid))
        check = check_existence5(replace(params, Q_set=r), grid)

        assert check.holds
        assert not check.strict

    def test_power_roots_low_voltage(self, example_a):
        """Test P_r ≈ 9.00 kW and P_l ≈ −93.64 kW."""
        params, grid = example_a
        P_l, P_r = solve_pl_pr(params, grid)

        assert P_r == pytest.approx(9000, abs=10)
        assert P_l == pytest.approx(-93640, abs=10)

    def test_power_roots_high_voltage(self, example_b):
        """Test P_r ≈ 500 kW and P_l ≈ −3.83 MW."""
        params, grid = example_b
        P_l, P_r = solve_pl_pr(params, grid)

        assert P_r == pytest.approx(500e3, rel=1e-3)
        assert P_l == pytest.approx(-3.83e6, rel=1e-3)

    def test_infeasible_reactive_setpoint(self, example_a):
        """Test |Q̃| > r has no equilibrium."""
        params, grid = example_a
        with pytest.raises(InfeasibleModelError) as exc_info:
            solve_pl_pr(replace(params, Q_set=120e3), grid)
        assert "4R²Q̃² ≤ V⁴ + 4RV²T̃_mω_g" in str(exc_info.value)

    def test_positive_power_condition(self, example_a):
        """Test the right root turns negative for a large reactive setpoint."""
        params, grid = example_a
        assert positive_power_condition(params, grid)

        loaded = replace(params, Q_set=40e3)
        assert not positive_power_condition(loaded, grid)
        assert solve_pl_pr(loaded, grid)[1] < 0


class TestEquilibria5:
    """Test cases for the full set of fifth-order equilibria."""

    def test_low_voltage_tables(self, equilibria_a):
        """Test z_r and z_l of the low-voltage machine."""
        assert equilibria_a.kind == EquilibriumKind.REGULAR
        assert len(equilibria_a) == 4
        _assert_state(equilibria_a.right, (-15.24, -16.68, 314.16, 42.42, 0.54), 0.05, 0.05, 0.01)
        _assert_state(equilibria_a.left, (-235.04, -2.38, 314.16, -90.58, 3.81), 0.05, 0.05, 0.01)

    def test_high_voltage_tables(self, equilibria_b):
        """Test z_r and z_l of the high-voltage machine."""
        _assert_state(equilibria_b.right, (-34.73, -33.29, 314.16, 46.21, 1.67), 0.1, 0.05, 0.01)
        _assert_state(equilibria_b.left, (-368.81, -6.01, 314.16, -90.93, 9.22), 0.2, 0.05, 0.01)

    def test_all_points_are_rest_points(self, example_a, equilibria_a):
        """Test every returned point, partners included, zeroes the fifth-order model."""
        params, grid = example_a
        for point in equilibria_a:
            assert np.max(np.abs(rhs5(point.z, params, grid))) < 1e-6

    def test_reactive_power_is_setpoint(self, example_a, equilibria_a):
        """Test every equilibrium delivers Q = Q̃."""
        params, grid = example_a
        for point in equilibria_a:
            assert point.pq.Q == pytest.approx(derived_constants(params, grid).Q_tilde, abs=1e-6)

    def test_symmetric_partners(self, equilibria_a):
        """Test partners negate currents and shift the angle by π."""
        partner = equilibria_a.get(Branch.SYM_RIGHT)
        right = equilibria_a.right

        assert partner.i_f == pytest.approx(-right.i_f)
        assert partner.x.i_d == pytest.approx(-right.x.i_d)
        assert math.cos(partner.x.delta) == pytest.approx(-math.cos(right.x.delta))
        assert symmetric_partner(partner).branch == Branch.RIGHT

    def test_right_equilibrium_on_first_branch(self, example_a, equilibria_a):
        """Test z_r coincides with Ξ at its own field current."""
        params, grid = example_a
        right = equilibria_a.right
        xi = xi_map(right.i_f, params, grid)

        assert xi.as_array() == pytest.approx(right.x.as_array(), rel=1e-6)

    def test_double_root(self, example_a):
        """Test Q̃ = r merges z_r and z_l."""
        params, grid = example_a
        r = circle_radius(grid, derived_constants(params, grid))
        result = equilibria5(replace(params, Q_set=r), grid)

        assert result.P_l == result.P_r
        assert result.left is None
        assert [p.branch for p in result] == [Branch.RIGHT, Branch.SYM_RIGHT]

    def test_exceptional_point(self, example_a):
        """Test T̃_m = 0 with Q̃ at M leaves only the left pair isolated."""
        params, grid = example_a
        consts = derived_constants(replace(params, T_m=0.0), grid)
        M = exceptional_pq(grid, consts)
        result = equilibria5(replace(params, T_m=0.0, Q_set=M.Q), grid)

        assert result.kind == EquilibriumKind.EXCEPTIONAL
        assert result.exceptional_pq == M
        assert result.right is None
        assert result.left is not None

    def test_state_types(self, equilibria_a):
        """Test fifth-order points carry five-component states."""
        assert isinstance(equilibria_a.right.state, State5)


class TestEquilibriumIdentities:
    """Torque-power and angle identities on random feasible parameter sets."""

    def test_identities_hold(self, random_configurations):
        """Test the torque, tan δ and projected-voltage identities at every equilibrium."""
        for params, grid, fraction in random_configurations(100, seed=19):
            params = replace(params, Q_set=0.0, D_q=0.0)
            consts = derived_constants(params, grid)
            interval = if_interval(params, grid)
            i_f = interval.lower + (0.02 + 0.96 * fraction) * interval.length
            R, wL, V = consts.R, grid.w_g * consts.L, grid.V
            points = list(equilibria4(i_f, params, grid)) + list(equilibria5(params, grid))

            for point in points:
                P, Q, delta = point.pq.P, point.pq.Q, point.x.delta
                quadratic = R * (P ** 2 + Q ** 2) / V ** 2
                assert abs(consts.T_tilde * grid.w_g - (P + quadratic)) <= 1e-9 * (abs(P) + quadratic)

                field = params.m * point.i_f * grid.w_g
                cos_side = R * P / V + wL * Q / V + V
                sin_side = wL * P / V - R * Q / V
                scale = abs(R * P / V) + abs(wL * Q / V) + abs(wL * P / V) + abs(R * Q / V) + V
                assert abs(field * math.cos(delta) - cos_side) <= 1e-9 * scale
                assert abs(field * math.sin(delta) - sin_side) <= 1e-9 * scale
                assert abs(math.sin(delta) * cos_side - math.cos(delta) * sin_side) <= 1e-9 * scale
