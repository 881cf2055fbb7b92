"""
Unit tests for time-domain integration.
"""

from dataclasses import replace

import numpy as np
import pytest

from synchronverter.equilibria import equilibria4
from synchronverter.error_handler import ConfigError, DomainError, SimulationDivergedError
from synchronverter.models import GridParams, SatMode, State4, State5
from synchronverter.sim import (
    SimConfig,
    convergence_metric,
    distance_series,
    integrate,
    integrate4,
    integration_order,
    Trajectory,
    perturb,
)

WIDE_LIMITS_A = (0.45, 5.0)


class TestSimConfig:
    """Test cases for run settings."""

    def test_step_count(self, equilibria_a):
        """Test the number of steps follows t_end/dt."""
        config = SimConfig(t_end=0.5, initial=equilibria_a.right.z, dt=1e-3)
        assert config.steps == 500

    @pytest.mark.parametrize("kwargs", [
        {'t_end': 1.0, 'dt': 0.0},
        {'t_end': 1e-5, 'dt': 1e-4},
        {'t_end': 1.0, 'dt': 1e-4, 'record_stride': 0},
    ])
    def test_invalid_settings(self, equilibria_a, kwargs):
        """Test invalid settings are configuration errors."""
        with pytest.raises(ConfigError):
            SimConfig(initial=equilibria_a.right.z, **kwargs).validate()


class TestIntegrate:
    """Test cases for the saturated fifth-order integration."""

    def test_equilibrium_is_fixed(self, example_a, equilibria_a):
        """Test starting exactly at z_r stays there for 10 s."""
        params, grid = example_a
        target = equilibria_a.right
        traj = integrate(SimConfig(t_end=10.0, initial=target.z, record_stride=1000), params, grid)

        assert np.max(distance_series(traj, target)) < 1e-6
        assert traj.events == []

    def test_perturbed_start_converges(self, example_a, equilibria_a):
        """Test a 1 % perturbation of z_r decays back by t = 20 s."""
        params, grid = example_a
        target = equilibria_a.right
        config = SimConfig(t_end=20.0, initial=perturb(target.z, 0.01), record_stride=100)
        traj = integrate(config, params, grid)
        report = convergence_metric(traj, target)

        assert report.converged
        assert report.t_settle is not None and report.t_settle < 20.0
        assert traj.powers[-1][1] == pytest.approx(0.0, abs=10.0)

    def test_left_equilibrium_repels(self, example_a, equilibria_a):
        """Test a perturbed z_l moves far away within 5 s."""
        params, grid = example_a
        target = equilibria_a.left
        config = SimConfig(t_end=5.0, initial=perturb(target.z, 0.01), record_stride=50)
        try:
            traj = integrate(config, params, grid, limits=WIDE_LIMITS_A)
        except SimulationDivergedError:
            return
        distances = distance_series(traj, target)

        assert np.max(distances) >= 10 * distances[0]

    def test_initial_field_current_outside_limits(self, example_a, equilibria_a):
        """Test a start outside the clamp is rejected."""
        params, grid = example_a
        config = SimConfig(t_end=0.1, initial=equilibria_a.left.z)
        with pytest.raises(DomainError):
            integrate(config, params, grid)

    def test_clamp_holds_field_current(self, example_a, equilibria_a):
        """Test i_f never leaves the limits and clamp events are recorded."""
        params, grid = example_a
        right = equilibria_a.right
        start = State5(right.x, params.u_min + 1e-4)
        # a reactive setpoint far below G(u_min) pushes i_f into the lower clamp
        pushed = replace(params, Q_set=-30e3)
        traj = integrate(SimConfig(t_end=1.0, initial=start, record_stride=10), pushed, grid)

        assert np.all(traj.states[:, 4] >= params.u_min)
        assert np.all(traj.states[:, 4] <= params.u_max)
        assert traj.events
        assert traj.events[0].after == SatMode.CLAMPED_LOW

    def test_integration_order(self, example_a, equilibria_a):
        """Test RK4 shows fourth-order convergence on a smooth run."""
        params, grid = example_a
        initial = perturb(equilibria_a.right.z, 0.01)
        finals = []
        for dt in (4e-4, 2e-4, 1e-4):
            traj = integrate(SimConfig(t_end=0.1, initial=initial, dt=dt, record_stride=1000),
                             params, grid, saturated=False)
            finals.append(traj.states[-1])

        assert integration_order(finals) >= 3.5

    def test_samples_and_powers(self, example_a, equilibria_a):
        """Test recorded samples carry consistent powers."""
        params, grid = example_a
        traj = integrate(SimConfig(t_end=0.01, initial=equilibria_a.right.z, record_stride=10),
                         params, grid)

        assert len(traj) == 11
        t, state, pq = traj.samples[-1]
        assert t == pytest.approx(0.01)
        assert pq.P == pytest.approx(equilibria_a.right.pq.P, rel=1e-6)
        assert traj.final_state == state


class TestIntegrate4:
    """Test cases for the fixed-field-current integration."""

    def test_first_branch_attracts(self, example_a):
        """Test a perturbed x₁ᵉ returns to it with i_f held."""
        params, grid = example_a
        first, _ = equilibria4(1.0, params, grid)
        start = perturb(State5(first.x, 1.0), 0.01)
        traj = integrate4(SimConfig(t_end=5.0, initial=start, record_stride=100), 1.0, params, grid)

        assert traj.states[-1][:4] == pytest.approx(first.x.as_array(), rel=1e-4, abs=1e-4)
        assert np.all(traj.states[:, 4] == 1.0)

    def test_dead_grid_frequency_settles(self, example_a):
        """Test ω decays monotonically to ω_n with V = 0, T_m = 0 and no field current."""
        params, _ = example_a
        params = replace(params, T_m=0.0)
        grid = GridParams(V=0.0, w_g=314.159265, w_n=314.159265)
        start = State5(State4(5.0, -3.0, grid.w_n + 5.0, 0.2), 0.0)
        traj = integrate4(SimConfig(t_end=1.0, initial=start, record_stride=100), 0.0, params, grid)
        offsets = traj.states[:, 2] - grid.w_n

        assert np.all(np.diff(offsets) < 0)
        assert np.all(offsets > 0)
        assert offsets[-1] == pytest.approx(5.0 * np.exp(-params.D_p / params.J * 1.0), rel=1e-6)


class TestPerturb:
    """Test cases for the perturbation helper."""

    def test_weights(self, equilibria_a):
        """Test ω moves ten times less than the other components."""
        z = equilibria_a.right.z
        moved = perturb(z, 0.01)
        ratio = moved.as_array() / z.as_array()

        assert ratio == pytest.approx(np.array([1.01, 1.01, 1.001, 1.01, 1.01]))

    def test_distance_wraps_angle(self, equilibria_a):
        """Test an angle offset of 2π counts as no error."""
        target = equilibria_a.right
        shifted = target.z.as_array().copy()
        shifted[3] += 2 * np.pi
        traj = Trajectory(t=np.array([0.0]), states=shifted[None, :], powers=np.zeros((1, 2)))

        assert distance_series(traj, target)[0] == pytest.approx(0.0, abs=1e-12)
