"""
Tests for the wave module.

Covers grid states, the undamped group, the Strang solver with its energy
identity, the fixed-space membership tests and damped trajectories.

Run these tests with: pytest tests/unit/test_wave.py -v
"""

import numpy as np
import pytest

from periodic_asymptotics.errors import DomainError
from periodic_asymptotics.geometry import corner_square, no_damping, ray_band, switched
from periodic_asymptotics.wave import (
    WaveSolver,
    WaveState,
    dalembert,
    damped_evolution,
    damped_solve,
    example51_basis,
    example51_projection,
    trajectory,
    y_membership_defect,
    z_membership_defect,
)

N = 64


def _smooth_state(n: int = N) -> WaveState:
    """Standing sine with a bump velocity."""
    return WaveState.from_functions(lambda s: np.sin(np.pi * s), lambda s: np.exp(-40.0 * (s - 0.3) ** 2), n)


class TestWaveState:
    """Tests for grid states and the energy norm."""

    def test_shape_mismatch(self):
        """Test that u needs one more value than v."""
        with pytest.raises(DomainError, match="N \\+ 1"):
            WaveState(np.zeros(4), np.zeros(4))

    def test_from_functions_pins_endpoints(self):
        """Test Dirichlet endpoints."""
        state = WaveState.from_functions(lambda s: np.ones_like(s), np.zeros_like, 16)

        assert state.boundary_defect == 0.0
        assert state.n == 16

    def test_energy_is_half_squared_norm(self):
        """Test E = ||x||^2 / 2."""
        state = _smooth_state()
        assert state.energy() == pytest.approx(0.5 * state.norm() ** 2)

    def test_norm_of_sine(self):
        """Test ||(sin(pi s), 0)||^2 close to pi^2 / 2."""
        state = WaveState.from_functions(lambda s: np.sin(np.pi * s), np.zeros_like, 1024)
        assert state.norm() ** 2 == pytest.approx(np.pi**2 / 2, rel=1e-4)

    def test_arithmetic(self):
        """Test sum, difference and scaling."""
        x = _smooth_state()

        assert np.allclose((x + x).v, x.scaled(2.0).v)
        assert (x - x).norm() == 0.0

    def test_riemann_round_trip(self):
        """Test (u, v) -> (w+, w-) -> (u, v)."""
        x = _smooth_state()
        back = x.to_riemann().to_wave()

        assert np.allclose(back.u, x.u, atol=1e-12)
        assert np.allclose(back.v, x.v)


class TestUndampedGroup:
    """Tests for d'Alembert evolution."""

    def test_period_two_is_identity(self):
        """Test T0(2) = I."""
        x = _smooth_state()
        moved = dalembert(x, 2.0)

        assert np.allclose(moved.u, x.u, atol=1e-12)
        assert np.allclose(moved.v, x.v, atol=1e-12)

    @pytest.mark.parametrize("t", [0.25, 0.5, 1.0, 1.5])
    def test_energy_is_conserved(self, t):
        """
        Test that grid-aligned undamped evolution is an isometry.

        :param t: Time, a multiple of ds
        :ptype t: float
        """
        x = _smooth_state()
        assert dalembert(x, t).norm() == pytest.approx(x.norm(), rel=1e-12)

    def test_half_period_reflects(self):
        """Test T0(1)(u, 0) = (-u(1 - s), 0) for symmetric data."""
        x = WaveState.from_functions(lambda s: np.sin(np.pi * s), np.zeros_like, N)
        moved = dalembert(x, 1.0)

        assert np.allclose(moved.u, -x.u[::-1], atol=1e-12)


class TestDampedEvolution:
    """Tests for the Strang solver."""

    def test_no_damping_matches_dalembert(self):
        """Test that b = 0 reproduces exact rotations."""
        x = _smooth_state()
        damped = damped_solve(no_damping(2.0), x, 0.5)
        exact = dalembert(x, 0.5)

        assert np.allclose(damped.u, exact.u, atol=1e-12)
        assert np.allclose(damped.v, exact.v, atol=1e-12)

    def test_energy_is_non_increasing(self):
        """Test monotone per-step energies."""
        run = damped_evolution(switched(0.6), _smooth_state(), 4.0)

        assert np.all(np.diff(run.energies) <= 1e-12)
        assert run.energies[0] <= run.initial_energy + 1e-12

    def test_energy_identity(self):
        """Test E(0) - E(t) against the accumulated damping integral."""
        run = damped_evolution(switched(0.6), _smooth_state(), 2.0)

        assert run.energy_loss > 0
        assert run.energy_residual < 1e-3

    def test_start_time_selects_phase(self):
        """Test that starting in the damped half of the ray band dissipates."""
        x = _smooth_state()
        region = ray_band(0.25)

        quiet = damped_evolution(region, x, 0.5, start=0.0)
        active = damped_evolution(region, x, 0.5, start=1.0)

        assert quiet.energy_loss == pytest.approx(0.0, abs=1e-10)
        assert active.energy_loss > 0

    def test_rejects_off_grid_time(self):
        """Test that durations must be multiples of ds."""
        with pytest.raises(DomainError, match="multiple of ds"):
            damped_solve(switched(0.6), _smooth_state(), 0.001)

    def test_rejects_transport_region(self):
        """Test that 1-periodic regions are refused."""
        with pytest.raises(DomainError, match="period 2"):
            damped_solve(corner_square(0.5), _smooth_state(), 0.5)


class TestWaveSolver:
    """Tests for the one-period solver in energy coordinates."""

    def test_propagate_matches_damped_solve(self):
        """Test that coordinates commute with one period of evolution."""
        region = switched(0.6)
        solver = WaveSolver(region, N)
        x = _smooth_state()

        via_coords = solver.coordinates.decode(solver.propagate(solver.coordinates.encode(x)))
        direct = damped_solve(region, x, 2.0)

        assert np.allclose(via_coords.u, direct.u, atol=1e-10)
        assert np.allclose(via_coords.v, direct.v, atol=1e-10)

    def test_propagate_is_contractive(self, rng):
        """
        Test ||T x|| <= ||x|| for random coordinates.

        :param rng: Pytest fixture providing seeded random generator
        :ptype rng: np.random.Generator
        """
        solver = WaveSolver(switched(0.6), N)
        coords = rng.standard_normal((solver.coordinates.dimension, 5))

        before = np.linalg.norm(coords, axis=0)
        after = np.linalg.norm(solver.propagate(coords), axis=0)

        assert np.all(after <= before + 1e-12)


class TestFixedSpace:
    """Tests for Y membership and the ray-band projection."""

    def test_undamped_region_has_zero_defect(self):
        """Test that every state is in Y when b = 0."""
        defect = y_membership_defect(no_damping(2.0), _smooth_state())

        assert defect.full_period == 0.0
        assert defect.member

    def test_full_damping_rejects_state(self):
        """Test that a fully damped strip detects moving states."""
        defect = y_membership_defect(switched(1.0), _smooth_state())

        assert not defect.member
        assert defect.second_half <= defect.full_period

    def test_basis_snaps_delta(self):
        """Test grid snapping of delta."""
        basis = example51_basis(0.25, N)

        assert basis.m == 16
        assert basis.delta == 0.25
        assert basis.y_state.boundary_defect == 0.0

    @pytest.mark.parametrize("delta", [-0.1, 0.5, 0.7])
    def test_basis_rejects_delta(self, delta):
        """
        Test delta domain [0, 1/2).

        :param delta: Parameter
        :ptype delta: float
        """
        with pytest.raises(DomainError, match="delta"):
            example51_basis(delta, N)

    def test_projection_fixes_basis_state(self):
        """Test P y = y for y = (u_delta, v_delta)."""
        y = example51_basis(0.25, N).y_state
        projected = example51_projection(0.25, y)

        assert np.allclose(projected.u, y.u, atol=1e-12)
        assert np.allclose(projected.v, y.v, atol=1e-12)

    def test_projection_fixes_interior_states(self):
        """Test P (w, w') = (w, w') for w supported in I_delta."""
        basis = example51_basis(0.25, N)
        state = basis.interior_state(lambda s: np.sin(2 * np.pi * (s - 0.25)))

        projected = example51_projection(0.25, state)

        assert np.allclose(projected.u, state.u, atol=1e-12)
        assert np.allclose(projected.v, state.v, atol=1e-10)

    def test_projection_is_idempotent(self, rng):
        """
        Test P^2 = P on random data.

        :param rng: Pytest fixture providing seeded random generator
        :ptype rng: np.random.Generator
        """
        u = np.concatenate(([0.0], rng.standard_normal(N - 1), [0.0]))
        x = WaveState(u, rng.standard_normal(N))

        once = example51_projection(0.25, x)
        twice = example51_projection(0.25, once)

        assert (twice - once).norm() < 1e-9 * max(x.norm(), 1.0)

    def test_complement_of_projection_lies_in_z(self, rng):
        """
        Test that x - Px has zero Z-membership defect.

        :param rng: Pytest fixture providing seeded random generator
        :ptype rng: np.random.Generator
        """
        u = np.concatenate(([0.0], rng.standard_normal(N - 1), [0.0]))
        x = WaveState(u, rng.standard_normal(N))

        residual = x - example51_projection(0.25, x)

        assert z_membership_defect(0.25, residual) < 1e-8 * max(x.norm(), 1.0)

    def test_basis_state_is_not_in_z(self):
        """Test that (u_delta, v_delta) is detected outside Z."""
        y = example51_basis(0.25, N).y_state

        assert z_membership_defect(0.25, y) >= y.norm() * (1 - 1e-12)


class TestTrajectory:
    """Tests for sampled damped trajectories."""

    def test_rows_and_snapshots(self):
        """Test sampling layout and monotone energy."""
        result = trajectory(switched(0.6), _smooth_state(), periods=2, stride=16)

        assert result.rows.shape == (17, 3)
        assert result.rows[-1, 0] == pytest.approx(4.0)
        assert np.all(np.diff(result.rows[:, 1]) <= 1e-12)
        assert result.u_snapshot.shape == (N + 1, 2)
        assert result.v_snapshot.shape == (N, 2)
        assert result.rows[-1, 1] == pytest.approx(result.final_state.energy(), rel=1e-10)

    def test_without_projection_distance_is_norm(self):
        """Test that P = 0 makes the distance column the state norm."""
        result = trajectory(switched(0.6), _smooth_state(), periods=1, stride=32)
        assert np.allclose(result.rows[:, 2], np.sqrt(2.0 * result.rows[:, 1]))
