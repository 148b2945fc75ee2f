"""
Tests for the observability module.

Covers Gramians, observability constants, the damped/undamped sandwich and
ray tracing for the geometric control condition.

Run these tests with: pytest tests/unit/test_observability.py -v
"""

import numpy as np
import pytest

from periodic_asymptotics.errors import DomainError
from periodic_asymptotics.geometry import analytic, corner_square, line_average, no_damping, switched
from periodic_asymptotics.observability import (
    Gramian,
    c_tau,
    fold,
    gcc_check,
    gramian,
    kronecker_sweep,
    observability_constants,
    sandwich_check,
    transport_gramian_quadrature,
    transport_ray_dwell,
    wave_ray_dwell,
)
from periodic_asymptotics.rates import monodromy_operator
from periodic_asymptotics.spectral import MonodromyOperator, assemble, ergodic_projection
from periodic_asymptotics.transport import TransportSolver


class TestGramian:
    """Tests for observability Gramians."""

    def test_quadratic_form(self):
        """Test <G x, x> for diagonal and dense storage."""
        diagonal = Gramian("transport", 2, 2, diagonal=np.array([1.0, 3.0]))
        dense = Gramian("wave", 2, 4, matrix=np.array([[2.0, 1.0], [1.0, 2.0]]))

        assert diagonal.quadratic_form(np.array([1.0, 1.0])) == pytest.approx(4.0)
        assert dense.quadratic_form(np.array([1.0, -1.0])) == pytest.approx(2.0)
        assert np.allclose(diagonal.dense(), np.diag([1.0, 3.0]))

    def test_transport_gramian_is_line_average(self):
        """Test G = diag(a) for transport."""
        region = corner_square(0.5)
        g = gramian("transport", region, 64)

        assert np.array_equal(g.diagonal, line_average(region, 64).values)

    def test_transport_quadrature_agrees(self):
        """Test unsplit Gauss quadrature along characteristics against the exact profile."""
        region = corner_square(0.5)
        exact = line_average(region, 64).values

        assert np.allclose(transport_gramian_quadrature(region, 64, n_t=512), exact, atol=0.01)
        assert np.allclose(gramian("transport", region, 64, n_t=512).diagonal, exact, atol=0.01)

    def test_time_resolution(self):
        """Test that n_t sets the number of time samples per period."""
        assert gramian("transport", corner_square(0.5), 64, n_t=128).n_t == 128
        assert gramian("wave", switched(0.6), 16, n_t=32).n_t == 32
        assert gramian("wave", switched(0.6), 16).n_t == 64

    def test_wave_gramian_is_symmetric_semidefinite(self):
        """Test symmetry and non-negative spectrum."""
        g = gramian("wave", switched(0.6), 16)

        assert g.matrix.shape == (31, 31)
        assert np.allclose(g.matrix, g.matrix.T)
        assert np.linalg.eigvalsh(g.matrix)[0] >= -1e-10

    def test_wave_gramian_is_monotone_in_region(self):
        """Test that a larger support gives a larger Gramian."""
        small = gramian("wave", switched(0.3), 16).matrix
        large = gramian("wave", switched(1.0), 16).matrix

        assert np.linalg.eigvalsh(large - small)[0] >= -1e-10

    def test_no_damping_gives_zero(self):
        """Test the zero Gramian."""
        assert np.allclose(gramian("wave", no_damping(2.0), 16).matrix, 0.0)

    @pytest.mark.parametrize(
        "system,region,message",
        [("heat", corner_square(0.5), "system must be one of"), ("wave", corner_square(0.5), "period 2")],
    )
    def test_rejects_mismatched_system(self, system, region, message):
        """
        Test system and period validation.

        :param system: System name
        :ptype system: str
        :param region: Damping region
        :ptype region: DampingRegion
        :param message: Expected message fragment
        :ptype message: str
        """
        with pytest.raises(DomainError, match=message):
            gramian(system, region, 16)


class TestObservabilityConstants:
    """Tests for kappa^2 on X and on Z."""

    def test_transport_constants_on_complement(self):
        """Test that kappa^2 vanishes on X but not on Z = Ran(I - P)."""
        region = corner_square(0.25)
        g = gramian("transport", region, 64)
        projection = ergodic_projection(assemble(TransportSolver(region, 64)))

        constants = observability_constants(g, projection)

        assert constants.kappa2_full == pytest.approx(0.0, abs=1e-15)
        assert constants.kappa2_z == pytest.approx(0.5 / 64)
        assert constants.z_dimension == int(np.sum(g.diagonal > 0))

    @pytest.mark.slow
    def test_wave_kappa_is_stable_under_refinement(self):
        """Test that kappa^2 on Z stays bounded away from zero for strips wider than 1/2."""
        region = switched(0.6)
        kappas = []
        for n in (256, 512, 1024):
            projection = ergodic_projection(monodromy_operator("wave", region, n))
            kappas.append(observability_constants(gramian("wave", region, n), projection).kappa2_z)

        assert all(kappa > 0.0 for kappa in kappas)
        assert all(fine >= 0.75 * coarse for coarse, fine in zip(kappas, kappas[1:], strict=False))

    def test_dense_constants(self):
        """Test restriction of a dense Gramian to the complement of the fixed space."""
        g = Gramian("wave", 3, 3, matrix=np.diag([0.0, 2.0, 3.0]))
        projection = ergodic_projection(MonodromyOperator.from_matrix(np.diag([1.0, 0.5, 0.5])))

        constants = observability_constants(g, projection)

        assert constants.kappa2_full == pytest.approx(0.0)
        assert constants.kappa2_z == pytest.approx(2.0)
        assert constants.z_dimension == 2

    def test_without_projection(self):
        """Test that Z defaults to the whole space."""
        constants = observability_constants(Gramian("transport", 2, 2, diagonal=np.array([0.5, 2.0])))

        assert constants.kappa2_full == constants.kappa2_z == 0.5
        assert constants.z_dimension == 2


class TestSandwich:
    """Tests for the damped/undamped comparison."""

    def test_c_tau(self):
        """Test c_tau = 1 + integral of ||B(t)||^2."""
        assert c_tau(switched(0.6)) == pytest.approx(3.0)
        assert c_tau(no_damping(1.0)) == 1.0

    def test_transport_sandwich_holds(self):
        """Test both bounds on random transport states."""
        report = sandwich_check("transport", corner_square(0.5), 64)

        assert report.holds
        assert report.samples == 20
        assert report.offending_sample is None
        assert report.c_tau == pytest.approx(1.5)

    def test_needs_twenty_samples(self):
        """Test minimum sample count."""
        with pytest.raises(DomainError, match="at least 20"):
            sandwich_check("transport", corner_square(0.5), 64, samples=5)


class TestRays:
    """Tests for ray dwell times."""

    @pytest.mark.parametrize("x,expected", [(0.25, 0.25), (1.5, 0.5), (-0.25, 0.25), (2.25, 0.25)])
    def test_fold(self, x, expected):
        """
        Test the reflection map.

        :param x: Unfolded position
        :ptype x: float
        :param expected: Folded position
        :ptype expected: float
        """
        assert float(fold(x)) == pytest.approx(expected)

    def test_transport_dwell_matches_line_integral(self):
        """Test the corner-square characteristic through s = 1/4."""
        assert transport_ray_dwell(corner_square(0.5), 0.25, 0.0, 1.0) == pytest.approx(0.25, abs=1e-10)

    def test_wave_dwell_with_reflections(self):
        """Test a ray bouncing off s = 1 inside the first strip and off s = 0 inside the second."""
        region = switched(0.3)

        assert wave_ray_dwell(region, 0.95, 1, 0.0, 1.0) == pytest.approx(0.35, abs=1e-10)
        assert wave_ray_dwell(region, 0.95, 1, 0.0, 2.0) == pytest.approx(0.7, abs=1e-10)


class TestGeometricControl:
    """Tests for the geometric control condition."""

    def test_wide_switched_strip_controls(self):
        """Test that every ray meets strips of width 0.6."""
        verdict = gcc_check("wave", switched(0.6), m=128)

        assert verdict.holds
        assert verdict.witness is None
        assert verdict.min_dwell > 0

    def test_narrow_switched_strip_misses_middle_ray(self):
        """Test that the ray oscillating around s = 1/2 escapes strips of width 0.3."""
        verdict = gcc_check("wave", switched(0.3), m=129)

        assert not verdict.holds
        assert verdict.witness is not None
        assert verdict.min_dwell <= 1e-12

    def test_transport_null_set_breaks_control(self):
        """Test that J_a non-empty means an undamped characteristic."""
        assert gcc_check("transport", corner_square(0.75), m=128).holds
        assert not gcc_check("transport", corner_square(0.3), m=128).holds

    def test_rejects_analytic_region(self):
        """Test that ray tracing needs an indicator region."""
        region = analytic(lambda s, t: np.ones_like(s), 1.0)
        with pytest.raises(DomainError, match="indicator"):
            gcc_check("transport", region)


class TestKroneckerSweep:
    """Tests for time-rescaled regions over growing windows."""

    def test_commensurate_period_never_covers(self):
        """Test that period 2 keeps the middle ray undamped."""
        sweep = kronecker_sweep(switched(0.3), 2.0, max_windows=3, m=65)

        assert sweep.first_window is None
        assert len(sweep.uncovered) == 3
        assert all(count > 0 for count in sweep.uncovered)

    def test_controlling_region_covers_in_first_window(self):
        """Test immediate coverage when the condition already holds."""
        sweep = kronecker_sweep(switched(0.6), 2.0, max_windows=3, m=64)

        assert sweep.first_window == 1
        assert sweep.uncovered == (0,)
        assert sweep.period == 2.0
