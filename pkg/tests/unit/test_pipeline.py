"""
Tests for the pipeline module.

Covers configured runs, initial data, error translation and example
reproduction.

Run these tests with: pytest tests/unit/test_pipeline.py -v
"""

import numpy as np
import pytest

from periodic_asymptotics.config import ConfigError, build_run_config, load_run_config
from periodic_asymptotics.errors import DomainError
from periodic_asymptotics.pipeline import RunContext, initial_coords, reproduce_example, run
from periodic_asymptotics.reporting import ClaimStatus, Report, read_csv


def _config(tmp_path, **overrides):
    """Run configuration from keyword overrides; '__' in a key stands for '.'."""
    raw = {
        "system": "transport",
        "n": "64",
        "horizon": "20",
        "tasks": "monodromy",
        "output": "out",
        "region.kind": "corner_square",
        "region.delta": "0.3",
    }
    raw.update({key.replace("__", "."): value for key, value in overrides.items()})
    return build_run_config(raw, base_dir=tmp_path)


def _claim(report, name):
    """Claim of a report by name."""
    return next(claim for claim in report.claims if claim.name == name)


class TestRun:
    """Tests for executing configured runs."""

    def test_transport_run_writes_artifacts(self, temp_run_config):
        """
        Test report and CSV files of a transport run.

        :param temp_run_config: Pytest fixture providing a run file
        :ptype temp_run_config: Path
        """
        config = load_run_config(temp_run_config)

        result = run(config)

        names = {path.name for path in result.files}
        assert result.output_dir == temp_run_config.parent / "out"
        assert {"report.txt", "monodromy.csv", "eigenvalues.csv", "resolvent.csv", "kt_profile.csv", "rates.csv"} <= names
        text = (result.output_dir / "report.txt").read_text(encoding="utf-8")
        for heading in ("[config]", "[monodromy]", "[spectrum]", "[rates]"):
            assert heading in text
        assert "unit_circle_violations: 0" in text
        assert not result.report.failed

    def test_rates_csv_is_monotone(self, temp_run_config):
        """
        Test the distance column of rates.csv.

        :param temp_run_config: Pytest fixture providing a run file
        :ptype temp_run_config: Path
        """
        result = run(load_run_config(temp_run_config))

        header, rows = read_csv(result.output_dir / "rates.csv")
        distances = np.array([float(row[2]) for row in rows])

        assert header == ["n", "t", "distance"]
        assert len(rows) == 41
        assert np.all(np.diff(distances) <= 0.0)

    def test_observability_and_gcc(self, tmp_path):
        """
        Test observability and ray tracing sections of a transport run.

        :param tmp_path: Pytest fixture providing temporary directory
        :ptype tmp_path: Path
        """
        config = _config(tmp_path, tasks="observability,gcc", gcc__rays="128")

        text = run(config).report.render()

        assert "[observability]" in text
        assert "sandwich_holds: true" in text
        assert "[gcc]\nholds: false" in text

    def test_wave_simulation(self, tmp_path):
        """
        Test the damped wave trajectory task.

        :param tmp_path: Pytest fixture providing temporary directory
        :ptype tmp_path: Path
        """
        config = _config(
            tmp_path,
            system="wave",
            horizon="2",
            tasks="simulate,monodromy",
            region__kind="switched",
            region__delta="0.6",
            initial__data="sine",
        )

        result = run(config)

        header, rows = read_csv(result.output_dir / "trajectory.csv")
        assert header == ["t", "energy", "dist_to_periodic"]
        assert len(rows) == 5
        assert (result.output_dir / "snapshot_u.csv").exists()
        assert "inner_product: energy" in result.report.render()

    @pytest.mark.slow
    def test_corner_slow_run_file(self, project_root, tmp_path):
        """
        Test that the slow-data run file runs through and writes its certificate.

        :param project_root: Pytest fixture providing project root directory
        :ptype project_root: Path
        :param tmp_path: Pytest fixture providing temporary directory
        :ptype tmp_path: Path
        """
        overrides = {"n": "256", "horizon": "200", "output": str(tmp_path)}
        config = load_run_config(project_root / "runs" / "corner_slow.cfg", overrides)

        result = run(config)

        assert (tmp_path / "slow_certificate.csv").exists()
        assert "slow_certificate: true" in result.report.render()
        assert not result.report.failed

    def test_domain_error_becomes_config_error(self, tmp_path):
        """
        Test that slow data in the exponential regime is reported as a configuration problem.

        :param tmp_path: Pytest fixture providing temporary directory
        :ptype tmp_path: Path
        """
        config = _config(tmp_path, tasks="rates", region__delta="0.75", initial__data="slow", initial__levels="4")

        with pytest.raises(ConfigError, match="task rates"):
            run(config)


class TestInitialData:
    """Tests for initial data construction."""

    def test_operator_is_cached(self, tmp_path):
        """
        Test lazy shared objects.

        :param tmp_path: Pytest fixture providing temporary directory
        :ptype tmp_path: Path
        """
        ctx = RunContext(_config(tmp_path), Report("t"))
        assert ctx.operator() is ctx.operator()

    def test_builtin_ones(self, tmp_path):
        """
        Test the constant profile in L2 coordinates.

        :param tmp_path: Pytest fixture providing temporary directory
        :ptype tmp_path: Path
        """
        ctx = RunContext(_config(tmp_path, initial__data="ones"), Report("t"))
        assert np.linalg.norm(initial_coords(ctx)) == pytest.approx(1.0)

    def test_file_data(self, tmp_path):
        """
        Test data read from a whitespace separated file.

        :param tmp_path: Pytest fixture providing temporary directory
        :ptype tmp_path: Path
        """
        values = np.linspace(0.0, 1.0, 64)
        np.savetxt(tmp_path / "x.txt", values)
        ctx = RunContext(_config(tmp_path, initial__data="file", initial__file="x.txt"), Report("t"))

        assert np.allclose(ctx.state().values, values)

    def test_file_with_wrong_length(self, tmp_path):
        """
        Test that a file with the wrong number of values is rejected.

        :param tmp_path: Pytest fixture providing temporary directory
        :ptype tmp_path: Path
        """
        np.savetxt(tmp_path / "x.txt", np.ones(10))
        ctx = RunContext(_config(tmp_path, initial__data="file", initial__file="x.txt"), Report("t"))

        with pytest.raises(ConfigError, match="needs 64"):
            initial_coords(ctx)

    def test_random_data_is_seeded(self, tmp_path):
        """
        Test reproducible random data.

        :param tmp_path: Pytest fixture providing temporary directory
        :ptype tmp_path: Path
        """
        first = initial_coords(RunContext(_config(tmp_path, seed="5"), Report("t")))
        second = initial_coords(RunContext(_config(tmp_path, seed="5"), Report("t")))

        assert np.array_equal(first, second)


class TestReproduceExample:
    """Tests for canonical example reproduction."""

    @pytest.mark.slow
    def test_stable_corner_square(self, tmp_path):
        """
        Test that every claim of the stable corner square passes.

        :param tmp_path: Pytest fixture providing temporary directory
        :ptype tmp_path: Path
        """
        report = reproduce_example("4.2", delta=0.75, n=256, output_dir=tmp_path)

        assert not report.failed
        assert all(claim.status is ClaimStatus.PASS for claim in report.claims)
        header, rows = read_csv(tmp_path / "claims.csv")
        assert header == ["claim", "predicted", "observed", "status", "module"]
        assert len(rows) == len(report.claims)
        assert (tmp_path / "report.txt").exists()

    def test_seed_defaults_to_environment(self, mock_env_vars, tmp_path):
        """
        Test that the example seed falls back to PERIODICASYM_SEED.

        :param mock_env_vars: Pytest fixture providing mocked environment variables
        :ptype mock_env_vars: None
        :param tmp_path: Pytest fixture providing temporary directory
        :ptype tmp_path: Path
        """
        report = reproduce_example("4.2", delta=0.75, n=64, output_dir=tmp_path)

        assert "seed: 7" in report.render()

    def test_unknown_example(self, tmp_path):
        """
        Test example validation.

        :param tmp_path: Pytest fixture providing temporary directory
        :ptype tmp_path: Path
        """
        with pytest.raises(DomainError, match="example must be one of"):
            reproduce_example("9.9", output_dir=tmp_path)

    def test_ray_band_delta_domain(self, tmp_path):
        """
        Test that the ray-band example needs delta below 1/2.

        :param tmp_path: Pytest fixture providing temporary directory
        :ptype tmp_path: Path
        """
        with pytest.raises(DomainError):
            reproduce_example("5.1", delta=0.6, output_dir=tmp_path)

    @pytest.mark.slow
    @pytest.mark.parametrize(
        ("delta", "stable"),
        [(0.1, ClaimStatus.FAIL_AS_EXPECTED), (0.3, ClaimStatus.FAIL_AS_EXPECTED), (1.0, ClaimStatus.PASS)],
    )
    def test_corner_square_claims(self, tmp_path, delta, stable):
        """
        Test the corner square claims below, at and above the stability threshold.

        :param tmp_path: Pytest fixture providing temporary directory
        :ptype tmp_path: Path
        :param delta: Half width of the corner square
        :ptype delta: float
        :param stable: Expected status of the stability claim
        :ptype stable: ClaimStatus
        """
        report = reproduce_example("4.2", delta=delta, n=256, output_dir=tmp_path)

        assert _claim(report, "stable").status is stable
        assert _claim(report, "mass conservation").status is ClaimStatus.PASS
        assert _claim(report, "exponential convergence").status is not ClaimStatus.FAIL

    @pytest.mark.slow
    def test_diamond_off_grid(self, tmp_path):
        """
        Test the diamond when its corners fall inside cells.

        :param tmp_path: Pytest fixture providing temporary directory
        :ptype tmp_path: Path
        """
        report = reproduce_example("4.1", delta=0.1, n=1024, output_dir=tmp_path)

        assert _claim(report, "mass conservation").status is ClaimStatus.PASS
        assert _claim(report, "published closed form matches quadrature").status is ClaimStatus.INFO

    @pytest.mark.slow
    @pytest.mark.parametrize("delta", [0.1, 0.25, 0.4])
    def test_ray_band_projections(self, tmp_path, delta):
        """
        Test the explicit ray-band projection on twenty random states.

        :param tmp_path: Pytest fixture providing temporary directory
        :ptype tmp_path: Path
        :param delta: Half width of the band
        :ptype delta: float
        """
        report = reproduce_example("5.1", delta=delta, n=1024, output_dir=tmp_path)

        for name in (
            "explicit and ergodic projections agree",
            "projected states undamped",
            "projection idempotent",
            "projection orthogonal",
        ):
            assert _claim(report, name).status is ClaimStatus.PASS, name
        assert not report.failed

    @pytest.mark.slow
    @pytest.mark.parametrize("delta", [0.5, 0.6, 1.0])
    def test_switched_strips_are_stable(self, tmp_path, delta):
        """
        Test that switched strips of width at least 1/2 leave no undamped states.

        :param tmp_path: Pytest fixture providing temporary directory
        :ptype tmp_path: Path
        :param delta: Strip width
        :ptype delta: float
        """
        report = reproduce_example("5.2", delta=delta, output_dir=tmp_path)

        assert _claim(report, "stable").status is ClaimStatus.PASS
