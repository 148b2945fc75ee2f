"""
Tests for the errors module.

Run these tests with: pytest tests/unit/test_errors.py -v
"""

import pytest

from periodic_asymptotics.config import ConfigError
from periodic_asymptotics.errors import (
    CertificateError,
    ConvergenceError,
    DomainError,
    InvariantViolation,
    LinearityError,
    NumericalError,
    PeriodicAsymptoticsError,
)


class TestHierarchy:
    """Tests for the exception hierarchy."""

    @pytest.mark.parametrize(
        "error_type",
        [ConfigError, DomainError, NumericalError, ConvergenceError, LinearityError, InvariantViolation, CertificateError],
    )
    def test_all_errors_share_base(self, error_type):
        """
        Test that every error derives from the package base class.

        :param error_type: Exception class
        :ptype error_type: type
        """
        assert issubclass(error_type, PeriodicAsymptoticsError)

    def test_domain_error_is_value_error(self):
        """Test that DomainError can be caught as ValueError."""
        with pytest.raises(ValueError):
            raise DomainError("delta out of range")

    def test_config_error_is_not_numerical(self):
        """Test that configuration and numerical failures stay apart."""
        assert not issubclass(ConfigError, NumericalError)


class TestInvariantNames:
    """Tests for the invariant attribute carried by numerical errors."""

    def test_default_invariant(self):
        """Test default invariant name."""
        assert NumericalError("overflow").invariant == "numerical"

    def test_convergence_error_keeps_partial(self):
        """Test that the partial iterate is preserved."""
        error = ConvergenceError("stalled", partial=[1.0, 0.5])

        assert error.invariant == "convergence"
        assert error.partial == [1.0, 0.5]
        assert str(error) == "stalled"

    def test_linearity_error_keeps_defect(self):
        """Test that the superposition defect is preserved."""
        error = LinearityError("not linear", 0.25)

        assert error.invariant == "linearity"
        assert error.defect == 0.25

    def test_invariant_violation_names_invariant(self):
        """Test explicit invariant names."""
        assert InvariantViolation("norm grew", "contraction").invariant == "contraction"

    def test_certificate_error_keeps_certificate(self):
        """Test that checkpoints reached so far are preserved."""
        error = CertificateError("rate not reached", certificate=((1, 0.5),))

        assert error.invariant == "slow-data certificate"
        assert error.certificate == ((1, 0.5),)
