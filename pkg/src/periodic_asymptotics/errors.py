"""
Exception hierarchy for periodic_asymptotics.

Every numerical failure names the invariant it violated so the command line
front-end can report it and exit with status 3. Configuration problems live
in :mod:`periodic_asymptotics.config` and map to exit status 2.
"""

from typing import Any


class PeriodicAsymptoticsError(Exception):
    """Base class for all errors raised by this package."""

    pass


class DomainError(PeriodicAsymptoticsError, ValueError):
    """Raised when an argument lies outside the domain of an operation."""

    pass


class NumericalError(PeriodicAsymptoticsError):
    """
    Raised when a numerical computation fails or breaks an invariant.

    :param message: Human readable description
    :ptype message: str
    :param invariant: Short name of the violated invariant
    :ptype invariant: str
    """

    def __init__(self, message: str, invariant: str = "numerical"):
        """
        Initialize numerical error.

        :param message: Human readable description
        :ptype message: str
        :param invariant: Short name of the violated invariant
        :ptype invariant: str
        """
        super().__init__(message)
        self.invariant = invariant


class ConvergenceError(NumericalError):
    """
    Raised when an iteration stops before meeting its tolerance.

    The best available iterate is kept in :attr:`partial`.
    """

    def __init__(self, message: str, partial: Any = None, invariant: str = "convergence"):
        """
        Initialize convergence error.

        :param message: Human readable description
        :ptype message: str
        :param partial: Partial result reached before giving up
        :ptype partial: Any
        :param invariant: Short name of the violated invariant
        :ptype invariant: str
        """
        super().__init__(message, invariant)
        self.partial = partial


class LinearityError(NumericalError):
    """Raised when a solver handed to the assembler is not linear."""

    def __init__(self, message: str, defect: float):
        """
        Initialize linearity error.

        :param message: Human readable description
        :ptype message: str
        :param defect: Measured relative superposition defect
        :ptype defect: float
        """
        super().__init__(message, "linearity")
        self.defect = defect


class InvariantViolation(NumericalError):
    """Raised when a computed object fails one of its stated invariants."""

    pass


class CertificateError(NumericalError):
    """
    Raised when slow initial data cannot meet the requested rate.

    The checkpoints reached so far are kept in :attr:`certificate`.
    """

    def __init__(self, message: str, certificate: Any = None):
        """
        Initialize certificate error.

        :param message: Human readable description
        :ptype message: str
        :param certificate: Partial checkpoint certificate
        :ptype certificate: Any
        """
        super().__init__(message, "slow-data certificate")
        self.certificate = certificate
