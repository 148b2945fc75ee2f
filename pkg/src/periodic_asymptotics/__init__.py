"""
Asymptotics of periodically damped evolution equations.

A numerical package providing:
- Exact and split-step solvers for damped transport and wave equations on (0, 1)
- Monodromy assembly with Ritt spectral diagnostics and ergodic projections
- Observability Gramians and ray tracing for the geometric control condition
- Convergence-rate measurement and constructors of exponential, polynomial,
  superpolynomial and arbitrarily slow data

Example usage::

    from periodic_asymptotics import corner_square, measure, setup_logging
    from periodic_asymptotics.transport import TransportState

    setup_logging(level="INFO")
    fit = measure("transport", corner_square(0.5), TransportState.ones(2048), 1000)
    print(fit.verdict, fit.gamma)
"""

from periodic_asymptotics.config import ConfigError, RunConfig, load_env_config, load_run_config
from periodic_asymptotics.errors import (
    CertificateError,
    ConvergenceError,
    DomainError,
    InvariantViolation,
    LinearityError,
    NumericalError,
    PeriodicAsymptoticsError,
)
from periodic_asymptotics.geometry import (
    DampingRegion,
    RegionKind,
    area,
    corner_square,
    diamond,
    line_average,
    ray_band,
    rectangle_union,
    switched,
)
from periodic_asymptotics.logging_config import get_logger, setup_logging
from periodic_asymptotics.observability import gcc_check, gramian, observability_constants
from periodic_asymptotics.pipeline import reproduce_example, run
from periodic_asymptotics.rates import Verdict, make_slow_data, measure
from periodic_asymptotics.spectral import MonodromyOperator, assemble, ergodic_projection, spectral_report

__version__ = "0.1.0"

__all__ = [
    "setup_logging",
    "get_logger",
    "load_env_config",
    "load_run_config",
    "RunConfig",
    "ConfigError",
    "PeriodicAsymptoticsError",
    "DomainError",
    "NumericalError",
    "ConvergenceError",
    "LinearityError",
    "InvariantViolation",
    "CertificateError",
    "DampingRegion",
    "RegionKind",
    "area",
    "corner_square",
    "diamond",
    "line_average",
    "ray_band",
    "rectangle_union",
    "switched",
    "MonodromyOperator",
    "assemble",
    "ergodic_projection",
    "spectral_report",
    "gramian",
    "observability_constants",
    "gcc_check",
    "measure",
    "make_slow_data",
    "Verdict",
    "run",
    "reproduce_example",
]
