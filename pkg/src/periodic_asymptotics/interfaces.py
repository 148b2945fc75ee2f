"""
Interface definitions for periodic_asymptotics package.

This module contains protocol and ABC definitions that establish
contracts for configuration providers, evolution solvers, state
coordinates and log formatters.
"""

import logging
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Protocol, runtime_checkable

import numpy as np


class ConfigProvider(Protocol):
    """
    Protocol for configuration providers.

    Protocol defines interface that all configuration providers must
    implement. Enables dependency injection and testability by allowing
    different config sources (environment variables, files, etc.).

    Example implementations:
    - EnvConfigProvider: From environment variables (default)
    """

    def get(self, name: str, default: str | None = None) -> str | None:
        """
        Get raw setting value.

        :param name: Setting name without prefix (e.g. 'OUTPUT_ROOT')
        :ptype name: str
        :param default: Value returned when setting is absent
        :ptype default: str | None
        :return: Setting string, or default
        :rtype: str | None
        """
        ...

    def get_output_root(self) -> Path:
        """
        Get default output root directory.

        :return: Output root path
        :rtype: Path
        """
        ...

    def get_seed(self) -> int:
        """
        Get default random seed.

        :return: Non-negative seed
        :rtype: int
        :raises ConfigError: If setting is not a non-negative integer
        """
        ...

    def get_cell_count(self) -> int:
        """
        Get default number of grid cells.

        :return: Cell count (power of two)
        :rtype: int
        :raises ConfigError: If setting is not an admissible cell count
        """
        ...


@runtime_checkable
class StateCoordinates(Protocol):
    """
    Protocol for orthonormal coordinates of a discrete state space.

    Coordinates are orthonormal for the state space inner product, so
    Euclidean norms of coordinate vectors are state norms and matrices
    acting on coordinates have their spectral norm as operator norm.
    """

    @property
    def dimension(self) -> int:
        """Number of real coordinates."""
        ...

    def encode(self, state: Any) -> np.ndarray:
        """
        Map state to its coordinate vector.

        :param state: State object of the matching system
        :ptype state: Any
        :return: Coordinate vector of length dimension
        :rtype: np.ndarray
        """
        ...

    def decode(self, coords: np.ndarray) -> Any:
        """
        Map coordinate vector back to a state.

        :param coords: Coordinate vector of length dimension
        :ptype coords: np.ndarray
        :return: State object of the matching system
        :rtype: Any
        """
        ...


@runtime_checkable
class EvolutionSolver(Protocol):
    """
    Protocol for one-period solvers of a periodic evolution equation.

    Implementations propagate batches of coordinate vectors over one
    period of the damping coefficient. Solvers whose monodromy is a
    multiplication operator declare it through ``multiplicative`` and
    expose the multipliers directly.

    Example implementations:
    - TransportSolver: characteristic rotation plus exact damping factor
    - WaveSolver: Strang splitting in Riemann variables
    """

    period: float
    spacing: float
    inner_product: str
    multiplicative: bool

    @property
    def coordinates(self) -> StateCoordinates:
        """Coordinates in which propagate acts."""
        ...

    def propagate(self, coords: np.ndarray) -> np.ndarray:
        """
        Propagate coordinate vectors over one period.

        :param coords: Array of shape (dimension,) or (dimension, k)
        :ptype coords: np.ndarray
        :return: Propagated array of same shape
        :rtype: np.ndarray
        """
        ...

    def multipliers(self) -> np.ndarray:
        """
        Diagonal of the monodromy when solver is multiplicative.

        :return: Multipliers in coordinate order
        :rtype: np.ndarray
        :raises NotImplementedError: If solver is not multiplicative
        """
        ...


class LogFormatter(ABC):
    """
    Abstract base class for log formatters.

    ABC defines interface that all log formatters must implement.
    Enables different formatting strategies while maintaining
    consistent interface.

    Example implementations:
    - CustomFormatter: Enhanced format with project context (default)
    """

    @abstractmethod
    def format(self, record: logging.LogRecord) -> str:
        """
        Format log record into string.

        Subclasses must implement this method to define their
        formatting strategy. Typically, they will enhance
        LogRecord with additional attributes before calling
        parent format() method.

        :param record: Log record to format
        :ptype record: logging.LogRecord
        :return: Formatted log string
        :rtype: str
        """
        pass
