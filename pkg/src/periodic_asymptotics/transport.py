"""
Periodically damped transport z_t = z_s - b(s, t) z on (0, 1) with periodic
boundary conditions.

Along the characteristic through x(c) the solution is
z(s, t) = x(s + t) exp(-integral_0^t b(s + t - r, r) dr), so over one period
the evolution is multiplication by m = exp(-a) with a the line average of b.
"""

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import logsumexp

from periodic_asymptotics.errors import DomainError
from periodic_asymptotics.geometry import (
    DampingRegion,
    LineAverageProfile,
    cell_centers,
    characteristic_breaks,
    line_average,
    line_integral,
)
from periodic_asymptotics.logging_config import get_logger

logger = get_logger(__name__)

DIVERGENCE_CAP = 1e12
REFINEMENT_TOL = 0.1
REFINEMENT_LEVELS = 6

_NODES, _WEIGHTS = leggauss(16)


@dataclass(frozen=True)
class TransportState:
    """Cell values of x in L2(0, 1) on the grid (i + 1/2) / N."""

    values: np.ndarray

    @property
    def n(self) -> int:
        """Number of cells."""
        return len(self.values)

    @property
    def spacing(self) -> float:
        """Cell width."""
        return 1.0 / self.n

    @property
    def grid(self) -> np.ndarray:
        """Cell centres."""
        return cell_centers(self.n)

    def norm(self) -> float:
        """
        Discrete L2(0, 1) norm.

        :return: sqrt(ds * sum |x_i|^2)
        :rtype: float
        """
        return float(np.sqrt(self.spacing * np.sum(np.abs(self.values) ** 2)))

    def inner(self, other: "TransportState") -> complex | float:
        """
        Discrete L2 inner product, conjugate-linear in the second slot.

        :param other: State on the same grid
        :ptype other: TransportState
        :return: ds * sum x_i conj(y_i)
        :rtype: complex | float
        """
        return self.spacing * np.sum(self.values * np.conj(other.values))

    @classmethod
    def zeros(cls, n: int) -> "TransportState":
        """
        Zero state.

        :param n: Number of cells
        :ptype n: int
        :return: State x = 0
        :rtype: TransportState
        """
        return cls(np.zeros(n))

    @classmethod
    def ones(cls, n: int) -> "TransportState":
        """
        Constant state x = 1.

        :param n: Number of cells
        :ptype n: int
        :return: State x = 1
        :rtype: TransportState
        """
        return cls(np.ones(n))

    @classmethod
    def from_function(cls, func: Callable[[np.ndarray], np.ndarray], n: int) -> "TransportState":
        """
        Sample function at cell centres.

        :param func: Vectorised function on (0, 1)
        :ptype func: Callable[[np.ndarray], np.ndarray]
        :param n: Number of cells
        :ptype n: int
        :return: Sampled state
        :rtype: TransportState
        """
        return cls(np.asarray(func(cell_centers(n))))


@dataclass(frozen=True)
class TransportMonodromy:
    """Monodromy U(1, 0) as the multiplier m = exp(-a) per cell."""

    multipliers: np.ndarray
    profile: LineAverageProfile

    @property
    def n(self) -> int:
        """Number of cells."""
        return len(self.multipliers)

    @property
    def line_average(self) -> np.ndarray:
        """Cell values of a."""
        return self.profile.values

    def apply(self, x: TransportState, power: int = 1) -> TransportState:
        """
        Apply T^power.

        :param x: State
        :ptype x: TransportState
        :param power: Non-negative exponent
        :ptype power: int
        :return: T^power x
        :rtype: TransportState
        """
        return TransportState(x.values * np.exp(-power * self.profile.values))


def _check_unit_period(region: DampingRegion) -> None:
    """Transport is posed with 1-periodic damping."""
    if not math.isclose(region.period, 1.0):
        raise DomainError(f"transport needs a 1-periodic region, got period {region.period:g}")


def solve(region: DampingRegion, x: TransportState, t: float) -> TransportState:
    """
    Exact solution z(., t) at cell centres.

    The shift is an index rotation when t * N is an integer and periodic
    linear interpolation otherwise.

    :param region: 1-periodic damping region
    :ptype region: DampingRegion
    :param x: Initial state
    :ptype x: TransportState
    :param t: Time, t >= 0
    :ptype t: float
    :return: State at time t
    :rtype: TransportState
    :raises DomainError: If t < 0 or the region is not 1-periodic

    Example::

        >>> z = solve(corner_square(0.5), TransportState.ones(256), 1.0)
        >>> bool(np.all(z.values <= 1.0))
        True
    """
    _check_unit_period(region)
    if t < 0:
        raise DomainError(f"t must be non-negative, got {t}")
    n, grid = x.n, x.grid
    steps = t * n
    if math.isclose(steps, round(steps), abs_tol=1e-9):
        shifted = np.roll(x.values, -int(round(steps)) % n)
    else:
        xp = np.concatenate((grid - 1.0, grid, grid + 1.0))
        fp = np.tile(x.values, 3)
        target = np.mod(grid + t, 1.0)
        if np.iscomplexobj(fp):
            shifted = np.interp(target, xp, fp.real) + 1j * np.interp(target, xp, fp.imag)
        else:
            shifted = np.interp(target, xp, fp)
    if region.amplitude == 0.0 or t == 0.0:
        return TransportState(shifted)
    damping = np.array([line_integral(region, float(s) + t, 0.0, t) for s in grid])
    return TransportState(shifted * np.exp(-damping))


def monodromy(region: DampingRegion, n: int) -> TransportMonodromy:
    """
    Multiplication operator T = U(1, 0).

    :param region: 1-periodic damping region
    :ptype region: DampingRegion
    :param n: Number of cells
    :ptype n: int
    :return: Diagonal monodromy with multipliers exp(-a)
    :rtype: TransportMonodromy
    """
    _check_unit_period(region)
    profile = line_average(region, n)
    multipliers = np.exp(-profile.values)
    multipliers[profile.null_mask] = 1.0
    logger.debug("Transport monodromy on %d cells, |J_a| = %.4f", n, profile.null_mask.mean())
    return TransportMonodromy(multipliers, profile)


def fixed_projection(monodromy_op: TransportMonodromy, x: TransportState) -> TransportState:
    """
    Orthogonal projection onto Fix T, multiplication by the indicator of J_a.

    :param monodromy_op: Transport monodromy
    :ptype monodromy_op: TransportMonodromy
    :param x: State
    :ptype x: TransportState
    :return: 1_{J_a} x
    :rtype: TransportState
    """
    return TransportState(np.where(monodromy_op.profile.null_mask, x.values, 0.0))


def _log_power_terms(monodromy_op: TransportMonodromy, x: TransportState, n: int, active_only: bool) -> np.ndarray:
    """Log of |x_i|^2 times the integral of exp(-2 n a) over each affine subinterval."""
    if n < 0:
        raise DomainError(f"power must be non-negative, got {n}")
    cells = monodromy_op.profile.partition
    magnitude = np.abs(x.values)[cells.cell]
    keep = magnitude > 0
    if active_only:
        keep &= cells.active
    if not np.any(keep):
        return np.empty(0)
    return 2.0 * np.log(magnitude[keep]) + cells.log_decay(n)[keep]


def power_norm(monodromy_op: TransportMonodromy, x: TransportState, n: int) -> float:
    """
    Norm of T^n x for piecewise-constant x, evaluated in log space.

    Each cell contributes |x_i|^2 times the exact integral of exp(-2 n a)
    over the cell, with a affine between its kinks.

    :param monodromy_op: Transport monodromy
    :ptype monodromy_op: TransportMonodromy
    :param x: State
    :ptype x: TransportState
    :param n: Non-negative power
    :ptype n: int
    :return: ||T^n x||
    :rtype: float
    :raises DomainError: If n is negative

    Example::

        >>> op = monodromy(corner_square(0.5), 2048)
        >>> round(power_norm(op, TransportState.ones(2048), 1000) ** 2 * 1000, 4)
        1.0
    """
    terms = _log_power_terms(monodromy_op, x, n, active_only=False)
    return float(np.exp(0.5 * logsumexp(terms))) if terms.size else 0.0


def distance_to_fixed(monodromy_op: TransportMonodromy, x: TransportState, n: int) -> float:
    """
    Norm of T^n (x - P x) with P the multiplication by the indicator of {a = 0}.

    :param monodromy_op: Transport monodromy
    :ptype monodromy_op: TransportMonodromy
    :param x: State
    :ptype x: TransportState
    :param n: Non-negative power
    :ptype n: int
    :return: ||T^n x - P x||
    :rtype: float
    :raises DomainError: If n is negative
    """
    terms = _log_power_terms(monodromy_op, x, n, active_only=True)
    return float(np.exp(0.5 * logsumexp(terms))) if terms.size else 0.0


def decay_series(monodromy_op: TransportMonodromy, x: TransportState, horizon: int, stride: int = 1) -> np.ndarray:
    """
    Rows (step, ||T^n x||, ||T^n x - P x||) for n = 0, stride, ..., horizon.

    :param monodromy_op: Transport monodromy
    :ptype monodromy_op: TransportMonodromy
    :param x: State
    :ptype x: TransportState
    :param horizon: Last power
    :ptype horizon: int
    :param stride: Step between rows
    :ptype stride: int
    :return: Array of shape (rows, 3)
    :rtype: np.ndarray
    """
    steps = np.arange(0, horizon + 1, stride)
    return np.array(
        [[k, power_norm(monodromy_op, x, int(k)), distance_to_fixed(monodromy_op, x, int(k))] for k in steps]
    )


@dataclass(frozen=True)
class RateClass:
    """
    Outcome of the membership test a^(-gamma) 1_{I_a} x in L2.

    ``verdict`` is 'member', 'non_member' or 'inconclusive'; ``integrals``
    holds the discrete integrals on the successive grids.
    """

    verdict: str
    integral: float
    integrals: tuple[float, ...]
    cells: tuple[int, ...]

    @property
    def member(self) -> bool:
        """True when the weighted norm converged."""
        return self.verdict == "member"


def _weighted_integral(profile: LineAverageProfile, x: np.ndarray, gamma: float) -> float:
    """Midpoint sum of a^(-2 gamma) |x|^2 over I_a."""
    active = profile.active_mask
    if not np.any(active):
        return 0.0
    terms = np.abs(x[active]) ** 2 * profile.values[active] ** (-2.0 * gamma)
    return float(np.sum(terms) * profile.spacing)


def rate_class(
    monodromy_op: TransportMonodromy,
    x: TransportState | Callable[[np.ndarray], np.ndarray],
    gamma: float,
    levels: int = REFINEMENT_LEVELS,
) -> RateClass:
    """
    Decide whether a^(-gamma) 1_{I_a} x lies in L2 by grid refinement.

    The cell count doubles each level. Convergence is declared when two
    successive refinements change the integral by at most 10 %; divergence
    when the integral exceeds 1e12 or its increments stop shrinking.
    A function x is resampled on every grid, a state is refined piecewise
    constantly.

    :param monodromy_op: Transport monodromy on the coarsest grid
    :ptype monodromy_op: TransportMonodromy
    :param x: Initial data as state or vectorised function
    :ptype x: TransportState | Callable[[np.ndarray], np.ndarray]
    :param gamma: Positive exponent
    :ptype gamma: float
    :param levels: Maximum number of grids
    :ptype levels: int
    :return: Verdict and integrals
    :rtype: RateClass
    :raises DomainError: If gamma is not positive
    """
    if not gamma > 0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    region = monodromy_op.profile.region
    base = monodromy_op.n
    integrals: list[float] = []
    cells: list[int] = []
    verdict = "inconclusive"
    for level in range(levels):
        n = base * 2**level
        profile = monodromy_op.profile if level == 0 else line_average(region, n)
        if callable(x):
            values = np.asarray(x(cell_centers(n)))
        else:
            values = np.repeat(x.values, 2**level)
        integrals.append(_weighted_integral(profile, values, gamma))
        cells.append(n)
        current = integrals[-1]
        if current > DIVERGENCE_CAP:
            verdict = "non_member"
            break
        if len(integrals) < 3:
            continue
        d0 = abs(integrals[-2] - integrals[-3])
        d1 = abs(current - integrals[-2])
        if d0 <= REFINEMENT_TOL * abs(integrals[-2]) and d1 <= REFINEMENT_TOL * abs(current):
            verdict = "member"
            break
        if d1 >= 0.95 * d0 and d1 > REFINEMENT_TOL * abs(current):
            verdict = "non_member"
            break
    if verdict == "inconclusive":
        logger.warning("rate_class(gamma=%g) inconclusive after %d grids: %s", gamma, len(integrals), integrals)
    else:
        logger.debug("rate_class(gamma=%g) -> %s on grids %s", gamma, verdict, cells)
    return RateClass(verdict, integrals[-1], tuple(integrals), tuple(cells))


@dataclass(frozen=True)
class EnergyBalance:
    """Both sides of (||x||^2 - ||T^n x||^2) / 2 = integral of ||b^(1/2) z||^2."""

    lhs: float
    rhs: float

    @property
    def residual(self) -> float:
        """Relative mismatch of the two sides."""
        scale = max(abs(self.lhs), abs(self.rhs))
        return abs(self.lhs - self.rhs) / scale if scale > 0 else 0.0


def _dissipation_weight(region: DampingRegion, c: float, horizon: float) -> float:
    """Integral over (0, horizon) of b e^(-2A) along the characteristic c."""
    breaks = characteristic_breaks(region, c, 0.0, horizon)
    total, accumulated = 0.0, 0.0
    for ra, rb in zip(breaks[:-1], breaks[1:], strict=False):
        half = 0.5 * (rb - ra)
        nodes = 0.5 * (ra + rb) + half * _NODES
        k = math.floor(c - 0.5 * (ra + rb))
        b_nodes = region.evaluate(c - nodes - k, nodes)
        # A at each node by a nested rule on [ra, node]
        inner_half = 0.5 * (nodes - ra)
        inner = 0.5 * (nodes + ra)[:, None] + inner_half[:, None] * _NODES[None, :]
        partial = (region.evaluate(c - inner - k, inner) @ _WEIGHTS) * inner_half
        total += float(np.sum(b_nodes * np.exp(-2.0 * (accumulated + partial)) * _WEIGHTS) * half)
        accumulated += float(np.sum(b_nodes * _WEIGHTS) * half)
    return total


def energy_balance(region: DampingRegion, x: TransportState, n: int) -> EnergyBalance:
    """
    Energy identity over n periods.

    The right side is computed per characteristic by Gauss-Legendre
    quadrature of b e^(-2A), independently of the multipliers.

    :param region: 1-periodic damping region
    :ptype region: DampingRegion
    :param x: Initial state
    :ptype x: TransportState
    :param n: Number of periods
    :ptype n: int
    :return: Left and right sides
    :rtype: EnergyBalance
    """
    _check_unit_period(region)
    # both sides along the characteristics through the cell centres
    centre = line_average(region, x.n).at(x.grid)
    decayed = x.spacing * float(np.sum(np.abs(x.values) ** 2 * np.exp(-2.0 * n * centre)))
    lhs = 0.5 * (x.norm() ** 2 - decayed)
    if n == 0 or region.amplitude == 0.0:
        return EnergyBalance(lhs, 0.0)
    weights = np.array([_dissipation_weight(region, float(c), float(n)) for c in x.grid])
    rhs = float(x.spacing * np.sum(np.abs(x.values) ** 2 * weights))
    return EnergyBalance(lhs, rhs)


class TransportCoordinates:
    """Orthonormal coordinates sqrt(ds) x_i of the discrete L2 space."""

    def __init__(self, n: int):
        """
        Initialize coordinates.

        :param n: Number of cells
        :ptype n: int
        """
        self.n = n
        self.scale = math.sqrt(1.0 / n)

    @property
    def dimension(self) -> int:
        """Number of coordinates."""
        return self.n

    def encode(self, state: TransportState) -> np.ndarray:
        """
        State to coordinates.

        :param state: Transport state
        :ptype state: TransportState
        :return: Coordinate vector
        :rtype: np.ndarray
        """
        return self.scale * np.asarray(state.values)

    def decode(self, coords: np.ndarray) -> TransportState:
        """
        Coordinates to state.

        :param coords: Coordinate vector
        :ptype coords: np.ndarray
        :return: Transport state
        :rtype: TransportState
        """
        return TransportState(np.asarray(coords) / self.scale)


class TransportSolver:
    """One-period solver whose monodromy is the multiplier exp(-a)."""

    inner_product = "L2"
    multiplicative = True

    def __init__(self, region: DampingRegion, n: int):
        """
        Initialize solver.

        :param region: 1-periodic damping region
        :ptype region: DampingRegion
        :param n: Number of cells
        :ptype n: int
        """
        _check_unit_period(region)
        self.region = region
        self.period = region.period
        self.spacing = 1.0 / n
        self.monodromy = monodromy(region, n)
        self._coordinates = TransportCoordinates(n)

    @property
    def coordinates(self) -> TransportCoordinates:
        """Orthonormal L2 coordinates."""
        return self._coordinates

    def propagate(self, coords: np.ndarray) -> np.ndarray:
        """
        Apply one period; the characteristic shift by one period is the identity.

        :param coords: Array of shape (n,) or (n, k)
        :ptype coords: np.ndarray
        :return: Propagated coordinates
        :rtype: np.ndarray
        """
        coords = np.asarray(coords)
        factors = self.monodromy.multipliers
        return factors * coords if coords.ndim == 1 else factors[:, None] * coords

    def multipliers(self) -> np.ndarray:
        """
        Monodromy diagonal.

        :return: exp(-a) per cell
        :rtype: np.ndarray
        """
        return self.monodromy.multipliers
