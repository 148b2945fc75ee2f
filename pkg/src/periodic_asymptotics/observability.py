"""
Observability of the damping through the undamped group, and the geometric
control condition.

The Gramian G satisfies <G x, x> = integral over one period of
||B(t)* T0(t) x||^2 in orthonormal state coordinates. For the wave equation
this is the quadratic form of a weighted graph Laplacian on the Riemann loop:
at each step the velocity in cell i is half the difference of two loop
entries.
"""

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import linalg

from periodic_asymptotics.errors import DomainError, InvariantViolation
from periodic_asymptotics.geometry import (
    DampingRegion,
    cell_centers,
    line_average,
    operator_norm_integral,
    polygons,
    segment_integral,
)
from periodic_asymptotics.logging_config import get_logger, log_duration
from periodic_asymptotics.spectral import ProjectionResult
from periodic_asymptotics.transport import TransportState, energy_balance
from periodic_asymptotics.wave import EnergyCoordinates, WaveState, damped_evolution

logger = get_logger(__name__)

SYSTEMS = ("transport", "wave")
SANDWICH_SLACK = 1.05
DWELL_TOL = 1e-12
DEFAULT_RAYS = 4096

_NODES, _WEIGHTS = leggauss(16)


@dataclass(frozen=True)
class Gramian:
    """
    Observability Gramian in orthonormal coordinates.

    Transport Gramians are diagonal (``diagonal`` set); wave Gramians are
    dense symmetric matrices of size 2N - 1.
    """

    system: str
    n: int
    n_t: int
    matrix: np.ndarray | None = None
    diagonal: np.ndarray | None = None

    def dense(self) -> np.ndarray:
        """
        Dense matrix.

        :return: Symmetric positive semidefinite matrix
        :rtype: np.ndarray
        """
        return np.diag(self.diagonal) if self.diagonal is not None else self.matrix

    def quadratic_form(self, coords: np.ndarray) -> float:
        """
        Value <G x, x>.

        :param coords: Coordinate vector
        :ptype coords: np.ndarray
        :return: Observed energy
        :rtype: float
        """
        coords = np.asarray(coords)
        if self.diagonal is not None:
            return float(np.sum(self.diagonal * np.abs(coords) ** 2))
        return float(np.real(np.conj(coords) @ self.matrix @ coords))


def _check_system(system: str, region: DampingRegion) -> None:
    """Region period must match the system."""
    if system not in SYSTEMS:
        raise DomainError(f"system must be one of {SYSTEMS}, got {system!r}")
    expected = 1.0 if system == "transport" else 2.0
    if not math.isclose(region.period, expected):
        raise DomainError(f"{system} needs a region of period {expected:g}, got {region.period:g}")


def transport_gramian_quadrature(region: DampingRegion, n: int, n_t: int = 64) -> np.ndarray:
    """
    Diagonal of the transport Gramian by time quadrature along characteristics.

    G_ii = integral over (0, 1) of b(s_i - t, t) dt on n_t uniform panels with
    16-point Gauss-Legendre rules, without splitting at region edges.

    :param region: 1-periodic damping region
    :ptype region: DampingRegion
    :param n: Number of cells
    :ptype n: int
    :param n_t: Number of time panels
    :ptype n_t: int
    :return: Gramian diagonal
    :rtype: np.ndarray
    """
    edges = np.linspace(0.0, 1.0, n_t + 1)
    half = 0.5 * np.diff(edges)
    times = (0.5 * (edges[:-1] + edges[1:]))[:, None] + half[:, None] * _NODES[None, :]
    weights = (half[:, None] * _WEIGHTS[None, :]).ravel()
    times = times.ravel()
    centres = cell_centers(n)
    values = region.evaluate(np.mod(centres[:, None] - times[None, :], 1.0), times[None, :])
    return values @ weights


def _wave_laplacian(region: DampingRegion, n: int, samples_per_step: int) -> np.ndarray:
    """Weighted loop Laplacian of the observed velocity over one period."""
    steps = 2 * n
    dt = 1.0 / n
    k = np.arange(steps)[:, None]
    i = np.arange(n)[None, :]
    lo = ((i - k) % steps).ravel()
    hi = ((steps - 1 - i - k) % steps).ravel()
    offsets = (np.arange(samples_per_step) + 0.5) / samples_per_step - 0.5
    centres = cell_centers(n)[None, :]
    beta = np.zeros((steps, n))
    for offset in offsets:
        beta += region.evaluate(centres, (np.arange(steps)[:, None] + offset) * dt)
    weight = (dt * beta / samples_per_step / 2.0).ravel()
    laplacian = np.zeros((steps, steps))
    np.add.at(laplacian, (lo, lo), weight)
    np.add.at(laplacian, (hi, hi), weight)
    np.add.at(laplacian, (lo, hi), -weight)
    np.add.at(laplacian, (hi, lo), -weight)
    return laplacian


def gramian(system: str, region: DampingRegion, n: int, n_t: int | None = None) -> Gramian:
    """
    Observability Gramian of the undamped group over one period.

    Transport uses G = diag(a), or time quadrature on n_t panels when n_t is
    given. The wave Gramian samples b at n_t / (2N) times per step, at least
    one; the default of two reproduces the t_k -/+ ds / 4 samples of the
    membership defect. It is expressed in energy coordinates.

    :param system: 'transport' or 'wave'
    :ptype system: str
    :param region: Damping region with the system's period
    :ptype region: DampingRegion
    :param n: Number of cells
    :ptype n: int
    :param n_t: Time samples per period, None for the exact transport profile and 4N wave samples
    :ptype n_t: int | None
    :return: Gramian
    :rtype: Gramian
    :raises DomainError: If system and region period do not match
    """
    _check_system(system, region)
    if system == "transport":
        if n_t is None:
            return Gramian(system, n, n, diagonal=line_average(region, n).values.copy())
        return Gramian(system, n, n_t, diagonal=transport_gramian_quadrature(region, n, n_t))
    samples_per_step = 2 if n_t is None else max(1, math.ceil(n_t / (2 * n)))
    with log_duration(logger, f"wave Gramian on {n} cells"):
        laplacian = _wave_laplacian(region, n, samples_per_step)
        matrix = EnergyCoordinates(n).conjugate(laplacian)
    matrix = 0.5 * (matrix + matrix.T)
    return Gramian(system, n, 2 * n * samples_per_step, matrix=matrix)


@dataclass(frozen=True)
class ObservabilityConstants:
    """Smallest eigenvalues of G on X and on Z = Ran(I - P)."""

    kappa2_full: float
    kappa2_z: float
    z_dimension: int


def observability_constants(g: Gramian, projection: ProjectionResult | None = None) -> ObservabilityConstants:
    """
    Observability constants kappa^2 on the whole space and on Z.

    :param g: Gramian
    :ptype g: Gramian
    :param projection: Ergodic projection; without it Z is the whole space
    :ptype projection: ProjectionResult | None
    :return: Constants; kappa2_z is inf when Z is trivial
    :rtype: ObservabilityConstants
    """
    if g.diagonal is not None:
        full = float(np.min(g.diagonal, initial=math.inf))
        if projection is None:
            keep = np.ones(len(g.diagonal), dtype=bool)
        else:
            keep = np.abs(np.diag(projection.dense())) < 0.5
        z_values = g.diagonal[keep]
        return ObservabilityConstants(full, float(np.min(z_values, initial=math.inf)), int(keep.sum()))
    eigen = linalg.eigvalsh(g.matrix)
    full = float(eigen[0])
    if projection is None:
        return ObservabilityConstants(full, full, g.matrix.shape[0])
    basis = linalg.orth(np.eye(g.matrix.shape[0]) - projection.dense())
    if basis.shape[1] == 0:
        return ObservabilityConstants(full, math.inf, 0)
    restricted = basis.conj().T @ g.matrix @ basis
    kappa_z = float(linalg.eigvalsh(0.5 * (restricted + restricted.conj().T))[0])
    return ObservabilityConstants(full, kappa_z, basis.shape[1])


# -- sandwich ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class SandwichReport:
    """
    Worst ratios in c^-2 int ||B* T0 x||^2 <= int ||B* U x||^2 <= int ||B* T0 x||^2.

    ``upper_ratio`` is max of damped / undamped, ``lower_ratio`` is max of
    (undamped / c^2) / damped; both must stay below 1.05.
    """

    c_tau: float
    upper_ratio: float
    lower_ratio: float
    samples: int
    offending_sample: int | None

    @property
    def holds(self) -> bool:
        """True when both bounds hold within the slack."""
        return self.upper_ratio <= SANDWICH_SLACK and self.lower_ratio <= SANDWICH_SLACK


def c_tau(region: DampingRegion) -> float:
    """
    Constant 1 + integral over one period of ||B(t)||^2.

    :param region: Damping region
    :ptype region: DampingRegion
    :return: c_tau
    :rtype: float
    """
    return 1.0 + operator_norm_integral(region)


def _ratio(numerator: float, denominator: float) -> float:
    """Ratio with 0 / 0 = 0 and x / 0 = inf."""
    if denominator <= 0.0:
        return 0.0 if numerator <= 1e-14 else math.inf
    return numerator / denominator


def sandwich_check(
    system: str,
    region: DampingRegion,
    n: int,
    samples: int = 20,
    seed: int = 0,
    strict: bool = False,
) -> SandwichReport:
    """
    Check the two-sided comparison of damped and undamped observation on random states.

    :param system: 'transport' or 'wave'
    :ptype system: str
    :param region: Damping region with the system's period
    :ptype region: DampingRegion
    :param n: Number of cells
    :ptype n: int
    :param samples: Number of random states, at least 20
    :ptype samples: int
    :param seed: Random seed
    :ptype seed: int
    :param strict: Raise instead of returning a failing report
    :ptype strict: bool
    :return: Worst ratios
    :rtype: SandwichReport
    :raises DomainError: If fewer than 20 samples are requested
    :raises InvariantViolation: In strict mode when a bound fails beyond the slack
    """
    _check_system(system, region)
    if samples < 20:
        raise DomainError(f"sandwich check needs at least 20 samples, got {samples}")
    rng = np.random.default_rng(seed)
    constant = c_tau(region)
    g = gramian(system, region, n)
    upper, lower, offender = 0.0, 0.0, None
    coordinates = EnergyCoordinates(n) if system == "wave" else None
    for index in range(samples):
        if system == "transport":
            x = TransportState(rng.standard_normal(n))
            undamped = g.quadratic_form(np.sqrt(1.0 / n) * x.values)
            damped = energy_balance(region, x, 1).rhs
        else:
            coords = rng.standard_normal(2 * n - 1)
            x = coordinates.decode(coords)
            undamped = g.quadratic_form(coords)
            damped = damped_evolution(region, x, region.period).damping_integral
        up, low = _ratio(damped, undamped), _ratio(undamped / constant**2, damped)
        if (up > SANDWICH_SLACK or low > SANDWICH_SLACK) and offender is None:
            offender = index
        upper, lower = max(upper, up), max(lower, low)
    report = SandwichReport(constant, upper, lower, samples, offender)
    logger.info("Sandwich check (%s): c_tau = %.4f, upper %.4f, lower %.4f", system, constant, upper, lower)
    if strict and not report.holds:
        raise InvariantViolation(f"observability sandwich fails on sample {offender}", "observability sandwich")
    return report


# -- geometric control --------------------------------------------------------------------------


@dataclass(frozen=True)
class GCCVerdict:
    """
    Result of ray tracing through the damping region.

    ``witness`` is (s0, direction) of the ray with the smallest dwell when
    the condition fails.
    """

    holds: bool
    witness: tuple[float, int] | None
    min_dwell: float
    rays_checked: int


def fold(x: np.ndarray | float) -> np.ndarray:
    """
    Reflection map of the real line onto [0, 1], a triangular wave of period 2.

    :param x: Unfolded positions
    :ptype x: np.ndarray | float
    :return: Folded positions
    :rtype: np.ndarray
    """
    y = np.mod(x, 2.0)
    return np.where(y <= 1.0, y, 2.0 - y)


def wave_ray_dwell(region: DampingRegion, s0: float, direction: int, t0: float, t1: float) -> float:
    """
    Time a reflected ray s(t) = fold(s0 + direction * t) spends in the support over (t0, t1).

    :param region: Damping region
    :ptype region: DampingRegion
    :param s0: Position at t = 0
    :ptype s0: float
    :param direction: +1 or -1
    :ptype direction: int
    :param t0: Window start
    :ptype t0: float
    :param t1: Window end
    :ptype t1: float
    :return: Dwell time
    :rtype: float
    """
    x0 = s0 + direction * t0
    x1 = s0 + direction * t1
    lo, hi = sorted((x0, x1))
    turns = [(k - s0) / direction for k in range(math.floor(lo) + 1, math.ceil(hi)) if lo < k < hi]
    times = sorted({t0, t1, *turns})
    total = 0.0
    for ta, tb in zip(times[:-1], times[1:], strict=False):
        sa = float(fold(s0 + direction * ta))
        sb = float(fold(s0 + direction * tb))
        total += segment_integral(region, (sa, ta), (sb, tb), indicator=True)
    return total


def transport_ray_dwell(region: DampingRegion, s0: float, t0: float, t1: float) -> float:
    """
    Time the characteristic s(t) = (s0 - t) mod 1 spends in the support over (t0, t1).

    :param region: Damping region
    :ptype region: DampingRegion
    :param s0: Position at t = 0
    :ptype s0: float
    :param t0: Window start
    :ptype t0: float
    :param t1: Window end
    :ptype t1: float
    :return: Dwell time
    :rtype: float
    """
    wraps = [s0 - k for k in range(math.floor(s0 - t1), math.ceil(s0 - t0) + 1) if t0 < s0 - k < t1]
    times = sorted({t0, t1, *wraps})
    total = 0.0
    for ta, tb in zip(times[:-1], times[1:], strict=False):
        k = math.floor(s0 - 0.5 * (ta + tb))
        total += segment_integral(region, (s0 - ta - k, ta), (s0 - tb - k, tb), indicator=True)
    return total


def _corner_rays(region: DampingRegion, window: float) -> list[tuple[float, int]]:
    """Wave rays through every polygon vertex (and its time translates inside the window)."""
    rays = []
    copies = int(math.ceil(window / region.period))
    for polygon in polygons(region):
        for s_v, t_v in polygon:
            for j in range(copies + 1):
                t = t_v + j * region.period
                for direction in (1, -1):
                    for image in (s_v, -s_v):
                        x0 = (image - direction * t) % 2.0
                        rays.append((x0, direction) if x0 <= 1.0 else (2.0 - x0, -direction))
    return rays


def gcc_check(system: str, region: DampingRegion, window: float | None = None, m: int = DEFAULT_RAYS) -> GCCVerdict:
    """
    Check that every ray meets the damping region within the window.

    Wave rays are reflected characteristics in both directions from an
    m-point grid of start positions plus the rays through every region
    vertex. Transport rays are the characteristics s0 - t mod 1 from an
    m-point grid plus one ray per cell of J_a.

    :param system: 'transport' or 'wave'
    :ptype system: str
    :param region: Indicator damping region
    :ptype region: DampingRegion
    :param window: Time window, default one period
    :ptype window: float | None
    :param m: Number of grid start positions
    :ptype m: int
    :return: Verdict with witness ray
    :rtype: GCCVerdict
    :raises DomainError: If the region is not of indicator kind
    """
    _check_system(system, region)
    if not region.is_indicator:
        raise DomainError("gcc_check needs an indicator region")
    window = region.period if window is None else window
    starts = np.linspace(0.0, 1.0, m)
    if system == "wave":
        rays = [(float(s), d) for s in starts for d in (1, -1)] + _corner_rays(region, window)
        dwell = [wave_ray_dwell(region, s, d, 0.0, window) for s, d in rays]
    else:
        extra = []
        if math.isclose(region.period, 1.0):
            profile = line_average(region, max(16, min(m, 4096)))
            extra = [float(s) for s in profile.grid[profile.null_mask]]
        rays = [(float(s), -1) for s in list(starts) + extra]
        dwell = [transport_ray_dwell(region, s, 0.0, window) for s, _ in rays]
    dwell = np.asarray(dwell)
    worst = int(np.argmin(dwell))
    holds = bool(dwell[worst] > DWELL_TOL)
    witness = None if holds else rays[worst]
    logger.info("GCC (%s, window %.3g): %s, min dwell %.3e over %d rays", system, window, holds, dwell[worst], len(rays))
    return GCCVerdict(holds, witness, float(dwell[worst]), len(rays))


@dataclass(frozen=True)
class KroneckerSweep:
    """
    Cumulative ray dwell of a time-rescaled region over n = 1..max_windows periods.

    ``first_window`` is the first n after which every ray has met the
    region, or None.
    """

    period: float
    first_window: int | None
    uncovered: tuple[int, ...]
    rays_checked: int


def kronecker_sweep(region: DampingRegion, period: float, max_windows: int = 64, m: int = 512) -> KroneckerSweep:
    """
    Sweep a wave region stretched to a new period over growing windows.

    With the damping period incommensurate to the ray period 2, every ray
    eventually meets the region.

    :param region: Indicator region of period 2
    :ptype region: DampingRegion
    :param period: New damping period
    :ptype period: float
    :param max_windows: Largest number of periods
    :ptype max_windows: int
    :param m: Number of grid start positions
    :ptype m: int
    :return: Sweep result; ``uncovered`` counts rays with zero dwell after each window
    :rtype: KroneckerSweep
    """
    _check_system("wave", region)
    stretched = region.with_period(period)
    starts = np.linspace(0.0, 1.0, m)
    rays = [(float(s), d) for s in starts for d in (1, -1)] + _corner_rays(stretched, max_windows * period)
    pending = list(range(len(rays)))
    uncovered = []
    first = None
    for window in range(1, max_windows + 1):
        t0, t1 = (window - 1) * period, window * period
        pending = [r for r in pending if wave_ray_dwell(stretched, rays[r][0], rays[r][1], t0, t1) <= DWELL_TOL]
        uncovered.append(len(pending))
        if not pending:
            first = window
            break
    logger.info("Kronecker sweep (period %.6g): first window %s", period, first)
    return KroneckerSweep(period, first, tuple(uncovered), len(rays))
