"""
Convergence rates of ||z(t) - z0(t)|| and initial data realising each regime.

At period multiples the distance to the periodic limit is ||T^n (x - P x)||,
so every measurement here works on the assembled monodromy in orthonormal
coordinates. Fits use the samples from the tenth period on; the polynomial
fit uses the final decade of those samples.
"""

import math
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import linalg, stats
from scipy.special import logsumexp

from periodic_asymptotics.errors import CertificateError, DomainError
from periodic_asymptotics.geometry import DampingRegion, line_average
from periodic_asymptotics.logging_config import get_logger, log_duration
from periodic_asymptotics.spectral import (
    MonodromyOperator,
    ProjectionResult,
    assemble,
    ergodic_projection,
    fractional_power_apply,
    restricted_radius,
)
from periodic_asymptotics.transport import TransportSolver, TransportState
from periodic_asymptotics.wave import WaveSolver, WaveState

logger = get_logger(__name__)

FIT_START = 10
RELATIVE_FLOOR = 1e-11
ABSOLUTE_FLOOR = 1e-12
EXP_RESIDUAL_MAX = 0.01
POLY_RESIDUAL_MAX = 0.05
EXP_HORIZON_MIN = 5.0
SE_FACTOR = 10.0
STAGNATION_TOL = 1e-6
SUPERPOLY_GROWTH = 1.5
MIN_SAMPLES = 3
SOUNDNESS_WINDOW = (16, 32)
SOUNDNESS_SLACK = 1.05
RESOLVABLE_LOG = 600.0
MAX_LOG_COEFFICIENT = 700.0
CUTOFF_FRACTION = 0.05
DENSE_SWEEPS = 4


class Verdict(str, Enum):
    """Classification of a measured decay series."""

    EXPONENTIAL = "exponential"
    POLYNOMIAL = "polynomial"
    SUPERPOLYNOMIAL = "superpolynomial"
    STAGNANT = "stagnant"
    INCONCLUSIVE = "inconclusive"
    PERIODIC = "periodic"


@dataclass(frozen=True)
class ExpFit:
    """Log-linear fit d(t) ~ M exp(-beta t) ||x||."""

    beta: float
    constant: float
    residual: float
    stderr: float


@dataclass(frozen=True)
class PolyFit:
    """Log-log fit d(n) ~ c n^(-gamma) over the window (first, last) in periods."""

    gamma: float
    constant: float
    residual: float
    window: tuple[int, int]


@dataclass(frozen=True)
class RateFit:
    """
    Decay series with both fits and the resulting verdict.

    ``series`` has rows (n, t, distance) with t = n * period.
    ``decade_gammas`` holds the polynomial exponent fitted per decade of n.
    """

    series: np.ndarray
    exp_fit: ExpFit | None
    poly_fit: PolyFit | None
    verdict: Verdict
    decade_gammas: tuple[float, ...] = ()

    @property
    def beta(self) -> float:
        """Fitted exponential rate, NaN without a fit."""
        return self.exp_fit.beta if self.exp_fit else math.nan

    @property
    def gamma(self) -> float:
        """Fitted polynomial exponent, NaN without a fit."""
        return self.poly_fit.gamma if self.poly_fit else math.nan

    @property
    def max_increase(self) -> float:
        """Largest relative increase between consecutive distances."""
        d = self.series[:, 2]
        if len(d) < 2:
            return 0.0
        scale = max(float(d[0]), np.finfo(float).tiny)
        return float(max(np.max(np.diff(d)) / scale, 0.0))


# -- operators ----------------------------------------------------------------------------


def monodromy_operator(system: str, region: DampingRegion, n: int, seed: int = 0) -> MonodromyOperator:
    """
    Assemble the monodromy of a system on n cells.

    :param system: 'transport' or 'wave'
    :ptype system: str
    :param region: Damping region with the system's period
    :ptype region: DampingRegion
    :param n: Number of cells
    :ptype n: int
    :param seed: Seed of the linearity check
    :ptype seed: int
    :return: Operator in orthonormal coordinates
    :rtype: MonodromyOperator
    :raises DomainError: If the system is unknown
    """
    if system == "transport":
        return assemble(TransportSolver(region, n), seed=seed)
    if system == "wave":
        return assemble(WaveSolver(region, n), seed=seed)
    raise DomainError(f"system must be 'transport' or 'wave', got {system!r}")


def distance_series(
    op: MonodromyOperator,
    coords: np.ndarray,
    periods: int,
    stride: int = 1,
    projection: ProjectionResult | None = None,
) -> np.ndarray:
    """
    Rows (n, t, ||T^n (x - P x)||) for n = 0, stride, ..., periods.

    :param op: Monodromy operator
    :ptype op: MonodromyOperator
    :param coords: Coordinates of x
    :ptype coords: np.ndarray
    :param periods: Horizon in periods
    :ptype periods: int
    :param stride: Periods between samples
    :ptype stride: int
    :param projection: Ergodic projection; computed when omitted
    :ptype projection: ProjectionResult | None
    :return: Array of shape (samples, 3)
    :rtype: np.ndarray
    :raises DomainError: If periods or stride are not positive
    """
    if periods < 1 or stride < 1:
        raise DomainError(f"periods and stride must be positive, got {periods} and {stride}")
    projection = projection or ergodic_projection(op)
    y = np.asarray(coords) - projection.apply(np.asarray(coords))
    steps = np.arange(0, periods + 1, stride)
    if op.is_diagonal:
        magnitude = np.abs(op.diagonal)
        distances = np.empty(len(steps))
        for start in range(0, len(steps), 256):
            block = steps[start : start + 256]
            distances[start : start + 256] = np.linalg.norm(np.abs(y)[None, :] * magnitude[None, :] ** block[:, None], axis=1)
    else:
        step_matrix = np.linalg.matrix_power(op.matrix, stride)
        distances = np.empty(len(steps))
        for k in range(len(steps)):
            distances[k] = np.linalg.norm(y)
            y = step_matrix @ y
    return np.column_stack((steps, steps * op.period, distances))


# -- fitting --------------------------------------------------------------------------------


def _line_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float, float]:
    """Least squares y = slope x + intercept; returns slope, intercept, 1 - R^2, slope stderr."""
    result = stats.linregress(x, y)
    fitted = result.slope * x + result.intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    residual = ss_res / ss_tot if ss_tot > 0 else 0.0
    return float(result.slope), float(result.intercept), residual, float(result.stderr)


def _decade_gammas(n: np.ndarray, d: np.ndarray) -> tuple[float, ...]:
    """Polynomial exponent on each decade [10^j, 10^(j+1)] with enough samples."""
    gammas = []
    lo = FIT_START
    while lo <= n[-1]:
        mask = (n >= lo) & (n <= 10 * lo)
        if np.count_nonzero(mask) >= MIN_SAMPLES:
            slope, _, _, _ = _line_fit(np.log(n[mask]), np.log(d[mask]))
            gammas.append(max(-slope, 0.0))
        lo *= 10
    return tuple(gammas)


def fit_series(series: np.ndarray) -> RateFit:
    """
    Fit a decay series and classify it.

    Checks run in order: a series that is zero throughout is periodic
    (x = P x); one that drops to zero is superpolynomial; a plateau
    above 1e-12 changing by less than 1e-6 over the last decade is stagnant;
    exponential needs log-linear residual below 0.01, beta * horizon above
    5, a better log-linear than log-log residual and beta above ten standard
    errors; superpolynomial needs the per-decade exponent to grow by 1.5x;
    polynomial needs a log-log residual below 0.05. Everything else is
    inconclusive.

    :param series: Rows (n, t, distance)
    :ptype series: np.ndarray
    :return: Fits and verdict
    :rtype: RateFit
    """
    series = np.asarray(series, dtype=float)
    n, t, d = series[:, 0], series[:, 1], series[:, 2]
    d0 = float(d[0])
    if np.all(d == 0.0):
        return RateFit(series, None, None, Verdict.PERIODIC)
    if d0 == 0.0 or np.all(d[1:] == 0.0):
        return RateFit(series, None, None, Verdict.SUPERPOLYNOMIAL)

    last = float(d[-1])
    earlier = d[n <= max(n[-1] / 10.0, n[0])]
    reference = float(earlier[-1]) if len(earlier) else d0
    if last > ABSOLUTE_FLOOR and reference > 0 and abs(last - reference) / reference < STAGNATION_TOL and n[-1] > n[0]:
        logger.debug("Distance plateau at %.3e", last)
        return RateFit(series, None, None, Verdict.STAGNANT)

    usable = d >= RELATIVE_FLOOR * d0
    mask = usable & (n >= FIT_START)
    if np.count_nonzero(mask) < MIN_SAMPLES:
        mask = usable & (n >= 1)
    if np.count_nonzero(mask) < MIN_SAMPLES:
        logger.warning("Only %d usable samples, no fit", int(np.count_nonzero(mask)))
        return RateFit(series, None, None, Verdict.INCONCLUSIVE)

    fn, ft, fd = n[mask], t[mask], d[mask]
    slope, intercept, exp_residual, stderr = _line_fit(ft, np.log(fd))
    exp_fit = ExpFit(max(-slope, 0.0), math.exp(intercept) / d0, exp_residual, stderr)

    decade = fn >= fn[-1] / 10.0
    if np.count_nonzero(decade) < MIN_SAMPLES:
        decade = np.ones_like(fn, dtype=bool)
    p_slope, p_intercept, poly_residual, _ = _line_fit(np.log(fn[decade]), np.log(fd[decade]))
    poly_fit = PolyFit(max(-p_slope, 0.0), math.exp(p_intercept), poly_residual, (int(fn[decade][0]), int(fn[decade][-1])))
    gammas = _decade_gammas(fn, fd)
    logger.debug("Fit window n in [%d, %d]: %s, %s", int(fn[0]), int(fn[-1]), exp_fit, poly_fit)

    horizon = float(t[-1])
    if (
        exp_residual < EXP_RESIDUAL_MAX
        and exp_fit.beta * horizon > EXP_HORIZON_MIN
        and exp_residual < poly_residual
        and exp_fit.beta > SE_FACTOR * stderr
    ):
        verdict = Verdict.EXPONENTIAL
    elif len(gammas) >= 2 and gammas[-1] > 0 and gammas[-1] >= SUPERPOLY_GROWTH * gammas[-2]:
        verdict = Verdict.SUPERPOLYNOMIAL
    elif poly_residual < POLY_RESIDUAL_MAX:
        verdict = Verdict.POLYNOMIAL
    else:
        verdict = Verdict.INCONCLUSIVE
    return RateFit(series, exp_fit, poly_fit, verdict, gammas)


def _encode(system: str, op: MonodromyOperator, x: TransportState | WaveState | np.ndarray) -> np.ndarray:
    """Coordinates of x in the operator's basis."""
    if isinstance(x, np.ndarray):
        return x
    if op.coordinates is None:
        raise DomainError(f"operator for {system} carries no coordinates to encode a state")
    return op.coordinates.encode(x)


def measure(
    system: str,
    region: DampingRegion,
    x: TransportState | WaveState | np.ndarray,
    horizon: int,
    stride: int = 1,
    op: MonodromyOperator | None = None,
    projection: ProjectionResult | None = None,
) -> RateFit:
    """
    Measure ||z(t) - z0(t)|| at period multiples and classify the decay.

    z0 is the periodic solution through P x, so at t = n * period the
    distance is ||T^n (x - P x)||. Wave distances use powers of the assembled
    monodromy rather than repeated PDE solves.

    :param system: 'transport' or 'wave'
    :ptype system: str
    :param region: Damping region with the system's period
    :ptype region: DampingRegion
    :param x: Initial state or its coordinates
    :ptype x: TransportState | WaveState | np.ndarray
    :param horizon: Number of periods
    :ptype horizon: int
    :param stride: Periods between samples
    :ptype stride: int
    :param op: Pre-assembled monodromy on the state's grid
    :ptype op: MonodromyOperator | None
    :param projection: Pre-computed ergodic projection
    :ptype projection: ProjectionResult | None
    :return: Series, fits and verdict
    :rtype: RateFit

    Example::

        >>> fit = measure("transport", corner_square(0.5), TransportState.ones(2048), 1000)
        >>> fit.verdict
        <Verdict.POLYNOMIAL: 'polynomial'>
    """
    if op is None:
        if isinstance(x, np.ndarray):
            raise DomainError("coordinates need a pre-assembled operator")
        op = monodromy_operator(system, region, x.n)
    coords = _encode(system, op, x)
    with log_duration(logger, f"{system} rate measurement over {horizon} periods"):
        series = distance_series(op, coords, horizon, stride, projection)
        fit = fit_series(series)
    logger.info("%s %s: verdict %s (beta %.4g, gamma %.4g)", system, region.kind.value, fit.verdict.value, fit.beta, fit.gamma)
    return fit


# -- polynomial data ------------------------------------------------------------------------


def make_polynomial_data(region: DampingRegion, n: int, gamma: float, margin: float = 0.1) -> TransportState:
    """
    Transport data x = a^(gamma + margin) on I_a and 0 on J_a.

    Such x satisfies the rate criterion for gamma but not for
    gamma + 2 margin + 1/2 near a linear zero of a.

    :param region: 1-periodic damping region
    :ptype region: DampingRegion
    :param n: Number of cells
    :ptype n: int
    :param gamma: Positive exponent
    :ptype gamma: float
    :param margin: Non-negative exponent margin
    :ptype margin: float
    :return: Initial data
    :rtype: TransportState
    :raises DomainError: If gamma is not positive or a vanishes identically
    """
    if not gamma > 0 or margin < 0:
        raise DomainError(f"need gamma > 0 and margin >= 0, got {gamma} and {margin}")
    profile = line_average(region, n)
    if not np.any(profile.active_mask):
        raise DomainError("degenerate region: a vanishes identically")
    values = np.where(profile.active_mask, np.abs(profile.values) ** (gamma + margin), 0.0)
    return TransportState(values)


@dataclass(frozen=True)
class SoundnessCheck:
    """Bound d(n) <= c n^(-gamma) with c fitted on n in [16, 32] and checked up to the horizon."""

    gamma: float
    constant: float
    worst_ratio: float
    horizon: int

    @property
    def holds(self) -> bool:
        """True when the fitted envelope dominates the whole window."""
        return self.worst_ratio <= SOUNDNESS_SLACK


def rate_soundness(
    op: MonodromyOperator,
    coords: np.ndarray,
    gamma: float,
    horizon: int,
    projection: ProjectionResult | None = None,
) -> SoundnessCheck:
    """
    Check that a polynomial envelope fitted early keeps dominating the distance.

    :param op: Monodromy operator
    :ptype op: MonodromyOperator
    :param coords: Coordinates of x
    :ptype coords: np.ndarray
    :param gamma: Exponent of the envelope
    :ptype gamma: float
    :param horizon: Last period checked, at least 32
    :ptype horizon: int
    :param projection: Ergodic projection
    :ptype projection: ProjectionResult | None
    :return: Fitted constant and the worst ratio d(n) n^gamma / c
    :rtype: SoundnessCheck
    :raises DomainError: If the horizon is shorter than the fit window
    """
    first, last = SOUNDNESS_WINDOW
    if horizon < last:
        raise DomainError(f"horizon must be at least {last}, got {horizon}")
    series = distance_series(op, coords, horizon, 1, projection)
    n, d = series[first:, 0], series[first:, 2]
    scaled = d * n**gamma
    constant = float(np.max(scaled[: last - first + 1]))
    worst = float(np.max(scaled) / constant) if constant > 0 else 0.0
    return SoundnessCheck(gamma, constant, worst, horizon)


# -- slow data ------------------------------------------------------------------------------


@dataclass
class SlowData:
    """
    Initial data whose distance to the periodic limit dominates a target rate.

    ``norms`` are the exact values ||T^n x|| at the kept ``checkpoints``;
    ``dropped`` lists checkpoints beyond the resolvable horizon.
    """

    coords: np.ndarray
    checkpoints: list[int] = field(default_factory=list)
    targets: list[float] = field(default_factory=list)
    norms: list[float] = field(default_factory=list)
    dropped: list[int] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        """True when every kept checkpoint meets its target."""
        return all(norm >= target * (1 - 1e-12) for norm, target in zip(self.norms, self.targets, strict=True))

    def rows(self) -> list[tuple[int, float, float]]:
        """
        Certificate rows (n, target, norm).

        :return: One row per kept checkpoint
        :rtype: list[tuple[int, float, float]]
        """
        return list(zip(self.checkpoints, self.targets, self.norms, strict=True))


def inverse_log_rate(n: int) -> float:
    """
    Default slow target r(n) = 1 / log(n + 2).

    :param n: Period count
    :ptype n: int
    :return: Target distance
    :rtype: float
    """
    return 1.0 / math.log(n + 2)


def _log_level_norm(log_weights: np.ndarray, log_m: np.ndarray, n: int) -> float:
    """Log of ||T^n v|| for v with entry log-magnitudes log_weights."""
    with np.errstate(invalid="ignore"):
        return float(logsumexp(2.0 * log_weights + 2.0 * n * log_m)) / 2.0


def _slow_diagonal(op: MonodromyOperator, active: np.ndarray, checkpoints: list[int], targets: list[float]) -> SlowData:
    """Greedy level-set construction x = sum c_k 1_{A_k} with A_k = {a < max(1 / n_k, min a)}."""
    with np.errstate(divide="ignore"):
        log_m = np.log(np.abs(op.diagonal[active]))
    a = -log_m
    log_x = np.full(len(a), -np.inf)
    data = SlowData(np.zeros(op.dimension))
    for n_k, r_k in zip(checkpoints, targets, strict=True):
        current = _log_level_norm(log_x, log_m, n_k) if np.isfinite(log_x).any() else -np.inf
        if r_k > 0 and current < math.log(r_k):
            level = a <= max(1.0 / n_k, float(a.min()))
            indicator = np.where(level, 0.0, -np.inf)
            unit = _log_level_norm(indicator, log_m, n_k)
            log_r = math.log(r_k)
            missing = log_r + 0.5 * math.log1p(-math.exp(2.0 * (current - log_r))) if np.isfinite(current) else log_r
            log_c = missing - unit
            if log_c > MAX_LOG_COEFFICIENT:
                data.coords[active] = np.exp(log_x)
                raise CertificateError(f"coefficient exp({log_c:.1f}) needed at checkpoint n = {n_k}", certificate=data)
            log_x = np.logaddexp(log_x, np.where(level, log_c, -np.inf))
        data.checkpoints.append(n_k)
        data.targets.append(r_k)
    data.coords[active] = np.exp(log_x)
    data.norms = [math.exp(_log_level_norm(log_x, log_m, n_k)) for n_k in data.checkpoints]
    return data


def _slow_dense(op: MonodromyOperator, basis: np.ndarray, checkpoints: list[int], targets: list[float]) -> SlowData:
    """
    Greedy superposition of top right singular vectors of S^(n_k).

    S is the compression of T to an orthonormal basis of the invariant
    subspace Ran(I - P), so its powers never pick up fixed components.
    """
    s = basis.conj().T @ op.matrix @ basis
    powers = {}
    power, exponent = s.copy(), 1
    for n_k in checkpoints:
        while exponent < n_k:
            power, exponent = power @ power, 2 * exponent
        powers[n_k] = power.copy()
    y = np.zeros(s.shape[0], dtype=s.dtype)
    for _ in range(DENSE_SWEEPS):
        changed = False
        for n_k, r_k in zip(checkpoints, targets, strict=True):
            image = powers[n_k] @ y
            current = float(np.linalg.norm(image))
            if current >= r_k:
                continue
            _, sigma, vh = linalg.svd(powers[n_k])
            v = vh[0].conj()
            u = powers[n_k] @ v
            aa = float(np.vdot(u, u).real)
            bb = float(np.vdot(image, u).real)
            c = (-bb + math.sqrt(bb * bb + aa * (r_k**2 - current**2))) / aa
            if math.log(max(c, 1e-300)) > MAX_LOG_COEFFICIENT:
                raise CertificateError(f"coefficient {c:.3e} needed at checkpoint n = {n_k}", certificate=SlowData(basis @ y))
            y = y + c * v
            changed = True
            logger.debug("Slow data: checkpoint %d lifted with sigma %.3e", n_k, sigma[0])
        if not changed:
            break
    norms = [float(np.linalg.norm(powers[n_k] @ y)) for n_k in checkpoints]
    return SlowData(basis @ y, list(checkpoints), list(targets), norms)


def make_slow_data(
    op: MonodromyOperator,
    rate: Callable[[int], float] = inverse_log_rate,
    levels: int = 20,
    projection: ProjectionResult | None = None,
) -> SlowData:
    """
    Construct x with ||T^(n_k) (x - P x)|| >= r(n_k) at n_k = 2^k, k < levels.

    Slow data exists only when the restricted spectral radius is within four
    grid cells per period of 1; otherwise the decay is exponential. Diagonal
    operators use level sets of a; dense operators drop checkpoints beyond
    600 / -log r(T|Z), where powers underflow.

    :param op: Monodromy operator
    :ptype op: MonodromyOperator
    :param rate: Target rate r(n), decreasing to 0
    :ptype rate: Callable[[int], float]
    :param levels: Number of checkpoints
    :ptype levels: int
    :param projection: Ergodic projection
    :ptype projection: ProjectionResult | None
    :return: Data with its checkpoint certificate
    :rtype: SlowData
    :raises DomainError: In the exponential regime or when T = I
    :raises CertificateError: When a checkpoint cannot be met
    """
    projection = projection or ergodic_projection(op)
    checkpoints = [2**k for k in range(levels)]
    targets = [float(rate(n_k)) for n_k in checkpoints]
    if op.is_diagonal:
        active = np.abs(np.diag(projection.dense())) < 0.5
        basis = None
        z_dimension = int(np.count_nonzero(active))
    else:
        active = None
        basis = linalg.orth(np.eye(op.dimension) - projection.dense())
        z_dimension = basis.shape[1]
    if z_dimension == 0:
        raise DomainError("degenerate: T acts as the identity, no decaying directions")

    if all(target <= 0 for target in targets):
        coords = active.astype(float) if active is not None else basis[:, 0].copy()
        coords = coords / np.linalg.norm(coords)
        return SlowData(coords, checkpoints, targets, [0.0] * len(checkpoints))

    radius = restricted_radius(op, projection)
    gap = -math.log(radius.radius) if radius.radius > 0 else math.inf
    if not radius.near_unit:
        raise DomainError(f"exponential regime: -log r(T|Z) = {gap:.4g} exceeds four cells per period")

    if active is not None:
        data = _slow_diagonal(op, active, checkpoints, targets)
    else:
        limit = RESOLVABLE_LOG / gap if gap > 0 else math.inf
        kept = [k for k, n_k in enumerate(checkpoints) if n_k <= limit]
        dropped = [n_k for n_k in checkpoints if n_k > limit]
        if dropped:
            logger.warning("Dropping slow-data checkpoints beyond n = %.0f: %s", limit, dropped)
        data = _slow_dense(op, basis, [checkpoints[k] for k in kept], [targets[k] for k in kept])
        data.dropped = dropped
    if not data.holds:
        raise CertificateError("slow data misses its target at some checkpoint", certificate=data)
    logger.info("Slow data certificate holds at %d checkpoints", len(data.checkpoints))
    return data


# -- superpolynomial data -------------------------------------------------------------------


def smooth_step(u: np.ndarray) -> np.ndarray:
    """
    C-infinity step: 0 for u <= 1, 1 for u >= 2.

    :param u: Arguments
    :ptype u: np.ndarray
    :return: Step values
    :rtype: np.ndarray
    """
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        left = np.where(u > 1.0, np.exp(-1.0 / np.maximum(u - 1.0, 1e-300)), 0.0)
        right = np.where(u < 2.0, np.exp(-1.0 / np.maximum(2.0 - u, 1e-300)), 0.0)
    return left / (left + right)


def make_superpoly_data(
    system: str,
    op: MonodromyOperator,
    seed: np.ndarray,
    projection: ProjectionResult | None = None,
    power: int = 4,
) -> np.ndarray:
    """
    Data whose distance to the periodic limit decays faster than any power at grid level.

    Transport multiplies the non-fixed part of the seed by psi(a / eps) with
    eps = 0.05 max a, which vanishes near the zeros of a. The wave equation
    uses (I - T)^power applied to the seed plus P seed.

    :param system: 'transport' or 'wave'
    :ptype system: str
    :param op: Monodromy operator
    :ptype op: MonodromyOperator
    :param seed: Seed coordinates
    :ptype seed: np.ndarray
    :param projection: Ergodic projection
    :ptype projection: ProjectionResult | None
    :param power: Integer power for the wave construction
    :ptype power: int
    :return: Coordinates of the data
    :rtype: np.ndarray
    :raises DomainError: If the system is unknown
    """
    projection = projection or ergodic_projection(op)
    seed = np.asarray(seed)
    fixed = projection.apply(seed)
    if system == "transport" and op.is_diagonal:
        with np.errstate(divide="ignore"):
            a = -np.log(np.abs(op.diagonal))
        finite = np.isfinite(a)
        scale = CUTOFF_FRACTION * float(np.max(a[finite], initial=0.0))
        if scale == 0.0:
            return fixed
        cutoff = np.where(finite, smooth_step(np.where(finite, a, 0.0) / scale), 1.0)
        return fixed + cutoff * (seed - fixed)
    if system in ("transport", "wave"):
        return fixed + fractional_power_apply(op, float(power), seed, projection)
    raise DomainError(f"system must be 'transport' or 'wave', got {system!r}")
