"""
Monodromy matrices and their spectral structure.

All matrices act on orthonormal coordinates of the state space (plain L2 for
transport, the energy product for the wave equation), so Euclidean norms and
singular values are the operator norms of the continuous problem's
discretisation.
"""

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import linalg

from periodic_asymptotics.errors import ConvergenceError, DomainError, LinearityError
from periodic_asymptotics.interfaces import EvolutionSolver
from periodic_asymptotics.logging_config import get_logger, log_duration

logger = get_logger(__name__)

LINEARITY_TOL = 1e-8
FIX_TOL = 1e-8
PROJECTION_TOL = 1e-10
MAX_POWER_EXPONENT = 20
THETA_MIN = 1e-6
POINTS_PER_DECADE = 60
DENSE_SVD_LIMIT = 800
INVERSE_ITERATIONS = 30
MIN_FIT_SAMPLES = 5
GELFAND_POWERS = (32, 64, 128)
SLOW_GELFAND_GAP = 0.01
NEAR_UNIT_CELLS = 4.0


@dataclass(frozen=True)
class MonodromyOperator:
    """
    Matrix of U(period, 0) in orthonormal coordinates.

    Exactly one of ``matrix`` and ``diagonal`` is set. ``spacing`` is the grid
    width of the underlying discretisation.
    """

    period: float
    spacing: float
    inner_product: str
    matrix: np.ndarray | None = None
    diagonal: np.ndarray | None = None
    coordinates: Any = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        """Exactly one representation."""
        if (self.matrix is None) == (self.diagonal is None):
            raise DomainError("monodromy needs exactly one of matrix and diagonal")

    @property
    def is_diagonal(self) -> bool:
        """True for multiplication operators."""
        return self.diagonal is not None

    @property
    def dimension(self) -> int:
        """State-space dimension."""
        return len(self.diagonal) if self.is_diagonal else self.matrix.shape[0]

    def dense(self) -> np.ndarray:
        """
        Dense matrix.

        :return: Square matrix
        :rtype: np.ndarray
        """
        return np.diag(self.diagonal) if self.is_diagonal else self.matrix

    def apply(self, coords: np.ndarray, power: int = 1) -> np.ndarray:
        """
        Apply T^power to coordinate vectors.

        :param coords: Array of shape (d,) or (d, k)
        :ptype coords: np.ndarray
        :param power: Non-negative exponent
        :ptype power: int
        :return: T^power coords
        :rtype: np.ndarray
        """
        coords = np.asarray(coords)
        if self.is_diagonal:
            factors = self.diagonal**power
            return factors * coords if coords.ndim == 1 else factors[:, None] * coords
        return np.linalg.matrix_power(self.matrix, power) @ coords

    def power(self, n: int) -> "MonodromyOperator":
        """
        Operator T^n.

        :param n: Non-negative exponent
        :ptype n: int
        :return: Power as a monodromy operator of period n * period
        :rtype: MonodromyOperator
        """
        if self.is_diagonal:
            return MonodromyOperator(n * self.period, self.spacing, self.inner_product, diagonal=self.diagonal**n)
        return MonodromyOperator(
            n * self.period, self.spacing, self.inner_product, matrix=np.linalg.matrix_power(self.matrix, n)
        )

    def norm(self) -> float:
        """
        Operator norm in the declared inner product.

        :return: Largest singular value
        :rtype: float
        """
        if self.is_diagonal:
            return float(np.max(np.abs(self.diagonal))) if self.dimension else 0.0
        return float(linalg.svdvals(self.matrix)[0])

    def eigenvalues(self) -> np.ndarray:
        """
        Spectrum of the matrix.

        :return: Eigenvalues
        :rtype: np.ndarray
        """
        if self.is_diagonal:
            return self.diagonal.astype(complex)
        return linalg.eigvals(self.matrix)

    @classmethod
    def from_matrix(
        cls, matrix: np.ndarray, period: float = 1.0, spacing: float = 0.0, inner_product: str = "euclidean"
    ) -> "MonodromyOperator":
        """
        Wrap a dense matrix, mainly for synthetic operators.

        :param matrix: Square matrix
        :ptype matrix: np.ndarray
        :param period: Period represented by one application
        :ptype period: float
        :param spacing: Grid width, 0 when there is no grid
        :ptype spacing: float
        :param inner_product: Name of the inner product
        :ptype inner_product: str
        :return: Operator
        :rtype: MonodromyOperator
        """
        return cls(period, spacing, inner_product, matrix=np.asarray(matrix))

    @classmethod
    def from_diagonal(
        cls, diagonal: np.ndarray, period: float = 1.0, spacing: float = 0.0, inner_product: str = "euclidean"
    ) -> "MonodromyOperator":
        """
        Wrap a multiplication operator.

        :param diagonal: Multipliers
        :ptype diagonal: np.ndarray
        :param period: Period represented by one application
        :ptype period: float
        :param spacing: Grid width, 0 when there is no grid
        :ptype spacing: float
        :param inner_product: Name of the inner product
        :ptype inner_product: str
        :return: Operator
        :rtype: MonodromyOperator
        """
        return cls(period, spacing, inner_product, diagonal=np.asarray(diagonal))


def assemble(solver: EvolutionSolver, chunk: int = 256, seed: int = 0) -> MonodromyOperator:
    """
    Matrix of the one-period map of a solver.

    Multiplicative solvers yield the diagonal directly; otherwise column j is
    the propagated j-th coordinate vector, computed in batches.

    :param solver: One-period solver
    :ptype solver: EvolutionSolver
    :param chunk: Columns propagated per batch
    :ptype chunk: int
    :param seed: Seed of the random superposition check
    :ptype seed: int
    :return: Monodromy operator
    :rtype: MonodromyOperator
    :raises LinearityError: If U(x + y) differs from U x + U y by more than 1e-8 relative
    """
    coordinates = solver.coordinates
    if solver.multiplicative:
        return MonodromyOperator(
            solver.period,
            solver.spacing,
            solver.inner_product,
            diagonal=np.asarray(solver.multipliers()),
            coordinates=coordinates,
        )
    d = coordinates.dimension
    rng = np.random.default_rng(seed)
    x, y = rng.standard_normal(d), rng.standard_normal(d)
    ux, uy, uxy = (solver.propagate(v) for v in (x, y, x + y))
    defect = float(np.linalg.norm(uxy - ux - uy) / max(np.linalg.norm(x) + np.linalg.norm(y), 1.0))
    if defect > LINEARITY_TOL:
        raise LinearityError(f"solver violates superposition (relative defect {defect:.2e})", defect)
    with log_duration(logger, f"assemble {d}x{d} monodromy"):
        identity = np.eye(d)
        columns = [solver.propagate(identity[:, start : start + chunk]) for start in range(0, d, chunk)]
    matrix = np.hstack(columns)
    return MonodromyOperator(solver.period, solver.spacing, solver.inner_product, matrix=matrix, coordinates=coordinates)


# -- resolvent -------------------------------------------------------------------------------


def theta_grid(points_per_decade: int = POINTS_PER_DECADE, theta_min: float = THETA_MIN) -> np.ndarray:
    """
    Log-spaced angles in [theta_min, pi].

    :param points_per_decade: Samples per factor of ten
    :ptype points_per_decade: int
    :param theta_min: Smallest angle
    :ptype theta_min: float
    :return: Increasing angles
    :rtype: np.ndarray
    """
    decades = math.log10(math.pi / theta_min)
    return np.logspace(math.log10(theta_min), math.log10(math.pi), int(math.ceil(points_per_decade * decades)) + 1)


@dataclass(frozen=True)
class ResolventProfile:
    """
    Samples of ||R(e^(i theta), T)|| on the upper boundary arc.

    ``plateau`` is ||(I - T)^(-1)||, infinite when 1 is an eigenvalue.
    """

    theta: np.ndarray
    norms: np.ndarray
    plateau: float
    skipped: tuple[float, ...] = ()


def _sigma_min_schur(schur: np.ndarray, z: complex, rng: np.random.Generator) -> float:
    """Smallest singular value of z I - S for triangular S by inverse iteration."""
    a = z * np.eye(schur.shape[0]) - schur
    x = rng.standard_normal(schur.shape[0]) + 0j
    x /= np.linalg.norm(x)
    estimate = 0.0
    for _ in range(INVERSE_ITERATIONS):
        w = linalg.solve_triangular(a, x)
        y = linalg.solve_triangular(a, w, trans=2)
        growth = np.linalg.norm(y)
        if not np.isfinite(growth) or growth == 0.0:
            return 0.0
        previous, estimate = estimate, growth
        x = y / growth
        if previous and abs(estimate - previous) <= 1e-10 * estimate:
            break
    return 1.0 / math.sqrt(estimate)


def _sigma_min_function(op: MonodromyOperator):
    """Function z -> sigma_min(z I - T) for the best available method."""
    if op.is_diagonal:
        diagonal = op.diagonal
        return lambda z: float(np.min(np.abs(z - diagonal))) if len(diagonal) else math.inf
    matrix = op.matrix
    identity = np.eye(op.dimension)
    if op.dimension <= DENSE_SVD_LIMIT:
        return lambda z: float(linalg.svdvals(z * identity - matrix)[-1])
    schur, _ = linalg.schur(matrix.astype(complex), output="complex")
    rng = np.random.default_rng(0)
    return lambda z: _sigma_min_schur(schur, z, rng)


def boundary_resolvent(op: MonodromyOperator, thetas: np.ndarray | None = None) -> ResolventProfile:
    """
    Resolvent norms 1 / sigma_min(e^(i theta) I - T) along the unit circle.

    Uses the closed form for diagonal operators, full SVDs up to dimension
    800 and a complex Schur form with inverse iteration beyond. Samples
    where e^(i theta) is numerically in the spectrum are skipped.

    :param op: Monodromy operator
    :ptype op: MonodromyOperator
    :param thetas: Angles, default 60 log-spaced points per decade in [1e-6, pi]
    :ptype thetas: np.ndarray | None
    :return: Resolvent profile
    :rtype: ResolventProfile
    """
    thetas = theta_grid() if thetas is None else np.asarray(thetas, dtype=float)
    sigma_min = _sigma_min_function(op)
    scale = max(1.0, op.norm())
    kept_theta, kept_norm, skipped = [], [], []
    for theta in thetas:
        sigma = sigma_min(complex(math.cos(theta), math.sin(theta)))
        if sigma <= 1e-14 * scale:
            skipped.append(float(theta))
            continue
        kept_theta.append(theta)
        kept_norm.append(1.0 / sigma)
    if skipped:
        logger.warning("Skipped %d near-singular resolvent samples, smallest theta %.3e", len(skipped), min(skipped))
    at_one = sigma_min(1.0 + 0j)
    plateau = math.inf if at_one <= 1e-14 * scale else 1.0 / at_one
    return ResolventProfile(np.asarray(kept_theta), np.asarray(kept_norm), plateau, tuple(skipped))


@dataclass(frozen=True)
class AlphaFit:
    """
    Power law ||R(e^(i theta), T)|| ~ C theta^(-alpha) near theta = 0.

    ``sentinel`` is True when the resolvent stays bounded (alpha = 0).
    """

    alpha: float
    constant: float
    residual: float
    window: tuple[float, float]
    samples: int
    sentinel: bool = False


def fit_alpha(profile: ResolventProfile) -> AlphaFit:
    """
    Least-squares slope of log ||R|| against -log theta.

    Samples with 10 <= ||R|| <= plateau / 10 are eligible; the fit uses the
    smallest decade of eligible angles. Fewer than 5 samples give the
    bounded-resolvent sentinel alpha = 0.

    :param profile: Resolvent profile
    :ptype profile: ResolventProfile
    :return: Fitted exponent, constant and RMS log residual
    :rtype: AlphaFit
    """
    eligible = (profile.norms >= 10.0) & (profile.norms <= profile.plateau / 10.0)
    theta = profile.theta[eligible]
    if theta.size < MIN_FIT_SAMPLES:
        logger.debug("No resolvent blow-up: %d eligible samples, plateau %.3e", theta.size, profile.plateau)
        return AlphaFit(0.0, float(np.max(profile.norms, initial=0.0)), 0.0, (math.nan, math.nan), int(theta.size), True)
    lo = float(theta.min())
    window = eligible & (profile.theta <= 10.0 * lo)
    x = -np.log(profile.theta[window])
    y = np.log(profile.norms[window])
    if x.size < MIN_FIT_SAMPLES:
        return AlphaFit(0.0, float(np.max(profile.norms)), 0.0, (lo, 10.0 * lo), int(x.size), True)
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    logger.debug("alpha fit on theta in [%.2e, %.2e]: alpha = %.4f", lo, 10 * lo, slope)
    return AlphaFit(float(slope), float(math.exp(intercept)), residual, (lo, 10.0 * lo), int(x.size))


def ritt_constant(profile: ResolventProfile) -> float:
    """
    Sampled Ritt constant sup |e^(i theta) - 1| ||R(e^(i theta), T)||.

    :param profile: Resolvent profile
    :ptype profile: ResolventProfile
    :return: Largest sampled product
    :rtype: float
    """
    if profile.theta.size == 0:
        return math.inf
    distance = 2.0 * np.sin(0.5 * profile.theta)
    return float(np.max(distance * profile.norms))


def ritt_bound_ratio(profile: ResolventProfile, c_tau: float) -> float:
    """
    Largest ratio of |e^(i theta) - 1| ||R|| to the bound 1 + c_tau.

    :param profile: Resolvent profile
    :ptype profile: ResolventProfile
    :param c_tau: Constant 1 + integral of ||B(t)||^2 over one period
    :ptype c_tau: float
    :return: Ratio, at most 1.05 when the bound holds with slack
    :rtype: float
    """
    return ritt_constant(profile) / (1.0 + c_tau)


# -- projections ----------------------------------------------------------------------------


@dataclass(frozen=True)
class ProjectionResult:
    """
    Mean-ergodic projection P with its quality checks.

    ``residuals`` holds ||P^2 - P||, ||TP - P|| and ||PT - P||.
    """

    matrix: np.ndarray | None
    diagonal: np.ndarray | None
    mode: str
    iterations: int
    converged: bool
    increment: float
    residuals: dict[str, float] = field(default_factory=dict)

    def dense(self) -> np.ndarray:
        """
        Dense projection matrix.

        :return: Square matrix
        :rtype: np.ndarray
        """
        return np.diag(self.diagonal) if self.diagonal is not None else self.matrix

    def apply(self, coords: np.ndarray) -> np.ndarray:
        """
        Apply P.

        :param coords: Array of shape (d,) or (d, k)
        :ptype coords: np.ndarray
        :return: P coords
        :rtype: np.ndarray
        """
        coords = np.asarray(coords)
        if self.diagonal is not None:
            return self.diagonal * coords if coords.ndim == 1 else self.diagonal[:, None] * coords
        return self.matrix @ coords

    def norm(self) -> float:
        """
        Operator norm of P.

        :return: Largest singular value
        :rtype: float
        """
        if self.diagonal is not None:
            return float(np.max(np.abs(self.diagonal), initial=0.0))
        return float(linalg.svdvals(self.matrix)[0]) if self.matrix.size else 0.0


def _frobenius(a: np.ndarray) -> float:
    """Frobenius norm, also for vectors of diagonal entries."""
    return float(np.linalg.norm(a))


def ergodic_projection(op: MonodromyOperator, mode: str = "power", tol: float = PROJECTION_TOL) -> ProjectionResult:
    """
    Projection onto Fix T along the closure of Ran(I - T).

    Power mode squares T until T^(2n) - T^n is below tol; Cesaro mode doubles
    the averages A_2n = (A_n + T^n A_n) / 2. Both stop at n = 2^20 and then
    return the last iterate with ``converged`` False.

    :param op: Monodromy operator
    :ptype op: MonodromyOperator
    :param mode: 'power' or 'cesaro'
    :ptype mode: str
    :param tol: Increment tolerance
    :ptype tol: float
    :return: Projection with residual checks
    :rtype: ProjectionResult
    :raises DomainError: If mode is unknown
    """
    if mode not in ("power", "cesaro"):
        raise DomainError(f"mode must be 'power' or 'cesaro', got {mode!r}")
    diag = op.is_diagonal
    power = op.diagonal.astype(float) if diag else op.matrix.copy()
    mult = np.multiply if diag else np.matmul
    average = np.ones_like(power) if diag else np.eye(op.dimension)
    current = power if mode == "power" else average
    increment = math.inf
    iterations = 0
    for iterations in range(1, MAX_POWER_EXPONENT + 1):
        if mode == "power":
            nxt = mult(current, current)
        else:
            nxt = 0.5 * (current + mult(power, current))
            power = mult(power, power)
        increment = _frobenius(nxt - current)
        current = nxt
        if increment < tol:
            break
    converged = increment < tol
    if not converged:
        logger.warning("Ergodic projection (%s) not converged at n = 2^%d, last increment %.3e", mode, iterations, increment)
    t_dense = op.diagonal if diag else op.matrix
    residuals = {
        "idempotency": _frobenius(mult(current, current) - current),
        "tp_minus_p": _frobenius(mult(t_dense, current) - current),
        "pt_minus_p": _frobenius(mult(current, t_dense) - current),
    }
    logger.debug("Projection residuals: %s", residuals)
    return ProjectionResult(
        None if diag else current,
        current if diag else None,
        mode,
        iterations,
        converged,
        increment,
        residuals,
    )


def fix_basis(op: MonodromyOperator, tol: float = FIX_TOL) -> np.ndarray:
    """
    Orthonormal basis of Fix T = ker(T - I).

    :param op: Monodromy operator
    :ptype op: MonodromyOperator
    :param tol: Singular-value threshold relative to max(1, ||T||)
    :ptype tol: float
    :return: Matrix whose columns span Fix T
    :rtype: np.ndarray
    """
    if op.is_diagonal:
        idx = np.flatnonzero(np.abs(op.diagonal - 1.0) <= tol)
        return np.eye(op.dimension)[:, idx]
    _, sigma, vh = linalg.svd(op.matrix - np.eye(op.dimension))
    keep = sigma <= tol * max(1.0, op.norm())
    return vh[keep].conj().T


# -- restricted radius ------------------------------------------------------------------------


@dataclass(frozen=True)
class RestrictedRadius:
    """
    Spectral radius of S = T restricted to Z = Ran(I - P).

    ``gelfand`` maps n to ||S^n||^(1/n). ``near_unit`` flags a gap
    -log r below four grid cells per period.
    """

    radius: float
    gelfand: dict[int, float]
    slow_convergence: bool
    near_unit: bool
    method: str


def _restriction(op: MonodromyOperator, projection: ProjectionResult) -> np.ndarray:
    """Dense (I - P) T (I - P), or the diagonal of it."""
    if op.is_diagonal:
        return np.where(np.abs(np.diag(projection.dense())) > 0.5, 0.0, op.diagonal)
    q = np.eye(op.dimension) - projection.dense()
    return q @ op.matrix @ q


def _power_radius(s: np.ndarray, seed: int, max_iter: int = 10_000, burn_in: int = 50) -> float:
    """Spectral radius by normalised power iteration from 5 random vectors, averaging log growth after burn_in steps."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((s.shape[0], 5))
    x /= np.linalg.norm(x, axis=0)
    log_growth = np.zeros(5)
    previous = math.inf
    for k in range(1, max_iter + 1):
        x = s @ x
        norms = np.linalg.norm(x, axis=0)
        if np.all(norms == 0):
            return 0.0
        x /= np.where(norms > 0, norms, 1.0)
        if k <= burn_in:
            continue
        log_growth += np.log(np.where(norms > 0, norms, np.finfo(float).tiny))
        estimate = float(np.exp(np.max(log_growth) / (k - burn_in)))
        if k > burn_in + 10 and abs(estimate - previous) < 1e-10:
            return estimate
        previous = estimate
    logger.warning("Power iteration for r(T|Z) stopped after %d iterations", max_iter)
    return previous


def restricted_radius(
    op: MonodromyOperator, projection: ProjectionResult, method: str = "exact", seed: int = 0
) -> RestrictedRadius:
    """
    Spectral radius of T on the complement of its fixed space.

    :param op: Monodromy operator
    :ptype op: MonodromyOperator
    :param projection: Ergodic projection of op
    :ptype projection: ProjectionResult
    :param method: 'exact' (eigenvalues) or 'power' (power iteration)
    :ptype method: str
    :param seed: Seed of the power-iteration start vectors
    :ptype seed: int
    :return: Radius with Gelfand estimates and flags
    :rtype: RestrictedRadius
    """
    s = _restriction(op, projection)
    if op.is_diagonal:
        radius = float(np.max(np.abs(s), initial=0.0))
        gelfand = {n: radius for n in GELFAND_POWERS}
        method = "diagonal"
    else:
        radius = float(np.max(np.abs(linalg.eigvals(s)), initial=0.0)) if method == "exact" else _power_radius(s, seed)
        gelfand = {}
        for n in GELFAND_POWERS:
            norm = float(linalg.svdvals(np.linalg.matrix_power(s, n))[0])
            gelfand[n] = norm ** (1.0 / n)
    values = [gelfand[n] for n in GELFAND_POWERS]
    slow = any(abs(a - b) > SLOW_GELFAND_GAP for a, b in zip(values, values[1:], strict=False))
    gap = -math.log(radius) if radius > 0 else math.inf
    near_unit = gap <= NEAR_UNIT_CELLS * op.spacing * op.period if op.spacing > 0 else radius >= 1.0 - 1e-6
    if slow:
        logger.warning("Gelfand estimates still moving: %s", {n: round(g, 6) for n, g in gelfand.items()})
    return RestrictedRadius(radius, gelfand, slow, near_unit, method)


# -- functional calculus ------------------------------------------------------------------------


def fractional_power_apply(
    op: MonodromyOperator,
    gamma: float,
    coords: np.ndarray,
    projection: ProjectionResult | None = None,
    power_bound: float = 1.0,
    tol: float = 1e-10,
    max_terms: int = 10**6,
) -> np.ndarray:
    """
    Compute (I - T)^gamma x by the binomial series sum c_k T^k x.

    Coefficients follow c_0 = 1, c_k = c_(k-1) (k - 1 - gamma) / k. Since
    (I - T)^gamma vanishes on Fix T the series is summed on x - P x. It
    stops once |sum_(j<=k) c_j| * power_bound * ||T^k (x - P x)|| < tol,
    which bounds the tail for k > gamma.

    :param op: Monodromy operator
    :ptype op: MonodromyOperator
    :param gamma: Positive exponent
    :ptype gamma: float
    :param coords: Coordinate vector x
    :ptype coords: np.ndarray
    :param projection: Ergodic projection; computed when omitted
    :ptype projection: ProjectionResult | None
    :param power_bound: Bound on sup ||T^n||
    :ptype power_bound: float
    :param tol: Truncation tolerance
    :ptype tol: float
    :param max_terms: Largest number of series terms
    :ptype max_terms: int
    :return: (I - T)^gamma x
    :rtype: np.ndarray
    :raises DomainError: If gamma is not positive
    :raises ConvergenceError: If the tail bound is not met within max_terms; carries the partial sum

    Example::

        >>> op = MonodromyOperator.from_diagonal(np.array([0.0, 0.5]))
        >>> fractional_power_apply(op, 1.0, np.ones(2))
        array([1. , 0.5])
    """
    if not gamma > 0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    x = np.asarray(coords)
    projection = projection or ergodic_projection(op)
    term = x - projection.apply(x)
    coefficient, coefficient_sum = 1.0, 1.0
    total = coefficient * term
    for k in range(1, max_terms + 1):
        term = op.apply(term)
        coefficient *= (k - 1 - gamma) / k
        coefficient_sum += coefficient
        total = total + coefficient * term
        if k > gamma and abs(coefficient_sum) * power_bound * float(np.linalg.norm(term)) < tol:
            logger.debug("(I - T)^%g series stopped after %d terms", gamma, k + 1)
            return total
    raise ConvergenceError(f"(I - T)^{gamma:g} series not converged after {max_terms} terms", partial=total)


def kt_profile(op: MonodromyOperator, n_max: int) -> np.ndarray:
    """
    Rows (n, n ||T^n (I - T)||) for n = 1, 2, 4, ..., n_max.

    :param op: Monodromy operator
    :ptype op: MonodromyOperator
    :param n_max: Largest power
    :ptype n_max: int
    :return: Array of shape (rows, 2)
    :rtype: np.ndarray
    """
    rows = []
    if op.is_diagonal:
        d = op.diagonal
        n = 1
        while n <= n_max:
            rows.append((n, n * float(np.max(np.abs(d**n * (1.0 - d)), initial=0.0))))
            n *= 2
        return np.asarray(rows, dtype=float).reshape(-1, 2)
    t = op.matrix
    power = t.copy()
    difference = np.eye(op.dimension) - t
    n = 1
    while n <= n_max:
        rows.append((n, n * float(linalg.svdvals(power @ difference)[0])))
        power = power @ power
        n *= 2
    return np.asarray(rows, dtype=float).reshape(-1, 2)


# -- reports ----------------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralReport:
    """Every spectral quantity of one monodromy operator."""

    eigenvalues: np.ndarray
    profile: ResolventProfile
    alpha_fit: AlphaFit
    ritt_constant: float
    fix_basis: np.ndarray
    projection: ProjectionResult
    restricted: RestrictedRadius
    kt_profile: np.ndarray
    operator_norm: float

    @property
    def unit_circle_violations(self) -> int:
        """Eigenvalues with |lambda| >= 1 away from lambda = 1."""
        moduli = np.abs(self.eigenvalues)
        far = np.abs(self.eigenvalues - 1.0) >= 1e-6
        slack = 1.0 + 10.0 * np.finfo(float).eps * max(len(self.eigenvalues), 1)
        return int(np.sum((moduli > slack) & far))


def spectral_report(
    op: MonodromyOperator,
    n_max: int = 4096,
    thetas: np.ndarray | None = None,
    mode: str = "power",
    radius_method: str = "exact",
) -> SpectralReport:
    """
    Compute spectrum, resolvent profile, projection and radius in one pass.

    :param op: Monodromy operator
    :ptype op: MonodromyOperator
    :param n_max: Largest power in the Katznelson-Tzafriri profile
    :ptype n_max: int
    :param thetas: Resolvent angles
    :ptype thetas: np.ndarray | None
    :param mode: Ergodic projection mode
    :ptype mode: str
    :param radius_method: 'exact' or 'power'
    :ptype radius_method: str
    :return: Report
    :rtype: SpectralReport
    """
    with log_duration(logger, f"spectral report (d = {op.dimension})"):
        profile = boundary_resolvent(op, thetas)
        projection = ergodic_projection(op, mode)
        report = SpectralReport(
            eigenvalues=op.eigenvalues(),
            profile=profile,
            alpha_fit=fit_alpha(profile),
            ritt_constant=ritt_constant(profile),
            fix_basis=fix_basis(op),
            projection=projection,
            restricted=restricted_radius(op, projection, radius_method),
            kt_profile=kt_profile(op, n_max),
            operator_norm=op.norm(),
        )
    if report.unit_circle_violations:
        logger.warning("%d eigenvalues on or outside the unit circle away from 1", report.unit_circle_violations)
    return report


def refinement_trend(values: dict[int, float]) -> list[tuple[int, float, float]]:
    """
    Successive ratios of a quantity measured on refined grids.

    :param values: Mapping cell count -> value
    :ptype values: dict[int, float]
    :return: Rows (N, value, value / previous value), ratio NaN for the coarsest grid
    :rtype: list[tuple[int, float, float]]
    """
    rows = []
    previous = None
    for n in sorted(values):
        value = values[n]
        ratio = value / previous if previous not in (None, 0.0) else math.nan
        rows.append((n, value, ratio))
        previous = value
    return rows
