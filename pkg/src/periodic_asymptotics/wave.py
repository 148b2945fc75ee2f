"""
Damped wave equation z_tt = z_ss - b(s, t) z_t on (0, 1), z = 0 at both ends.

States x = (u, v) live in H^1_0 x L^2 with u at the N + 1 grid nodes and v at
the N cell centres. In Riemann variables w+ = v + u' (moving left) and
w- = v - u' (moving right) the undamped evolution is a one-cell shift per
step of length ds with sign-flipping reflection at the walls. Both families
are stored on one loop of 2N cells,

    loop = (w-_0, ..., w-_{N-1}, -w+_{N-1}, ..., -w+_0),

on which the undamped evolution is ``np.roll(loop, 1)``. The damped solver
is a Strang splitting of that rotation with exact damping half-steps.
"""

import math
from collections.abc import Callable
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from periodic_asymptotics.errors import DomainError
from periodic_asymptotics.geometry import DampingRegion, cell_centers
from periodic_asymptotics.logging_config import get_logger

logger = get_logger(__name__)

WAVE_PERIOD = 2.0
MEMBERSHIP_TOL = 1e-6
SCHEDULE_CACHE_LIMIT = 2**21


# -- states -------------------------------------------------------------------------


@dataclass(frozen=True)
class WaveState:
    """
    Grid state (u, v) with energy inner product ds * sum(u' u'~ + v v~).

    ``u`` has N + 1 node values with u_0 = u_N = 0, ``v`` has N cell values.
    """

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self) -> None:
        """Check grid sizes."""
        if len(self.u) != len(self.v) + 1:
            raise DomainError(f"u needs N + 1 node values for N = {len(self.v)} cells, got {len(self.u)}")

    @property
    def n(self) -> int:
        """Number of cells."""
        return len(self.v)

    @property
    def spacing(self) -> float:
        """Cell width."""
        return 1.0 / self.n

    @property
    def slope(self) -> np.ndarray:
        """Per-cell difference quotient u'."""
        return np.diff(self.u) * self.n

    @property
    def boundary_defect(self) -> float:
        """Largest endpoint value of u."""
        return float(max(abs(self.u[0]), abs(self.u[-1])))

    def norm(self) -> float:
        """
        Energy norm, equal to sqrt(2 E).

        :return: sqrt(ds * sum(|u'|^2 + |v|^2))
        :rtype: float
        """
        return math.sqrt(self.spacing * float(np.sum(np.abs(self.slope) ** 2 + np.abs(self.v) ** 2)))

    def energy(self) -> float:
        """
        Discrete energy E = ||x||^2 / 2.

        :return: Energy
        :rtype: float
        """
        return 0.5 * self.norm() ** 2

    def inner(self, other: "WaveState") -> float:
        """
        Energy inner product.

        :param other: State on the same grid
        :ptype other: WaveState
        :return: ds * sum(u' conj(u'~) + v conj(v~))
        :rtype: float
        """
        return self.spacing * np.sum(self.slope * np.conj(other.slope) + self.v * np.conj(other.v))

    def __add__(self, other: "WaveState") -> "WaveState":
        """
        Componentwise sum.

        :param other: State on the same grid
        :ptype other: WaveState
        :return: Sum
        :rtype: WaveState
        """
        return WaveState(self.u + other.u, self.v + other.v)

    def __sub__(self, other: "WaveState") -> "WaveState":
        """
        Componentwise difference.

        :param other: State on the same grid
        :ptype other: WaveState
        :return: Difference
        :rtype: WaveState
        """
        return WaveState(self.u - other.u, self.v - other.v)

    def scaled(self, factor: float) -> "WaveState":
        """
        Multiply by scalar.

        :param factor: Scalar
        :ptype factor: float
        :return: factor * x
        :rtype: WaveState
        """
        return WaveState(factor * self.u, factor * self.v)

    def to_riemann(self) -> "RiemannState":
        """
        Riemann variables w+ = v + u', w- = v - u'.

        :return: Riemann state
        :rtype: RiemannState
        """
        slope = self.slope
        return RiemannState(self.v + slope, self.v - slope)

    @classmethod
    def zeros(cls, n: int) -> "WaveState":
        """
        Zero state.

        :param n: Number of cells
        :ptype n: int
        :return: (0, 0)
        :rtype: WaveState
        """
        return cls(np.zeros(n + 1), np.zeros(n))

    @classmethod
    def from_functions(
        cls,
        u_func: Callable[[np.ndarray], np.ndarray],
        v_func: Callable[[np.ndarray], np.ndarray],
        n: int,
    ) -> "WaveState":
        """
        Sample u at nodes and v at cell centres; u is pinned to 0 at both ends.

        :param u_func: Position profile on [0, 1]
        :ptype u_func: Callable[[np.ndarray], np.ndarray]
        :param v_func: Velocity profile on (0, 1)
        :ptype v_func: Callable[[np.ndarray], np.ndarray]
        :param n: Number of cells
        :ptype n: int
        :return: Sampled state
        :rtype: WaveState
        """
        u = np.asarray(u_func(node_grid(n)), dtype=float).copy()
        u[0] = u[-1] = 0.0
        return cls(u, np.asarray(v_func(cell_centers(n)), dtype=float))


@dataclass(frozen=True)
class RiemannState:
    """Riemann variables at cell centres; u is rebuilt from u' = (w+ - w-) / 2."""

    w_plus: np.ndarray
    w_minus: np.ndarray

    @property
    def n(self) -> int:
        """Number of cells."""
        return len(self.w_plus)

    @property
    def endpoint_residual(self) -> float:
        """Value of the rebuilt u at s = 1, zero for admissible states."""
        return float(np.sum(self.w_plus - self.w_minus) / (2 * self.n))

    def norm_squared(self) -> float:
        """
        Squared energy norm (ds / 2) * sum(|w+|^2 + |w-|^2).

        :return: ||x||^2
        :rtype: float
        """
        return float(np.sum(np.abs(self.w_plus) ** 2 + np.abs(self.w_minus) ** 2)) / (2 * self.n)

    def energy(self) -> float:
        """
        Discrete energy.

        :return: ||x||^2 / 2
        :rtype: float
        """
        return 0.5 * self.norm_squared()

    def to_wave(self) -> WaveState:
        """
        Rebuild (u, v) by prefix sums anchored at u(0) = 0.

        The last node keeps the telescoped value; see ``endpoint_residual``.

        :return: Wave state
        :rtype: WaveState
        """
        slope = 0.5 * (self.w_plus - self.w_minus)
        u = np.concatenate(([0.0], np.cumsum(slope) / self.n))
        return WaveState(u, 0.5 * (self.w_plus + self.w_minus))

    def to_loop(self) -> np.ndarray:
        """
        Pack into the 2N-cell loop.

        :return: Loop vector
        :rtype: np.ndarray
        """
        return np.concatenate((self.w_minus, -self.w_plus[::-1]))

    @classmethod
    def from_loop(cls, loop: np.ndarray) -> "RiemannState":
        """
        Unpack a 2N-cell loop.

        :param loop: Loop vector
        :ptype loop: np.ndarray
        :return: Riemann state
        :rtype: RiemannState
        """
        n = len(loop) // 2
        return cls(-loop[n:][::-1], loop[:n])


def node_grid(n: int) -> np.ndarray:
    """
    Nodes j / N, j = 0..N.

    :param n: Number of cells
    :ptype n: int
    :return: Node coordinates
    :rtype: np.ndarray
    """
    return np.linspace(0.0, 1.0, n + 1)


def _loop_velocity(loop: np.ndarray) -> np.ndarray:
    """Velocity v = (w+ + w-) / 2 of a loop (or a batch of loops along axis 0)."""
    n = loop.shape[0] // 2
    return 0.5 * (loop[:n] - loop[n:][::-1])


# -- undamped group -------------------------------------------------------------------------


def dalembert(x: WaveState, t: float) -> WaveState:
    """
    Undamped evolution T0(t) x by d'Alembert's formula.

    Exact index rotation when t * N is an integer, linear interpolation
    between the two neighbouring rotations otherwise. T0(2) is the identity.

    :param x: Initial state
    :ptype x: WaveState
    :param t: Any real time
    :ptype t: float
    :return: State at time t
    :rtype: WaveState

    Example::

        >>> x = WaveState.from_functions(lambda s: np.sin(np.pi * s), np.zeros_like, 128)
        >>> np.allclose(dalembert(x, 2.0).u, x.u)
        True
    """
    loop = x.to_riemann().to_loop()
    steps = t * x.n
    whole = math.floor(steps)
    theta = steps - whole
    if math.isclose(theta, 0.0, abs_tol=1e-9) or math.isclose(theta, 1.0, abs_tol=1e-9):
        moved = np.roll(loop, int(round(steps)))
    else:
        moved = (1.0 - theta) * np.roll(loop, whole) + theta * np.roll(loop, whole + 1)
    return RiemannState.from_loop(moved).to_wave()


# -- damped evolution ------------------------------------------------------------------------


class DampingSchedule:
    """
    Coefficient samples used by the Strang half-steps over one period.

    Step k runs from t_k = k ds to t_{k+1}; its two half-steps sample b at
    t_k + ds / 4 and t_{k+1} - ds / 4 at the cell centres.
    """

    def __init__(self, region: DampingRegion, n: int):
        """
        Initialize schedule.

        :param region: 2-periodic damping region
        :ptype region: DampingRegion
        :param n: Number of cells
        :ptype n: int
        """
        self.region = region
        self.n = n
        self.dt = 1.0 / n
        self.steps_per_period = int(round(region.period * n))
        self.centres = cell_centers(n)
        self._table: tuple[np.ndarray, np.ndarray] | None = None
        if self.steps_per_period * n <= SCHEDULE_CACHE_LIMIT:
            k = np.arange(self.steps_per_period)[:, None]
            self._table = (
                region.evaluate(self.centres[None, :], (k + 0.25) * self.dt),
                region.evaluate(self.centres[None, :], (k + 0.75) * self.dt),
            )

    def rates(self, step: int) -> tuple[np.ndarray, np.ndarray]:
        """
        Coefficient values for both half-steps of a step.

        :param step: Global step index (start time / ds + local index)
        :ptype step: int
        :return: Values of b for the first and second half-step
        :rtype: tuple[np.ndarray, np.ndarray]
        """
        k = step % self.steps_per_period
        if self._table is not None:
            return self._table[0][k], self._table[1][k]
        return (
            self.region.evaluate(self.centres, (k + 0.25) * self.dt),
            self.region.evaluate(self.centres, (k + 0.75) * self.dt),
        )


@lru_cache(maxsize=16)
def damping_schedule(region: DampingRegion, n: int) -> DampingSchedule:
    """
    Shared schedule per region and grid.

    :param region: 2-periodic damping region
    :ptype region: DampingRegion
    :param n: Number of cells
    :ptype n: int
    :return: Cached schedule
    :rtype: DampingSchedule
    """
    return DampingSchedule(region, n)


def _damp(loop: np.ndarray, factor: np.ndarray) -> np.ndarray:
    """
    Exact half-step of v' = -b v in loop variables.

    Both Riemann components lose v (1 - f), which keeps u' and scales v by f.
    """
    n = len(factor)
    shape = (n,) + (1,) * (loop.ndim - 1)
    loss = _loop_velocity(loop) * (1.0 - factor).reshape(shape)
    out = loop.copy()
    out[:n] -= loss
    out[n:] += loss[::-1]
    return out


def _strang_steps(loop: np.ndarray, schedule: DampingSchedule, first_step: int, count: int, record: bool = False):
    """Advance a loop (or batch) by count Strang steps; optionally record dissipation and energies."""
    half = 0.5 * schedule.dt
    dissipation = 0.0
    energies = []
    for step in range(first_step, first_step + count):
        b_first, b_second = schedule.rates(step)
        f_first, f_second = np.exp(-b_first * half), np.exp(-b_second * half)
        if record:
            v = _loop_velocity(loop)
            dissipation += 0.5 * half * schedule.dt * float(np.sum(b_first * np.abs(v) ** 2 * (1.0 + f_first**2)))
        loop = np.roll(_damp(loop, f_first), 1, axis=0)
        if record:
            v = _loop_velocity(loop)
            dissipation += 0.5 * half * schedule.dt * float(np.sum(b_second * np.abs(v) ** 2 * (1.0 + f_second**2)))
        loop = _damp(loop, f_second)
        if record:
            energies.append(0.25 * schedule.dt * float(np.sum(np.abs(loop) ** 2)))
    return loop, dissipation, energies


def _check_wave_region(region: DampingRegion) -> None:
    """Wave damping is 2-periodic."""
    if not math.isclose(region.period, WAVE_PERIOD):
        raise DomainError(f"wave damping must have period 2, got {region.period:g}")


def _step_count(t: float, n: int, name: str = "t") -> int:
    """Number of ds-steps in t, rejecting non-multiples."""
    steps = t * n
    if t < 0 or not math.isclose(steps, round(steps), abs_tol=1e-9):
        raise DomainError(f"{name} must be a non-negative multiple of ds = 1/{n}, got {t}")
    return int(round(steps))


@dataclass(frozen=True)
class DampedRun:
    """Result of a damped evolution: final state, damping integral and per-step energies."""

    state: WaveState
    damping_integral: float
    energies: np.ndarray
    initial_energy: float

    @property
    def energy_loss(self) -> float:
        """Left side E(0) - E(t) of the energy identity."""
        return self.initial_energy - self.state.energy()

    @property
    def energy_residual(self) -> float:
        """Relative mismatch between energy loss and damping integral."""
        scale = max(abs(self.energy_loss), abs(self.damping_integral))
        return abs(self.energy_loss - self.damping_integral) / scale if scale > 0 else 0.0


def damped_evolution(region: DampingRegion, x: WaveState, t: float, start: float = 0.0) -> DampedRun:
    """
    Damped evolution U(start + t, start) x with Strang splitting, dt = ds.

    The damping integral of ||b^(1/2) v||^2 is accumulated by the trapezoid
    rule over every half-step.

    :param region: 2-periodic damping region
    :ptype region: DampingRegion
    :param x: Initial state
    :ptype x: WaveState
    :param t: Duration, a multiple of ds
    :ptype t: float
    :param start: Start time, a multiple of ds
    :ptype start: float
    :return: Run record
    :rtype: DampedRun
    :raises DomainError: If period is not 2 or times are not grid multiples
    """
    _check_wave_region(region)
    count = _step_count(t, x.n)
    first = _step_count(start, x.n, "start")
    schedule = damping_schedule(region, x.n)
    loop = x.to_riemann().to_loop()
    loop, dissipation, energies = _strang_steps(loop, schedule, first, count, record=True)
    state = RiemannState.from_loop(loop).to_wave()
    return DampedRun(state, dissipation, np.asarray(energies), x.energy())


def damped_solve(region: DampingRegion, x: WaveState, t: float, start: float = 0.0) -> WaveState:
    """
    Damped evolution returning the final state only.

    :param region: 2-periodic damping region
    :ptype region: DampingRegion
    :param x: Initial state
    :ptype x: WaveState
    :param t: Duration, a multiple of ds
    :ptype t: float
    :param start: Start time, a multiple of ds
    :ptype start: float
    :return: U(start + t, start) x
    :rtype: WaveState
    """
    _check_wave_region(region)
    count = _step_count(t, x.n)
    first = _step_count(start, x.n, "start")
    loop, _, _ = _strang_steps(x.to_riemann().to_loop(), damping_schedule(region, x.n), first, count)
    return RiemannState.from_loop(loop).to_wave()


# -- coordinates and solver --------------------------------------------------------------------


class EnergyCoordinates:
    """
    Orthonormal coordinates of the discrete energy space, dimension 2N - 1.

    Scaled loops sqrt(ds / 2) * loop are isometric images of states and
    sum to zero (u_N = 0). A Householder reflection sending the normalised
    all-ones vector to the last unit vector maps that hyperplane onto the
    first 2N - 1 coordinates.
    """

    def __init__(self, n: int):
        """
        Initialize coordinates.

        :param n: Number of cells
        :ptype n: int
        """
        self.n = n
        self.scale = math.sqrt(0.5 / n)
        reflector = np.full(2 * n, 1.0 / math.sqrt(2 * n))
        reflector[-1] -= 1.0
        self._reflector = reflector / np.linalg.norm(reflector)

    @property
    def dimension(self) -> int:
        """Number of coordinates."""
        return 2 * self.n - 1

    def _reflect(self, z: np.ndarray) -> np.ndarray:
        """Apply the Householder reflection along axis 0."""
        h = self._reflector.reshape((-1,) + (1,) * (z.ndim - 1))
        return z - 2.0 * h * np.tensordot(self._reflector, z, axes=(0, 0))

    def conjugate(self, loop_matrix: np.ndarray) -> np.ndarray:
        """
        Matrix of a loop-space operator (in scaled loop variables) in these coordinates.

        :param loop_matrix: Square matrix of size 2N that annihilates constants
        :ptype loop_matrix: np.ndarray
        :return: Square matrix of size 2N - 1
        :rtype: np.ndarray
        """
        reflected = self._reflect(self._reflect(np.asarray(loop_matrix)).T).T
        return reflected[:-1, :-1]

    def loop_to_coords(self, loop: np.ndarray) -> np.ndarray:
        """
        Coordinates of a loop (or a batch along axis 0).

        :param loop: Loop array with 2N rows
        :ptype loop: np.ndarray
        :return: Coordinate array with 2N - 1 rows
        :rtype: np.ndarray
        """
        return self._reflect(self.scale * np.asarray(loop, dtype=float))[:-1]

    def coords_to_loop(self, coords: np.ndarray) -> np.ndarray:
        """
        Loop of a coordinate vector (or a batch along axis 0).

        :param coords: Coordinate array with 2N - 1 rows
        :ptype coords: np.ndarray
        :return: Loop array with 2N rows
        :rtype: np.ndarray
        """
        coords = np.asarray(coords, dtype=float)
        padded = np.concatenate((coords, np.zeros((1,) + coords.shape[1:])), axis=0)
        return self._reflect(padded) / self.scale

    def encode(self, state: WaveState) -> np.ndarray:
        """
        State to coordinates.

        :param state: Wave state
        :ptype state: WaveState
        :return: Coordinate vector
        :rtype: np.ndarray
        """
        return self.loop_to_coords(state.to_riemann().to_loop())

    def decode(self, coords: np.ndarray) -> WaveState:
        """
        Coordinates to state.

        :param coords: Coordinate vector
        :ptype coords: np.ndarray
        :return: Wave state
        :rtype: WaveState
        """
        return RiemannState.from_loop(self.coords_to_loop(coords)).to_wave()


class WaveSolver:
    """One-period Strang solver acting on energy coordinates."""

    inner_product = "energy"
    multiplicative = False

    def __init__(self, region: DampingRegion, n: int):
        """
        Initialize solver.

        :param region: 2-periodic damping region
        :ptype region: DampingRegion
        :param n: Number of cells
        :ptype n: int
        """
        _check_wave_region(region)
        self.region = region
        self.n = n
        self.period = region.period
        self.spacing = 1.0 / n
        self.schedule = damping_schedule(region, n)
        self._coordinates = EnergyCoordinates(n)

    @property
    def coordinates(self) -> EnergyCoordinates:
        """Orthonormal energy coordinates."""
        return self._coordinates

    def propagate(self, coords: np.ndarray) -> np.ndarray:
        """
        Apply U(2, 0) to coordinate vectors.

        :param coords: Array of shape (2N - 1,) or (2N - 1, k)
        :ptype coords: np.ndarray
        :return: Propagated coordinates
        :rtype: np.ndarray
        """
        loop = self._coordinates.coords_to_loop(coords)
        loop, _, _ = _strang_steps(loop, self.schedule, 0, self.schedule.steps_per_period)
        return self._coordinates.loop_to_coords(loop)

    def multipliers(self) -> np.ndarray:
        """
        Not available; the wave monodromy is not a multiplication operator.

        :return: Never returns
        :rtype: np.ndarray
        :raises NotImplementedError: Always
        """
        raise NotImplementedError("wave monodromy is not multiplicative")


# -- Y / Z decomposition ------------------------------------------------------------------------


@dataclass(frozen=True)
class YDefect:
    """Integral of b |v|^2 along the undamped solution over two time windows."""

    full_period: float
    second_half: float
    tolerance: float

    @property
    def member(self) -> bool:
        """True when the full-period defect is within tolerance."""
        return self.full_period <= self.tolerance


def y_membership_defect(region: DampingRegion, x: WaveState) -> YDefect:
    """
    Integral of b |v(s, t; x)|^2 over one period of the undamped solution.

    Velocities come from exact rotations at t_k = k ds; the coefficient is
    averaged over t_k -/+ ds / 4. Both the full period (0, 2) and the
    window (1, 2) are reported.

    :param region: 2-periodic damping region
    :ptype region: DampingRegion
    :param x: State
    :ptype x: WaveState
    :return: Defects and membership tolerance 1e-6 ||x||^2
    :rtype: YDefect
    """
    _check_wave_region(region)
    n = x.n
    steps = 2 * n
    loop = x.to_riemann().to_loop()
    i = np.arange(n)[None, :]
    k = np.arange(steps)[:, None]
    lo = loop[(i - k) % steps]
    hi = loop[(steps - 1 - i - k) % steps]
    velocity_sq = np.abs(0.5 * (lo - hi)) ** 2
    times = np.arange(steps)[:, None] / n
    centres = cell_centers(n)[None, :]
    early, late = times - 0.25 / n, times + 0.25 / n
    beta = 0.5 * (region.evaluate(centres, early) + region.evaluate(centres, late))
    window = 0.5 * (((np.mod(early, 2.0) > 1.0) & (np.mod(early, 2.0) < 2.0)).astype(float)
                    + ((np.mod(late, 2.0) > 1.0) & (np.mod(late, 2.0) < 2.0)).astype(float))
    weight = 1.0 / n**2
    full = weight * float(np.sum(beta * velocity_sq))
    second = weight * float(np.sum(beta * window * velocity_sq))
    return YDefect(full, second, MEMBERSHIP_TOL * x.norm() ** 2)


@dataclass(frozen=True)
class Example51Basis:
    """
    Grid version of the fixed space for the ray-band and switched examples.

    ``delta`` is the grid-snapped value m / N; I_delta covers cells
    m..N-m-1 and nodes m..N-m.
    """

    delta: float
    m: int
    n: int
    y_state: WaveState

    def interior_state(self, w_func: Callable[[np.ndarray], np.ndarray]) -> WaveState:
        """
        State (w, w') with w in H^1_0(I_delta).

        :param w_func: Profile sampled at interior nodes of I_delta
        :ptype w_func: Callable[[np.ndarray], np.ndarray]
        :return: State supported in I_delta
        :rtype: WaveState
        """
        nodes = node_grid(self.n)
        w = np.zeros(self.n + 1)
        inner = slice(self.m + 1, self.n - self.m)
        w[inner] = np.asarray(w_func(nodes[inner]), dtype=float)
        return WaveState(w, np.diff(w) * self.n)


def _snap_delta(delta: float, n: int) -> int:
    """Grid index m with m / N closest to delta."""
    if not 0.0 <= delta < 0.5:
        raise DomainError(f"delta must lie in [0, 1/2), got {delta}")
    m = int(round(delta * n))
    if 2 * m >= n:
        raise DomainError(f"delta = {delta} leaves no interior cells on {n} cells")
    if not math.isclose(m / n, delta, abs_tol=1e-12):
        logger.warning("delta = %.6g snapped to grid value %d/%d", delta, m, n)
    return m


def example51_basis(delta: float, n: int) -> Example51Basis:
    """
    State (u_delta, v_delta) and the builder for (w, w') states.

    :param delta: Parameter in [0, 1/2), snapped to the grid
    :ptype delta: float
    :param n: Number of cells
    :ptype n: int
    :return: Basis description
    :rtype: Example51Basis
    :raises DomainError: If delta is outside [0, 1/2)
    """
    m = _snap_delta(delta, n)
    d = m / n
    s = node_grid(n)
    u = np.where(s <= d, s, np.where(s >= 1.0 - d, s - 1.0, d * (1.0 - 2.0 * s) / (1.0 - 2.0 * d)))
    u[0] = u[-1] = 0.0
    v = np.zeros(n)
    v[m : n - m] = -1.0 / (1.0 - 2.0 * d)
    return Example51Basis(d, m, n, WaveState(u, v))


def _phi(x: WaveState, m: int) -> np.ndarray:
    """Values phi_{delta, s_j}(x) at nodes j = m..N-m."""
    n = x.n
    nodes = np.arange(m, n - m + 1)
    integral = np.concatenate(([0.0], np.cumsum(x.v[m : n - m]) / n))
    return 0.5 * (x.u[nodes] - x.u[m]) + 0.5 * integral


def example51_projection(delta: float, x: WaveState) -> WaveState:
    """
    Orthogonal projection onto the fixed space of the ray-band monodromy.

    Px = c (u_delta, v_delta) + (w, w') with c = -2 psi / (1 + 2 delta) and
    w(s) = phi_s(x) - (s - delta) / (1 - 2 delta) psi on I_delta.

    :param delta: Parameter in [0, 1/2), snapped to the grid
    :ptype delta: float
    :param x: State
    :ptype x: WaveState
    :return: Px
    :rtype: WaveState
    :raises DomainError: If delta is outside [0, 1/2)
    """
    basis = example51_basis(delta, x.n)
    m, n, d = basis.m, x.n, basis.delta
    phi = _phi(x, m)
    psi = phi[-1]
    coefficient = -2.0 * psi / (1.0 + 2.0 * d)
    s = np.arange(m, n - m + 1) / n
    w_nodes = phi - (s - d) / (1.0 - 2.0 * d) * psi
    w = np.zeros(n + 1)
    w[m : n - m + 1] = w_nodes
    w[m] = w[n - m] = 0.0
    return basis.y_state.scaled(coefficient) + WaveState(w, np.diff(w) * n)


def z_membership_defect(delta: float, x: WaveState) -> float:
    """
    Distance-like defect of x from Z = Y-perp.

    Sum of ||u' + v||_{L2(I_delta)} and the normalised component of x along
    (u_delta, v_delta).

    :param delta: Parameter in [0, 1/2), snapped to the grid
    :ptype delta: float
    :param x: State
    :ptype x: WaveState
    :return: Non-negative defect, zero iff x lies in Z
    :rtype: float
    """
    basis = example51_basis(delta, x.n)
    m, n = basis.m, x.n
    local = (x.slope + x.v)[m : n - m]
    transport_part = math.sqrt(float(np.sum(np.abs(local) ** 2)) / n)
    y = basis.y_state
    return transport_part + abs(complex(x.inner(y))) / y.norm()


# -- trajectories ------------------------------------------------------------------------------


@dataclass(frozen=True)
class Trajectory:
    """Rows (t, energy, dist_to_periodic) plus final snapshots (s, u) and (s, v)."""

    rows: np.ndarray
    u_snapshot: np.ndarray
    v_snapshot: np.ndarray
    final_state: WaveState = field(repr=False)


def trajectory(
    region: DampingRegion,
    x: WaveState,
    periods: int,
    projection: Callable[[WaveState], WaveState] | None = None,
    stride: int = 1,
) -> Trajectory:
    """
    Damped trajectory sampled at multiples of stride steps.

    The periodic limit is U(t, 0) P x; its distance to z(t) is the norm
    of U(t, 0)(x - P x). Without a projection P = 0.

    :param region: 2-periodic damping region
    :ptype region: DampingRegion
    :param x: Initial state
    :ptype x: WaveState
    :param periods: Number of periods to simulate
    :ptype periods: int
    :param projection: Projection onto the fixed space, or None
    :ptype projection: Callable[[WaveState], WaveState] | None
    :param stride: Steps between rows
    :ptype stride: int
    :return: Trajectory record
    :rtype: Trajectory
    """
    _check_wave_region(region)
    n = x.n
    schedule = damping_schedule(region, n)
    residual = x - projection(x) if projection is not None else x
    loops = np.stack((x.to_riemann().to_loop(), residual.to_riemann().to_loop()), axis=1)
    total = periods * schedule.steps_per_period
    rows = [[0.0, x.energy(), residual.norm()]]
    done = 0
    while done < total:
        count = min(stride, total - done)
        loops, _, _ = _strang_steps(loops, schedule, done, count)
        done += count
        norms_sq = np.sum(np.abs(loops) ** 2, axis=0) / (2 * n)
        rows.append([done / n, 0.5 * norms_sq[0], math.sqrt(norms_sq[1])])
    final = RiemannState.from_loop(loops[:, 0]).to_wave()
    u_table = np.column_stack((node_grid(n), final.u))
    v_table = np.column_stack((cell_centers(n), final.v))
    return Trajectory(np.asarray(rows), u_table, v_table, final)
