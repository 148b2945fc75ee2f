"""
Configuration management for periodic_asymptotics.

Two layers:

- Environment settings with the PERIODICASYM_ prefix (output root, seed,
  default grid size, logging), optionally loaded from a .env file.
- Run files: flat ``key=value`` text parsed with python-dotenv. A dotted key
  ``section.name`` belongs to ``section``; plain keys form the run section.

Example run file::

    system = wave
    n = 128
    horizon = 200
    tasks = monodromy, spectrum, rates
    region.kind = switched
    region.delta = 0.6
    initial.data = random
"""

import math
import os
from dataclasses import dataclass, field
from pathlib import Path

from dotenv import dotenv_values, load_dotenv

from periodic_asymptotics.errors import DomainError, PeriodicAsymptoticsError
from periodic_asymptotics.geometry import DampingRegion, region_from_spec

SYSTEM_PERIODS = {"transport": 1.0, "wave": 2.0}
TASK_ORDER = ("simulate", "monodromy", "spectrum", "observability", "gcc", "rates")
INITIAL_DATA = ("random", "smooth", "ones", "sine", "file", "polynomial", "superpoly", "slow", "example51")
MIN_CELLS = 2**6
MAX_CELLS = 2**14
RUN_KEYS = {"system", "n", "n_t", "horizon", "stride", "tasks", "output", "seed"}
SECTIONS = {"region", "initial", "spectrum", "observability", "gcc", "rates", "simulate", "monodromy"}


class ConfigError(PeriodicAsymptoticsError):
    """Raised when there is configuration error."""

    pass


class EnvConfigProvider:
    """
    Configuration provider that reads from environment variables.

    Default implementation of ConfigProvider protocol. All variables use
    the PERIODICASYM_ prefix to avoid conflicts with other tools.

    Example usage::

        config = EnvConfigProvider()
        out = config.get_output_root()
        seed = config.get_seed()
    """

    PREFIX = "PERIODICASYM_"

    # Setting name to (environment variable, default) mapping
    SETTINGS = {
        "OUTPUT_ROOT": ("PERIODICASYM_OUTPUT_ROOT", "output"),
        "SEED": ("PERIODICASYM_SEED", "0"),
        "N": ("PERIODICASYM_N", "256"),
        "LOG_LEVEL": ("PERIODICASYM_LOG_LEVEL", "INFO"),
        "LOG_FILE": ("PERIODICASYM_LOG_FILE", None),
    }

    def get(self, name: str, default: str | None = None) -> str | None:
        """
        Get raw setting value.

        :param name: Setting name without prefix (e.g. 'OUTPUT_ROOT')
        :ptype name: str
        :param default: Value returned when setting is absent; the built-in default is used when None
        :ptype default: str | None
        :return: Setting string, or default
        :rtype: str | None
        :raises ValueError: If name is not a known setting

        Example::

            >>> EnvConfigProvider().get("LOG_LEVEL")
            'INFO'
        """
        key = name.upper()
        if key not in self.SETTINGS:
            valid = ", ".join(sorted(self.SETTINGS))
            raise ValueError(f"Unknown setting: {name}. Supported settings: {valid}")
        env_var, builtin = self.SETTINGS[key]
        value = os.getenv(env_var)
        if value is None or value.strip() == "":
            return default if default is not None else builtin
        return value.strip()

    def get_output_root(self) -> Path:
        """
        Get default output root directory.

        :return: Output root path
        :rtype: Path
        """
        return Path(self.get("OUTPUT_ROOT"))

    def get_seed(self) -> int:
        """
        Get default random seed.

        :return: Non-negative seed
        :rtype: int
        :raises ConfigError: If setting is not a non-negative integer
        """
        return parse_seed(self.get("SEED"), "PERIODICASYM_SEED")

    def get_cell_count(self) -> int:
        """
        Get default number of grid cells.

        :return: Cell count (power of two)
        :rtype: int
        :raises ConfigError: If setting is not an admissible cell count
        """
        return parse_cell_count(self.get("N"), "PERIODICASYM_N")


def load_env_config(env_file: str | None = None) -> None:
    """
    Load environment variables from .env file.

    :param env_file: Path to .env file. If None, looks for .env in current directory
                     and parent directories.
    :ptype env_file: str | None
    :return: None
    :rtype: None

    Example::

        >>> from periodic_asymptotics import load_env_config
        >>> load_env_config()
    """
    if env_file:
        load_dotenv(env_file)
        return
    current = Path.cwd()
    for parent in [current, *current.parents]:
        env_path = parent / ".env"
        if env_path.exists():
            load_dotenv(env_path)
            return
    load_dotenv()


# Module-level singleton instance for convenience API
_default_config = EnvConfigProvider()


def get_output_root() -> Path:
    """
    Get default output root from environment.

    :return: Output root path
    :rtype: Path
    """
    return _default_config.get_output_root()


def get_default_seed() -> int:
    """
    Get default seed from environment.

    :return: Non-negative seed
    :rtype: int
    :raises ConfigError: If PERIODICASYM_SEED is malformed
    """
    return _default_config.get_seed()


def parse_seed(raw: str | None, source: str) -> int:
    """
    Parse non-negative integer seed.

    :param raw: Raw string value
    :ptype raw: str | None
    :param source: Name of the setting, used in error messages
    :ptype source: str
    :return: Seed
    :rtype: int
    :raises ConfigError: If value is missing, not an integer, or negative
    """
    try:
        seed = int(str(raw).strip())
    except ValueError as exc:
        raise ConfigError(f"{source} must be a non-negative integer, got {raw!r}") from exc
    if seed < 0:
        raise ConfigError(f"{source} must be a non-negative integer, got {seed}")
    return seed


def parse_cell_count(raw: str | int | None, source: str) -> int:
    """
    Parse grid cell count, a power of two between 2**6 and 2**14.

    :param raw: Raw value
    :ptype raw: str | int | None
    :param source: Name of the setting, used in error messages
    :ptype source: str
    :return: Cell count
    :rtype: int
    :raises ConfigError: If value is not an admissible power of two
    """
    try:
        n = int(str(raw).strip())
    except ValueError as exc:
        raise ConfigError(f"{source} must be an integer, got {raw!r}") from exc
    if n < MIN_CELLS or n > MAX_CELLS or n & (n - 1):
        raise ConfigError(f"{source} must be a power of two between {MIN_CELLS} and {MAX_CELLS}, got {n}")
    return n


@dataclass(frozen=True)
class RegionSpec:
    """Geometry keys of a run file."""

    kind: str
    delta: float = 0.0
    amplitude: float = 1.0
    period: float | None = None
    rectangles: tuple[tuple[float, float, float, float], ...] = ()

    def build(self, system_period: float) -> DampingRegion:
        """
        Construct the damping region described by the keys.

        :param system_period: Period implied by the evolution system
        :ptype system_period: float
        :return: Validated damping region
        :rtype: DampingRegion
        :raises ConfigError: If keys are inconsistent or out of range
        """
        period = self.period if self.period is not None else system_period
        try:
            region = region_from_spec(self.kind, self.delta, self.amplitude, period, self.rectangles)
        except DomainError as exc:
            raise ConfigError(f"invalid region: {exc}") from exc
        if not math.isclose(region.period, system_period):
            raise ConfigError(f"region period {region.period:g} does not match system period {system_period:g}")
        return region


@dataclass(frozen=True)
class InitialSpec:
    """Initial-data keys of a run file."""

    data: str = "random"
    path: Path | None = None
    params: dict[str, str] = field(default_factory=dict)

    def float_param(self, name: str, default: float) -> float:
        """
        Read numeric constructor parameter.

        :param name: Parameter key below ``initial.``
        :ptype name: str
        :param default: Value when key is absent
        :ptype default: float
        :return: Parameter value
        :rtype: float
        :raises ConfigError: If value is not a number
        """
        raw = self.params.get(name)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError as exc:
            raise ConfigError(f"initial.{name} must be a number, got {raw!r}") from exc


@dataclass(frozen=True)
class RunConfig:
    """
    Validated run description.

    Task options not covered by dedicated fields stay available through
    :meth:`option`.
    """

    system: str
    region: DampingRegion
    region_spec: RegionSpec
    n: int
    n_t: int | None
    horizon: int
    stride: int
    tasks: tuple[str, ...]
    initial: InitialSpec
    output_dir: Path
    seed: int
    sections: dict[str, dict[str, str]] = field(default_factory=dict)

    @property
    def period(self) -> float:
        """Period of the evolution system."""
        return SYSTEM_PERIODS[self.system]

    def option(self, section: str, name: str, default: str) -> str:
        """
        Get task option as string.

        :param section: Section name, e.g. 'spectrum'
        :ptype section: str
        :param name: Key inside the section
        :ptype name: str
        :param default: Value when key is absent
        :ptype default: str
        :return: Option value
        :rtype: str
        """
        return self.sections.get(section, {}).get(name, default)

    def int_option(self, section: str, name: str, default: int) -> int:
        """
        Get task option as integer.

        :param section: Section name
        :ptype section: str
        :param name: Key inside the section
        :ptype name: str
        :param default: Value when key is absent
        :ptype default: int
        :return: Option value
        :rtype: int
        :raises ConfigError: If value is not an integer
        """
        raw = self.option(section, name, str(default))
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"{section}.{name} must be an integer, got {raw!r}") from exc

    def float_option(self, section: str, name: str) -> float | None:
        """
        Get optional task option as finite float.

        :param section: Section name
        :ptype section: str
        :param name: Key inside the section
        :ptype name: str
        :return: Option value, None when absent or empty
        :rtype: float | None
        :raises ConfigError: If value is not a finite number
        """
        raw = self.option(section, name, "")
        return _parse_float(raw, f"{section}.{name}") if raw else None

    def ordered_tasks(self) -> list[str]:
        """
        Tasks in dependency order (monodromy before spectrum and rates).

        :return: Ordered task names
        :rtype: list[str]
        """
        return [task for task in TASK_ORDER if task in self.tasks]


def _split_sections(raw: dict[str, str | None]) -> tuple[dict[str, str], dict[str, dict[str, str]]]:
    """
    Group flat keys into the run section and dotted sections.

    :param raw: Flat key to value mapping
    :ptype raw: dict[str, str | None]
    :return: Run keys and per-section mappings
    :rtype: tuple[dict[str, str], dict[str, dict[str, str]]]
    :raises ConfigError: On unknown keys or sections
    """
    run: dict[str, str] = {}
    sections: dict[str, dict[str, str]] = {}
    for key, value in raw.items():
        key = key.strip().lower()
        text = "" if value is None else str(value).strip()
        if "." in key:
            section, name = key.split(".", 1)
            if section not in SECTIONS:
                raise ConfigError(f"unknown section '{section}' in key '{key}'")
            sections.setdefault(section, {})[name] = text
        else:
            if key not in RUN_KEYS:
                raise ConfigError(f"unknown key '{key}'")
            run[key] = text
    return run, sections


def _parse_float(raw: str, key: str) -> float:
    """
    Parse finite float.

    :param raw: Raw text
    :ptype raw: str
    :param key: Key name for error messages
    :ptype key: str
    :return: Parsed value
    :rtype: float
    :raises ConfigError: If value is not a finite number
    """
    try:
        value = float(raw)
    except ValueError as exc:
        raise ConfigError(f"{key} must be a number, got {raw!r}") from exc
    if not math.isfinite(value):
        raise ConfigError(f"{key} must be finite, got {raw!r}")
    return value


def _parse_positive_int(raw: str, key: str) -> int:
    """
    Parse positive integer.

    :param raw: Raw text
    :ptype raw: str
    :param key: Key name for error messages
    :ptype key: str
    :return: Parsed value
    :rtype: int
    :raises ConfigError: If value is not a positive integer
    """
    try:
        value = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{key} must be a positive integer, got {raw!r}") from exc
    if value <= 0:
        raise ConfigError(f"{key} must be a positive integer, got {value}")
    return value


def parse_rectangles(raw: str) -> tuple[tuple[float, float, float, float], ...]:
    """
    Parse ``s0,s1,t0,t1; s0,s1,t0,t1`` rectangle lists.

    :param raw: Semicolon separated rectangles, parentheses optional
    :ptype raw: str
    :return: Rectangles as (s0, s1, t0, t1) tuples
    :rtype: tuple[tuple[float, float, float, float], ...]
    :raises ConfigError: If an entry does not have four numbers

    Example::

        >>> parse_rectangles("(0, 0.5, 0, 1); (0.5, 1, 1, 2)")
        ((0.0, 0.5, 0.0, 1.0), (0.5, 1.0, 1.0, 2.0))
    """
    rectangles = []
    for chunk in raw.split(";"):
        chunk = chunk.strip().strip("()[]").strip()
        if not chunk:
            continue
        parts = [p for p in chunk.split(",") if p.strip()]
        if len(parts) != 4:
            raise ConfigError(f"rectangle '{chunk}' must have four numbers s0,s1,t0,t1")
        s0, s1, t0, t1 = (_parse_float(p.strip(), "region.rectangles") for p in parts)
        rectangles.append((s0, s1, t0, t1))
    return tuple(rectangles)


def build_run_config(
    raw: dict[str, str | None],
    base_dir: Path | None = None,
    provider: EnvConfigProvider | None = None,
) -> RunConfig:
    """
    Validate flat key/value mapping into a RunConfig.

    :param raw: Flat key to value mapping (dotted keys for sections)
    :ptype raw: dict[str, str | None]
    :param base_dir: Directory relative file paths are resolved against
    :ptype base_dir: Path | None
    :param provider: Environment provider for defaults
    :ptype provider: EnvConfigProvider | None
    :return: Validated configuration
    :rtype: RunConfig
    :raises ConfigError: If any key is missing, unknown or invalid
    """
    provider = provider or _default_config
    base_dir = base_dir or Path.cwd()
    run, sections = _split_sections(raw)

    system = run.get("system", "").lower()
    if system not in SYSTEM_PERIODS:
        raise ConfigError(f"system must be one of {sorted(SYSTEM_PERIODS)}, got {system!r}")

    n = parse_cell_count(run["n"], "n") if "n" in run else provider.get_cell_count()
    n_t = _parse_positive_int(run["n_t"], "n_t") if run.get("n_t") else None
    horizon = _parse_positive_int(run.get("horizon", "100"), "horizon")
    stride = _parse_positive_int(run.get("stride", "1"), "stride")
    seed = parse_seed(run["seed"], "seed") if "seed" in run else provider.get_seed()

    tasks = tuple(t.strip().lower() for t in run.get("tasks", "").split(",") if t.strip())
    if not tasks:
        raise ConfigError("tasks must name at least one of " + ", ".join(TASK_ORDER))
    unknown = sorted(set(tasks) - set(TASK_ORDER))
    if unknown:
        raise ConfigError(f"unknown tasks: {', '.join(unknown)}")

    region_keys = sections.pop("region", {})
    if "kind" not in region_keys:
        raise ConfigError("region.kind is required")
    spec = RegionSpec(
        kind=region_keys["kind"].lower(),
        delta=_parse_float(region_keys.get("delta", "0"), "region.delta"),
        amplitude=_parse_float(region_keys.get("amplitude", "1"), "region.amplitude"),
        period=_parse_float(region_keys["period"], "region.period") if region_keys.get("period") else None,
        rectangles=parse_rectangles(region_keys.get("rectangles", "")),
    )
    region = spec.build(SYSTEM_PERIODS[system])

    initial_keys = dict(sections.pop("initial", {}))
    data = initial_keys.pop("data", "random").lower()
    if data not in INITIAL_DATA:
        raise ConfigError(f"initial.data must be one of {', '.join(INITIAL_DATA)}, got {data!r}")
    path = None
    if data == "file":
        if "file" not in initial_keys:
            raise ConfigError("initial.file is required when initial.data = file")
        path = Path(initial_keys.pop("file"))
        if not path.is_absolute():
            path = base_dir / path
        if not path.exists():
            raise ConfigError(f"initial data file not found: {path}")
    if data == "polynomial" and system != "transport":
        raise ConfigError("initial.data = polynomial needs system = transport")
    if data == "example51" and (system != "wave" or spec.kind != "ray_band"):
        raise ConfigError("initial.data = example51 needs system = wave and region.kind = ray_band")
    initial = InitialSpec(data=data, path=path, params=initial_keys)

    if run.get("output"):
        output_dir = Path(run["output"])
        if not output_dir.is_absolute():
            output_dir = base_dir / output_dir
    else:
        output_dir = provider.get_output_root() / f"{system}-{spec.kind}-n{n}"

    return RunConfig(
        system=system,
        region=region,
        region_spec=spec,
        n=n,
        n_t=n_t,
        horizon=horizon,
        stride=stride,
        tasks=tasks,
        initial=initial,
        output_dir=output_dir,
        seed=seed,
        sections=sections,
    )


def load_run_config(path: str | Path, overrides: dict[str, str] | None = None) -> RunConfig:
    """
    Load and validate run file.

    :param path: Path to key=value run file
    :ptype path: str | Path
    :param overrides: Keys replacing those of the file (command line flags)
    :ptype overrides: dict[str, str] | None
    :return: Validated configuration
    :rtype: RunConfig
    :raises ConfigError: If file is missing or invalid

    Example::

        >>> config = load_run_config("runs/switched.cfg", {"n": "128"})
        >>> config.ordered_tasks()
        ['monodromy', 'spectrum', 'observability', 'gcc', 'rates']
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"run file not found: {path}")
    raw: dict[str, str | None] = dict(dotenv_values(path))
    for key, value in (overrides or {}).items():
        raw[key] = value
    return build_run_config(raw, base_dir=path.parent)
