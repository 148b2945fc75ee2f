"""
Plain-text and CSV artifacts.

CSV files are comma separated with a mandatory header row and floats in
scientific notation with 17 significant digits, so identical runs produce
byte-identical files. ``report.txt`` is a sequence of titled sections of
``key: value`` lines followed by claim tables.
"""

import csv
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from periodic_asymptotics.logging_config import get_logger

logger = get_logger(__name__)

FLOAT_FORMAT = "%.16e"
REPORT_NAME = "report.txt"


def format_value(value: object) -> str:
    """
    Render one CSV or report cell.

    :param value: Cell value
    :ptype value: object
    :return: Text; floats use 17 significant digits, booleans 'true'/'false'
    :rtype: str
    """
    if isinstance(value, bool | np.bool_):
        return "true" if value else "false"
    if isinstance(value, int | np.integer):
        return str(int(value))
    if isinstance(value, float | np.floating):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return FLOAT_FORMAT % value
    if isinstance(value, complex | np.complexfloating):
        sign = "+" if np.imag(value) >= 0 else "-"
        return f"{format_value(float(np.real(value)))}{sign}{format_value(abs(float(np.imag(value))))}j"
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[object]]) -> Path:
    """
    Write a CSV file with header row.

    :param path: Target file; parent directories are created
    :ptype path: Path
    :param header: Column names
    :ptype header: Sequence[str]
    :param rows: Data rows
    :ptype rows: Iterable[Sequence[object]]
    :return: The written path
    :rtype: Path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            if len(row) != len(header):
                raise ValueError(f"row has {len(row)} cells, header has {len(header)}")
            writer.writerow([format_value(v) for v in row])
            count += 1
    logger.debug("Wrote %s (%d rows)", path, count)
    return path


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    """
    Read a CSV file written by :func:`write_csv`.

    :param path: CSV file
    :ptype path: Path
    :return: Header and raw rows
    :rtype: tuple[list[str], list[list[str]]]
    """
    with Path(path).open(newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    return rows[0], rows[1:]


class ClaimStatus(str, Enum):
    """Outcome of one checked claim."""

    PASS = "PASS"
    FAIL_AS_EXPECTED = "FAIL-as-expected"
    FAIL = "FAIL"
    INFO = "INFO"


@dataclass(frozen=True)
class Claim:
    """
    Qualitative claim with predicted and observed truth values.

    A claim predicted false and observed false is FAIL-as-expected; any
    disagreement is FAIL. Informational claims carry no prediction.
    """

    name: str
    predicted: bool | None
    observed: bool
    module: str
    detail: str = ""

    @property
    def status(self) -> ClaimStatus:
        """Status derived from prediction and observation."""
        if self.predicted is None:
            return ClaimStatus.INFO
        if self.predicted != self.observed:
            return ClaimStatus.FAIL
        return ClaimStatus.PASS if self.observed else ClaimStatus.FAIL_AS_EXPECTED


@dataclass
class Report:
    """Titled report with key/value sections and claims."""

    title: str
    sections: list[tuple[str, list[str]]] = field(default_factory=list)
    claims: list[Claim] = field(default_factory=list)

    def section(self, heading: str) -> list[str]:
        """
        Start a new section.

        :param heading: Section heading
        :ptype heading: str
        :return: Line list of the section, to append to
        :rtype: list[str]
        """
        lines: list[str] = []
        self.sections.append((heading, lines))
        return lines

    def add(self, heading: str, **values: object) -> None:
        """
        Add a section of ``key: value`` lines.

        :param heading: Section heading
        :ptype heading: str
        :param values: Entries in insertion order
        :ptype values: object
        """
        lines = self.section(heading)
        lines.extend(f"{key}: {format_value(value)}" for key, value in values.items())

    def claim(self, claim: Claim) -> Claim:
        """
        Record a claim and log its status.

        :param claim: Claim to record
        :ptype claim: Claim
        :return: The same claim
        :rtype: Claim
        """
        self.claims.append(claim)
        log = logger.warning if claim.status is ClaimStatus.FAIL else logger.info
        log("%s: %s (%s)", claim.status.value, claim.name, claim.detail)
        return claim

    @property
    def failed(self) -> bool:
        """True when any claim has status FAIL."""
        return any(c.status is ClaimStatus.FAIL for c in self.claims)

    def render(self) -> str:
        """
        Report text.

        :return: Multi-line text ending with a newline
        :rtype: str
        """
        out = [self.title, "=" * len(self.title), ""]
        for heading, lines in self.sections:
            out.extend([f"[{heading}]", *lines, ""])
        if self.claims:
            out.append("[claims]")
            width = max(len(c.name) for c in self.claims)
            for c in self.claims:
                predicted = "-" if c.predicted is None else format_value(c.predicted)
                out.append(
                    f"{c.status.value:<16} {c.name:<{width}}  predicted={predicted} observed={format_value(c.observed)}"
                    f"  [{c.module}] {c.detail}".rstrip()
                )
            out.append("")
        return "\n".join(out)

    def write(self, directory: Path) -> Path:
        """
        Write ``report.txt`` into a directory.

        :param directory: Output directory, created when missing
        :ptype directory: Path
        :return: Path of the report
        :rtype: Path
        """
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / REPORT_NAME
        path.write_text(self.render(), encoding="utf-8")
        return path
