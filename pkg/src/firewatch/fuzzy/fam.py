"""Risk levels and fuzzy associative memory (FAM) rule tables.

Each monitored variable carries a 4x4 rule table keyed by the fuzzy
term of the latest reading (rows) and the term of its running average
(columns).  Every cell names the risk level that rule asserts; rule
strength is the min of the two degrees and per-level activation is the
max over all cells asserting that level.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping

from ..errors import ConfigError

if TYPE_CHECKING:  # pragma: no cover - import cycle guard for type hints
    from .variables import FuzzifiedValue

log = logging.getLogger(__name__)


class RiskLevel(enum.IntEnum):
    """Fire-risk severity, totally ordered from none to extreme."""

    NFR = 0  # no fire risk
    LFR = 1  # low fire risk
    HFR = 2  # high fire risk
    EFR = 3  # extreme fire risk

    def __str__(self) -> str:  # "NFR" rather than "RiskLevel.NFR"
        return self.name

    @classmethod
    def parse(cls, value) -> "RiskLevel":
        if isinstance(value, RiskLevel):
            return value
        if isinstance(value, str) and value.upper() in cls.__members__:
            return cls[value.upper()]
        raise ConfigError(f"unknown risk level {value!r}")


LEVELS = tuple(RiskLevel)


@dataclass(frozen=True)
class FamTable:
    """Complete 4x4 rule table for one monitored variable.

    ``rows``/``cols`` list the variable's term names from least to most
    severe; ``cells[i][j]`` is the level asserted when the last reading
    matches ``rows[i]`` and the average matches ``cols[j]``.
    """

    variable: str
    rows: tuple[str, ...]
    cols: tuple[str, ...]
    cells: tuple[tuple[RiskLevel, ...], ...]

    def __post_init__(self):
        if len(self.cells) != len(self.rows):
            raise ConfigError(f"{self.variable}: FAM needs one cell row per row term")
        if any(len(r) != len(self.cols) for r in self.cells):
            raise ConfigError(f"{self.variable}: ragged FAM cell matrix")
        if len(set(self.rows)) != len(self.rows) or len(set(self.cols)) != len(self.cols):
            raise ConfigError(f"{self.variable}: duplicate FAM term names")
        # Severity must not decrease left-to-right or top-to-bottom;
        # anything else means the table rewards a worsening signal.
        for cells_row in self.cells:
            if any(b < a for a, b in zip(cells_row, cells_row[1:])):
                raise ConfigError(f"{self.variable}: FAM row not monotone in severity")
        for j in range(len(self.cols)):
            col = [self.cells[i][j] for i in range(len(self.rows))]
            if any(b < a for a, b in zip(col, col[1:])):
                raise ConfigError(f"{self.variable}: FAM column not monotone in severity")

    def lookup(self, row_term: str, col_term: str) -> RiskLevel:
        return fam_lookup(self, row_term, col_term)


def fam_lookup(table: FamTable, row_term: str, col_term: str) -> RiskLevel:
    """Return the level asserted by the cell (``row_term``, ``col_term``)."""
    try:
        i = table.rows.index(row_term)
        j = table.cols.index(col_term)
    except ValueError as exc:
        raise KeyError(f"{table.variable}: no FAM cell ({row_term!r}, {col_term!r})") from exc
    return table.cells[i][j]


def infer(
    table: FamTable,
    last: "FuzzifiedValue",
    average: "FuzzifiedValue",
) -> dict[RiskLevel, float]:
    """Fire every rule of ``table`` against fuzzified inputs.

    Rule strength is ``min`` of the row and column degrees (fuzzy AND);
    activations for the same level combine with ``max``.  The result
    always maps all four levels, with 0.0 where nothing fired.

    Args:
        table: rule table for one variable.
        last: fuzzified latest reading (term degrees keyed by row terms).
        average: fuzzified running average (keyed by column terms).

    Returns:
        Dict of per-level activation strengths in [0, 1].
    """
    activations: dict[RiskLevel, float] = {level: 0.0 for level in LEVELS}
    for i, row_term in enumerate(table.rows):
        row_deg = last.degrees.get(row_term, 0.0)
        if row_deg == 0.0:
            continue
        for j, col_term in enumerate(table.cols):
            strength = min(row_deg, average.degrees.get(col_term, 0.0))
            if strength == 0.0:
                continue
            level = table.cells[i][j]
            if strength > activations[level]:
                activations[level] = strength
    return activations
