"""Linguistic variables: term sets over a crisp universe, fuzzification
and the mapping from a defuzzified percentage back to a risk level."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Mapping

from ..errors import ConfigError, InvalidMeasurementError
from .fam import RiskLevel
from .membership import MembershipFunction, membership

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LinguisticVariable:
    """A named crisp universe partitioned into ordered fuzzy terms.

    ``terms`` maps term name to membership function, ordered from least
    to most severe.  Construction validates that the terms fully cover
    the universe and that consecutive terms overlap, so every crisp
    value fuzzifies to at least one positive degree and adjacent sets
    hand over smoothly.
    """

    name: str
    universe: tuple[float, float]
    terms: tuple[tuple[str, MembershipFunction], ...]
    unit: str = ""

    def __post_init__(self):
        lo, hi = self.universe
        if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
            raise ConfigError(f"{self.name}: bad universe {self.universe}")
        if len(self.terms) < 2:
            raise ConfigError(f"{self.name}: needs at least two terms")
        names = [t for t, _ in self.terms]
        if len(set(names)) != len(names):
            raise ConfigError(f"{self.name}: duplicate term names")
        for term, mf in self.terms:
            a, d = mf.support
            if a < lo or d > hi:
                raise ConfigError(f"{self.name}.{term}: support outside universe")
        self._check_overlap()
        self._check_coverage()

    def _check_overlap(self):
        for (n1, m1), (n2, m2) in zip(self.terms, self.terms[1:]):
            lo = max(m1.support[0], m2.support[0])
            hi = min(m1.support[1], m2.support[1])
            mid = (lo + hi) / 2.0
            if hi <= lo or membership(m1, mid) <= 0.0 or membership(m2, mid) <= 0.0:
                raise ConfigError(f"{self.name}: terms {n1!r} and {n2!r} do not overlap")

    def _check_coverage(self):
        lo, hi = self.universe
        knots = {lo, hi}
        for _, mf in self.terms:
            knots.update(p for p in mf.points if lo <= p <= hi)
        knots = sorted(knots)
        probes = list(knots) + [(p + q) / 2.0 for p, q in zip(knots, knots[1:])]
        for x in probes:
            if all(membership(mf, x) == 0.0 for _, mf in self.terms):
                raise ConfigError(f"{self.name}: no term covers x={x}")

    @property
    def term_names(self) -> tuple[str, ...]:
        return tuple(t for t, _ in self.terms)

    def term(self, name: str) -> MembershipFunction:
        for t, mf in self.terms:
            if t == name:
                return mf
        raise KeyError(f"{self.name}: no term {name!r}")

    def clamp(self, x: float) -> tuple[float, bool]:
        """Clamp ``x`` into the universe; flags whether clamping occurred."""
        lo, hi = self.universe
        if x < lo:
            return lo, True
        if x > hi:
            return hi, True
        return x, False

    def fuzzify(self, x: float) -> "FuzzifiedValue":
        return fuzzify(self, x)


@dataclass(frozen=True)
class FuzzifiedValue:
    """Degrees for every term of one variable at one crisp input."""

    variable: str
    crisp: float
    degrees: Mapping[str, float]
    clamped: bool = False

    def strongest(self) -> str:
        """Term with the highest degree (later, i.e. more severe, wins ties)."""
        best, best_deg = None, -1.0
        for term, deg in self.degrees.items():
            if deg >= best_deg:
                best, best_deg = term, deg
        return best


def fuzzify(variable: LinguisticVariable, x: float) -> FuzzifiedValue:
    """Fuzzify crisp ``x`` against every term of ``variable``.

    Out-of-universe readings are clamped to the nearest bound and
    flagged; non-finite input is rejected.
    """
    if not isinstance(x, (int, float)) or isinstance(x, bool) or not math.isfinite(x):
        raise InvalidMeasurementError(f"{variable.name}: non-finite reading {x!r}")
    xc, clamped = variable.clamp(float(x))
    if clamped:
        log.warning("%s: reading %s outside universe %s, clamped to %s",
                    variable.name, x, variable.universe, xc)
    degrees = {term: membership(mf, xc) for term, mf in variable.terms}
    return FuzzifiedValue(variable=variable.name, crisp=xc, degrees=degrees, clamped=clamped)


def classify_level(percentage: float, output: LinguisticVariable) -> RiskLevel:
    """Map a defuzzified percentage to the output term that dominates it.

    Ties go to the more severe level, so a value sitting exactly on a
    crossover escalates rather than de-escalates.
    """
    best: RiskLevel | None = None
    best_deg = -1.0
    for term, mf in output.terms:
        deg = membership(mf, percentage)
        if deg >= best_deg:
            best, best_deg = RiskLevel.parse(term), deg
    assert best is not None
    return best
