"""Output aggregation and centroid defuzzification.

Per-level activations from every variable's rule table are combined
with max, each output set is clipped (min) at its level's activation,
and the pointwise max of the clipped sets forms the output envelope.
The crisp result is the envelope centroid on a uniform sample grid.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..errors import ConfigError
from .fam import LEVELS, RiskLevel
from .membership import sample
from .variables import LinguisticVariable

#: Sample count used by :func:`defuzzify_centroid` unless overridden.
DEFAULT_RESOLUTION = 1001
MIN_RESOLUTION = 101


@dataclass(frozen=True)
class AggregatedOutput:
    """Combined per-level activations plus the output variable they clip."""

    output: LinguisticVariable
    activations: Mapping[RiskLevel, float]

    def __post_init__(self):
        for level in LEVELS:
            act = self.activations.get(level, 0.0)
            if not 0.0 <= act <= 1.0:
                raise ConfigError(f"activation for {level} out of [0,1]: {act}")

    def activation(self, level: RiskLevel) -> float:
        return self.activations.get(level, 0.0)

    def envelope(self, xs: np.ndarray) -> np.ndarray:
        """Sample the aggregated output envelope at ``xs``."""
        env = np.zeros_like(xs, dtype=float)
        for term, mf in self.output.terms:
            act = self.activation(RiskLevel.parse(term))
            if act <= 0.0:
                continue
            np.maximum(env, np.minimum(act, sample(mf, xs)), out=env)
        return env


def aggregate(
    activation_maps: Sequence[Mapping[RiskLevel, float]],
    output: LinguisticVariable,
) -> AggregatedOutput:
    """Max-combine per-variable activation maps into one output.

    Args:
        activation_maps: one ``{level: activation}`` map per variable,
            as produced by :func:`firewatch.fuzzy.fam.infer`.
        output: the shared output variable (terms named after levels).

    Raises:
        ConfigError: if ``activation_maps`` is empty.
    """
    if not activation_maps:
        raise ConfigError("aggregate() needs at least one activation map")
    combined = {level: 0.0 for level in LEVELS}
    for amap in activation_maps:
        for level in LEVELS:
            act = amap.get(level, 0.0)
            if act > combined[level]:
                combined[level] = act
    return AggregatedOutput(output=output, activations=combined)


def defuzzify_centroid(agg: AggregatedOutput, resolution: int = DEFAULT_RESOLUTION) -> float:
    """Centroid of the aggregated envelope on a uniform grid.

    Uses trapezoid end-weighting so the discrete centroid converges at
    O(h^2) instead of picking up an O(h) bias from envelope mass
    sitting on the universe bounds.  An identically-zero envelope (no
    rule fired) defuzzifies to 0.0.
    """
    if resolution < MIN_RESOLUTION:
        raise ConfigError(f"centroid resolution must be >= {MIN_RESOLUTION}")
    if all(agg.activation(level) == 0.0 for level in LEVELS):
        return 0.0
    lo, hi = agg.output.universe
    xs = np.linspace(lo, hi, resolution)
    mu = agg.envelope(xs)
    w = np.ones_like(mu)
    w[0] = w[-1] = 0.5
    denom = float(np.dot(w, mu))
    if denom <= 0.0:
        return 0.0
    return float(np.dot(w * xs, mu) / denom)
