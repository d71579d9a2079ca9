"""Mamdani-style fuzzy inference core: membership functions, linguistic
variables, FAM rule tables, aggregation and centroid defuzzification."""

from .aggregate import (
    DEFAULT_RESOLUTION,
    AggregatedOutput,
    aggregate,
    defuzzify_centroid,
)
from .fam import LEVELS, FamTable, RiskLevel, fam_lookup, infer
from .membership import MembershipFunction, membership, sample
from .variables import (
    FuzzifiedValue,
    LinguisticVariable,
    classify_level,
    fuzzify,
)

__all__ = [
    "AggregatedOutput",
    "DEFAULT_RESOLUTION",
    "FamTable",
    "FuzzifiedValue",
    "LEVELS",
    "LinguisticVariable",
    "MembershipFunction",
    "RiskLevel",
    "aggregate",
    "classify_level",
    "defuzzify_centroid",
    "fam_lookup",
    "fuzzify",
    "infer",
    "membership",
    "sample",
]
