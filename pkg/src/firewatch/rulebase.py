"""Rule-base configuration: loading, validation and the packaged default."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

import yaml

from .errors import ConfigError
from .fuzzy import (
    DEFAULT_RESOLUTION,
    FamTable,
    LinguisticVariable,
    MembershipFunction,
    RiskLevel,
)

log = logging.getLogger(__name__)

#: Measurement fields fed through the inference pipeline, in canonical order.
ENV_FIELDS = (
    "temperature_c",
    "humidity_pct",
    "wind_kmh",
    "rainfall_mm",
    "co2_ppm",
    "co_ppm",
    "o2_pct",
)

#: Averaging window meaning "every sample registered today".
WINDOW_ALL = "all"


@dataclass(frozen=True)
class ControllerSettings:
    """Averaging windows, sampling periods and assorted controller knobs."""

    windows: Mapping[RiskLevel, int | None]  # None = all of today's samples
    declaration_window: int
    cycle_periods_s: Mapping[RiskLevel, int]
    centroid_resolution: int = DEFAULT_RESOLUTION
    timezone: str = "UTC"


@dataclass(frozen=True)
class RuleBase:
    """Validated rule base: input variables + FAMs, output sets, settings."""

    version: int
    variables: Mapping[str, LinguisticVariable]
    fams: Mapping[str, FamTable]
    output: LinguisticVariable
    controller: ControllerSettings

    def variable(self, name: str) -> LinguisticVariable:
        try:
            return self.variables[name]
        except KeyError as exc:
            raise KeyError(f"no variable {name!r} in rule base") from exc

    def fam(self, name: str) -> FamTable:
        return self.fams[name]


def default_rulebase_path() -> Path:
    """Filesystem path of the rule base shipped inside the package."""
    return Path(resources.files("firewatch").joinpath("config/default-rulebase.yaml"))


def load_rulebase(path: str | Path | None = None) -> RuleBase:
    """Load and validate a rule-base YAML file (packaged default if None).

    Raises:
        ConfigError: on schema problems, non-covering term sets, or FAM
            tables that are incomplete or not severity-monotone.
    """
    p = Path(path) if path is not None else default_rulebase_path()
    try:
        raw = yaml.safe_load(p.read_text())
    except FileNotFoundError:
        raise ConfigError(f"rule base not found: {p}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"rule base {p} is not valid YAML: {exc}")
    if not isinstance(raw, dict):
        raise ConfigError(f"rule base {p}: top level must be a mapping")
    return parse_rulebase(raw)


def parse_rulebase(raw: dict) -> RuleBase:
    version = raw.get("version")
    if version != 1:
        raise ConfigError(f"unsupported rule-base version {version!r}")

    output = _parse_variable("risk", raw.get("output"), require_levels=True)

    variables: dict[str, LinguisticVariable] = {}
    fams: dict[str, FamTable] = {}
    var_section = raw.get("variables")
    if not isinstance(var_section, dict) or not var_section:
        raise ConfigError("rule base defines no input variables")
    for name, spec in var_section.items():
        var = _parse_variable(name, spec)
        fam_spec = spec.get("fam")
        if not isinstance(fam_spec, dict):
            raise ConfigError(f"{name}: missing FAM table")
        fams[name] = _parse_fam(name, fam_spec, var)
        variables[name] = var

    missing = [f for f in ENV_FIELDS if f not in variables]
    if missing:
        raise ConfigError(f"rule base missing variables: {missing}")

    controller = _parse_controller(raw.get("controller") or {})
    return RuleBase(
        version=version,
        variables=variables,
        fams=fams,
        output=output,
        controller=controller,
    )


def _parse_variable(name: str, spec, require_levels: bool = False) -> LinguisticVariable:
    if not isinstance(spec, dict):
        raise ConfigError(f"{name}: variable spec must be a mapping")
    universe = spec.get("universe")
    if not (isinstance(universe, list) and len(universe) == 2):
        raise ConfigError(f"{name}: universe must be [lo, hi]")
    terms = []
    for t in spec.get("terms") or []:
        try:
            mf = MembershipFunction(kind=t["shape"], points=tuple(t["points"]))
            terms.append((str(t["name"]), mf))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"{name}: malformed term entry {t!r}") from exc
    var = LinguisticVariable(
        name=name,
        universe=(float(universe[0]), float(universe[1])),
        terms=tuple(terms),
        unit=str(spec.get("unit", "")),
    )
    if require_levels:
        expected = tuple(level.name for level in RiskLevel)
        if var.term_names != expected:
            raise ConfigError(
                f"{name}: output terms must be {expected} in severity order, "
                f"got {var.term_names}"
            )
    return var


def _parse_fam(name: str, spec: dict, var: LinguisticVariable) -> FamTable:
    rows = tuple(spec.get("rows") or ())
    cols = tuple(spec.get("cols") or ())
    if set(rows) != set(var.term_names) or set(cols) != set(var.term_names):
        raise ConfigError(f"{name}: FAM rows/cols must name every term of the variable")
    cells = tuple(
        tuple(RiskLevel.parse(c) for c in row) for row in (spec.get("cells") or ())
    )
    return FamTable(variable=name, rows=rows, cols=cols, cells=cells)


def _parse_controller(spec: dict) -> ControllerSettings:
    windows_raw = spec.get("windows") or {"NFR": WINDOW_ALL, "LFR": 15, "HFR": 10, "EFR": 5}
    if any(level.name not in windows_raw for level in RiskLevel):
        raise ConfigError("controller.windows must cover all four levels")
    windows: dict[RiskLevel, int | None] = {}
    for level in RiskLevel:
        val = windows_raw[level.name]
        if val == WINDOW_ALL:
            windows[level] = None
        elif isinstance(val, int) and val >= 1:
            windows[level] = val
        else:
            raise ConfigError(f"controller.windows.{level.name}: bad value {val!r}")

    decl = spec.get("declaration_window", 5)
    if not isinstance(decl, int) or decl < 1:
        raise ConfigError(f"controller.declaration_window: bad value {decl!r}")

    periods_raw = spec.get("cycle_periods_s") or {
        "NFR": 300, "LFR": 180, "HFR": 120, "EFR": 60,
    }
    periods: dict[RiskLevel, int] = {}
    for level in RiskLevel:
        val = periods_raw.get(level.name)
        if not isinstance(val, int) or val < 1:
            raise ConfigError(f"controller.cycle_periods_s.{level.name}: bad value {val!r}")
        periods[level] = val

    resolution = spec.get("centroid_resolution", DEFAULT_RESOLUTION)
    if not isinstance(resolution, int):
        raise ConfigError("controller.centroid_resolution must be an integer")

    return ControllerSettings(
        windows=windows,
        declaration_window=decl,
        cycle_periods_s=periods,
        centroid_resolution=resolution,
        timezone=str(spec.get("timezone", "UTC")),
    )
