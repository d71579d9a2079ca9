"""Offline wireless-sensor-field simulator."""
from .envmodel import CsvEnvironment, FireEvent, SyntheticEnvironment
from .events import (
    EVENT_KINDS,
    SimEvent,
    TraceAccounting,
    account_trace,
    read_trace,
    write_trace,
)
from .network import (
    DEFAULT_RADIO_RANGE_M,
    CoverageSchedule,
    NeighborGraph,
    great_circle_m,
)
from .runner import SimResult, Simulation, run_scenario
from .scenario import (
    Directive,
    NodeSpec,
    Scenario,
    load_scenario,
    parse_scenario,
)

__all__ = [
    "CsvEnvironment",
    "FireEvent",
    "SyntheticEnvironment",
    "EVENT_KINDS",
    "SimEvent",
    "TraceAccounting",
    "account_trace",
    "read_trace",
    "write_trace",
    "DEFAULT_RADIO_RANGE_M",
    "CoverageSchedule",
    "NeighborGraph",
    "great_circle_m",
    "SimResult",
    "Simulation",
    "run_scenario",
    "Directive",
    "NodeSpec",
    "Scenario",
    "load_scenario",
    "parse_scenario",
]
