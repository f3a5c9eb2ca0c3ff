"""Deterministic discrete-event simulation of the SFC data plane."""

from .dataplane import (
    FlowTable,
    Metrics,
    Packet,
    SfRuntime,
    SimConfig,
    classify,
    flow_table_match,
    sf_transit,
)
from .engine import (
    ACTIVE_BACKEND,
    COMPILED_AVAILABLE,
    Scenario,
    Simulation,
    SimulationError,
    TraceEvent,
    apply_scenario,
    available_backends,
    format_trace,
    measure_rtt,
    run_simulation,
)

__all__ = [
    "ACTIVE_BACKEND",
    "COMPILED_AVAILABLE",
    "FlowTable",
    "Metrics",
    "Packet",
    "Scenario",
    "SfRuntime",
    "SimConfig",
    "Simulation",
    "SimulationError",
    "TraceEvent",
    "apply_scenario",
    "available_backends",
    "classify",
    "flow_table_match",
    "format_trace",
    "measure_rtt",
    "run_simulation",
    "sf_transit",
]
