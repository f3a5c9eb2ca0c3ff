"""Symmetry-aware service function chaining.

Controller-side path computation with per-SF symmetry requirements, MAC
rewrite steering rules, and a deterministic data-plane simulator for
comparing partial against full symmetry.
"""

__version__ = "0.1.0"

from .model import (
    Direction,
    FiveTuple,
    FlowSpec,
    MacAddress,
    Protocol,
    Repository,
    ServiceChain,
    ServiceFunction,
    Topology,
    Violation,
    lookup_chain,
    repository_dump,
    repository_dumps,
    repository_load,
    repository_loads,
    repository_validate,
)
from .pathengine import (
    FlowRule,
    Hop,
    HopPath,
    PacketInEvent,
    compute_forward_path,
    compute_reverse_path,
    compute_reverse_sf_sequence,
    generate_flow_rules,
    handle_packet_in,
)
from .simulator import (
    Metrics,
    Packet,
    Scenario,
    SimConfig,
    classify,
    flow_table_match,
    measure_rtt,
    run_simulation,
    sf_transit,
)
from .stats import compute_confidence_interval
from .experiment import ExperimentConfig, Report, run_experiment
from .report import emit_report

__all__ = [
    "Direction",
    "ExperimentConfig",
    "FiveTuple",
    "FlowRule",
    "FlowSpec",
    "Hop",
    "HopPath",
    "MacAddress",
    "Metrics",
    "Packet",
    "PacketInEvent",
    "Protocol",
    "Report",
    "Repository",
    "Scenario",
    "ServiceChain",
    "ServiceFunction",
    "SimConfig",
    "Topology",
    "Violation",
    "classify",
    "compute_confidence_interval",
    "compute_forward_path",
    "compute_reverse_path",
    "compute_reverse_sf_sequence",
    "emit_report",
    "flow_table_match",
    "generate_flow_rules",
    "handle_packet_in",
    "lookup_chain",
    "measure_rtt",
    "repository_dump",
    "repository_dumps",
    "repository_load",
    "repository_loads",
    "repository_validate",
    "run_experiment",
    "run_simulation",
    "sf_transit",
]
