"""Data-plane building blocks: packets, classifier, flow tables, SF queues.

Everything here is deliberately object-level and slow-path friendly; the
per-event hot loop lives in the engine cores and mirrors these semantics on
packed integers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..model import (
    Direction,
    FiveTuple,
    MacAddress,
    Repository,
    ServiceFunction,
    match_flow,
)
from ..pathengine import FlowRule


@dataclass(frozen=True)
class Packet:
    """One simulated datagram."""

    eth_src: MacAddress
    eth_dst: MacAddress
    header: FiveTuple
    payload_size: int
    seq: int = 0
    created_at: int = 0

    def __post_init__(self):
        if self.payload_size <= 0:
            raise ValueError("payload_size must be positive")


def classify(pkt: Packet, repo: Repository) -> tuple[int, Direction] | None:
    """Bind a packet to a chain: forward if its header is a registered flow,
    reverse if it is a registered flow's swap, None otherwise."""
    matched = match_flow(repo, pkt.header)
    if matched is None:
        return None
    flow, direction = matched
    return flow.sfc_id, direction


class FlowTable:
    """Priority-ordered rule store of one forwarder.

    Lookup is deterministic: highest priority wins; among equal priorities
    the most specific match (more populated fields) wins; remaining ties go
    to the earliest-installed rule. A miss means packet-in to the controller.
    """

    miss_behavior = "packet-in"

    def __init__(self):
        self._rules: list[tuple[int, FlowRule]] = []
        self._next_seq = 0

    def __len__(self) -> int:
        return len(self._rules)

    @property
    def rules(self) -> list[FlowRule]:
        return [r for _, r in self._rules]

    def install(self, rule: FlowRule) -> bool:
        """Add a rule; re-installing an identical rule is a no-op (the first
        copy keeps its tie-break position). Returns True if newly installed."""
        for _, existing in self._rules:
            if existing == rule:
                return False
        self._rules.append((self._next_seq, rule))
        self._next_seq += 1
        return True

    def match(self, header: FiveTuple, in_port: int, eth_dst: MacAddress) -> FlowRule | None:
        best: tuple[int, int, int] | None = None
        best_rule: FlowRule | None = None
        for seq, rule in self._rules:
            m = rule.match
            if m.in_port is not None and m.in_port != in_port:
                continue
            if m.eth_dst is not None and m.eth_dst != eth_dst:
                continue
            if m.src_ip is not None and m.src_ip != header.src_ip:
                continue
            if m.dst_ip is not None and m.dst_ip != header.dst_ip:
                continue
            if m.src_port is not None and m.src_port != header.src_port:
                continue
            if m.dst_port is not None and m.dst_port != header.dst_port:
                continue
            if m.protocol is not None and m.protocol != int(header.protocol):
                continue
            key = (rule.priority, m.specificity(), -seq)
            if best is None or key > best:
                best = key
                best_rule = rule
        return best_rule


def flow_table_match(table: FlowTable, pkt: Packet, in_port: int) -> FlowRule | None:
    return table.match(pkt.header, in_port, pkt.eth_dst)


class SfRuntime:
    """Queueing state of one SF: a single FIFO server, one packet per
    processing interval."""

    def __init__(self, sf: ServiceFunction, processing_delay_ns: int | None = None):
        self.sf = sf
        self.processing_delay_ns = (
            sf.processing_delay_ns if processing_delay_ns is None else processing_delay_ns
        )
        self.busy_until = 0
        self.packets = 0


def sf_transit(pkt: Packet, sf_rt: SfRuntime, now: int) -> tuple[Packet, int]:
    """Pass a packet through an SF; returns (unchanged packet, ready time).

    The function forwards traffic without touching it; the only effect is
    FIFO service time and the per-SF packet counter.
    """
    start = max(now, sf_rt.busy_until)
    ready_at = start + sf_rt.processing_delay_ns
    sf_rt.busy_until = ready_at
    sf_rt.packets += 1
    return pkt, ready_at


@dataclass(frozen=True)
class SimConfig:
    """Knobs of one simulation run.

    Time is integer nanoseconds throughout. ``per_sf_processing_delay_ns``
    of None keeps each SF's own configured delay; a value overrides all of
    them. ``rng_seed`` only matters when ``jitter_ns`` > 0 (uniform extra
    per-link-traversal delay); the default is fully deterministic.
    """

    total_bytes: int = 10 * 1024 * 1024
    payload_size: int = 1024
    offered_rate_bps: int = 10**9
    direction: Direction = Direction.REVERSE
    per_sf_processing_delay_ns: int | None = None
    probe_size: int = 64
    packet_in_latency_ns: int = 0
    jitter_ns: int = 0
    rng_seed: int = 0
    repetitions: int = 1
    trace: bool = False

    def __post_init__(self):
        if self.payload_size <= 0:
            raise ValueError("payload_size must be positive")
        if self.total_bytes <= 0:
            raise ValueError("total_bytes must be positive")
        if self.offered_rate_bps <= 0:
            raise ValueError("offered_rate_bps must be positive")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")

    @property
    def n_packets(self) -> int:
        return max(1, self.total_bytes // self.payload_size)

    @property
    def send_gap_ns(self) -> int:
        return (self.payload_size * 8 * 1_000_000_000) // self.offered_rate_bps


@dataclass(frozen=True)
class Metrics:
    """Per-run results: probe round trips, per-second delivery series and
    per-SF packet counts."""

    rtt_samples_ns: tuple[int, ...] = ()
    transfer_bytes_per_s: tuple[int, ...] = ()
    throughput_bps_per_s: tuple[int, ...] = ()
    completion_ns: int = 0
    sf_packet_counts: dict[str, int] = field(default_factory=dict)
    injected_packets: int = 0
    delivered_packets: int = 0
    dropped_packets: int = 0
    mac_mismatches: int = 0

    def to_json(self) -> str:
        doc = {
            "rtt_samples_ns": list(self.rtt_samples_ns),
            "transfer_bytes_per_s": list(self.transfer_bytes_per_s),
            "throughput_bps_per_s": list(self.throughput_bps_per_s),
            "completion_ns": self.completion_ns,
            "sf_packet_counts": {k: self.sf_packet_counts[k] for k in sorted(self.sf_packet_counts)},
            "injected_packets": self.injected_packets,
            "delivered_packets": self.delivered_packets,
            "dropped_packets": self.dropped_packets,
            "mac_mismatches": self.mac_mismatches,
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))
