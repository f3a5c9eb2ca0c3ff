"""Simulation driver: compiles a repository into the packed form the engine
cores consume, bridges table misses to the controller, and assembles metrics.

The compiled core (`sfcsym.simulator._core`, built from Cython) is preferred;
the pure-Python twin is selected when the extension is unavailable or when
SFC_SYM_PURE_PY=1 is set. Both produce bit-identical results.
"""

from __future__ import annotations

import logging
import os
from dataclasses import replace
from enum import Enum
from typing import Callable, NamedTuple

from ..model import Direction, FiveTuple, FlowSpec, MacAddress, Protocol, Repository
from ..pathengine import FlowRule, PacketInEvent, handle_packet_in
from . import _core_py
from .dataplane import Metrics, SimConfig

log = logging.getLogger(__name__)

try:
    from . import _core as _compiled
except ImportError:  # extension not built
    _compiled = None

if _compiled is not None and os.environ.get("SFC_SYM_PURE_PY") != "1":
    _default_core = _compiled
else:
    _default_core = _core_py

ACTIVE_BACKEND: str = _default_core.BACKEND_NAME
COMPILED_AVAILABLE: bool = _compiled is not None
log.debug("engine core backend: %s", ACTIVE_BACKEND)


def available_backends() -> dict[str, object]:
    out = {"python": _core_py}
    if _compiled is not None:
        out["cython"] = _compiled
    return out


class Scenario(Enum):
    """Symmetry policy of a run: `partial` honours each SF's own flag,
    `full` forces every SF onto the reverse path."""

    PARTIAL = "partial"
    FULL = "full"


def apply_scenario(repo: Repository, scenario: Scenario) -> Repository:
    if scenario is Scenario.PARTIAL:
        return repo
    sfs = {sid: replace(sf, requires_symmetry=True) for sid, sf in repo.sfs.items()}
    return replace(repo, sfs=sfs)


class SimulationError(Exception):
    pass


class TraceEvent(NamedTuple):
    time_ns: int
    event_kind: str
    node_id: str
    packet_seq: int


_TRACE_KIND_NAMES = {
    _core_py.T_INJECT: "inject",
    _core_py.T_SFF_RX: "sff_rx",
    _core_py.T_PACKET_IN: "packet_in",
    _core_py.T_INSTALL: "install",
    _core_py.T_SF_RX: "sf_rx",
    _core_py.T_SF_TX: "sf_tx",
    _core_py.T_DELIVER: "deliver",
    _core_py.T_DROP: "drop",
}


def format_trace(events: list[TraceEvent]) -> str:
    return "".join(f"{e.time_ns},{e.event_kind},{e.node_id},{e.packet_seq}\n" for e in events)


class Simulation:
    """One simulation instance owning all of its state.

    Distinct instances are independent; repetitions can run them in parallel
    and merge results afterwards.
    """

    def __init__(
        self,
        repo: Repository,
        cfg: SimConfig,
        scenario: Scenario,
        backend: object | None = None,
    ):
        self.cfg = cfg
        self.scenario = scenario
        self.repo = apply_scenario(repo, scenario)
        self._core_mod = backend if backend is not None else _default_core
        self._build_world()

    def _build_world(self):
        repo, cfg = self.repo, self.cfg
        topo = repo.topology
        self.sff_ids = sorted(s.id for s in topo.sffs)
        self.sff_idx = {sid: i for i, sid in enumerate(self.sff_ids)}
        self.sf_ids = sorted(repo.sfs)
        self.sf_idx = {sid: i for i, sid in enumerate(self.sf_ids)}
        self.ep_ids = sorted(e.id for e in topo.endpoints)
        self.ep_idx = {eid: i for i, eid in enumerate(self.ep_ids)}
        eps = [topo.endpoint_map[eid] for eid in self.ep_ids]

        max_port = 0
        for sff in topo.sffs:
            if sff.ports:
                max_port = max(max_port, max(sff.ports))
        span = max_port + 1
        self.port_span = span
        n_sff = len(self.sff_ids)

        w_kind = [_core_py.W_NONE] * (n_sff * span)
        w_node = [-1] * (n_sff * span)
        w_port = [-1] * (n_sff * span)
        w_chan = [-1] * (n_sff * span)

        link_delay, link_cap = [], []
        for li, link in enumerate(topo.links):
            link_delay.append(link.delay_ns)
            link_cap.append(link.capacity_bps or 0)
            a, b = self.sff_idx[link.a_sff], self.sff_idx[link.b_sff]
            wa, wb = a * span + link.a_port, b * span + link.b_port
            w_kind[wa], w_node[wa], w_port[wa], w_chan[wa] = _core_py.W_LINK, b, link.b_port, 2 * li
            w_kind[wb], w_node[wb], w_port[wb], w_chan[wb] = _core_py.W_LINK, a, link.a_port, 2 * li + 1

        sf_delay, sf_sff, sf_in, sf_out = [], [], [], []
        for si, sid in enumerate(self.sf_ids):
            sf = repo.sfs[sid]
            delay = (
                sf.processing_delay_ns
                if cfg.per_sf_processing_delay_ns is None
                else cfg.per_sf_processing_delay_ns
            )
            sf_delay.append(delay)
            sf_sff.append(self.sff_idx[sf.sff_id])
            sf_in.append(sf.in_port)
            sf_out.append(sf.out_port)
            for port in (sf.in_port, sf.out_port):
                w = self.sff_idx[sf.sff_id] * span + port
                w_kind[w], w_node[w] = _core_py.W_SF, si

        ep_mac, ep_sff, ep_port = [], [], []
        for ei, ep in enumerate(eps):
            ep_mac.append(ep.mac.as_int)
            ep_sff.append(self.sff_idx[ep.sff_id])
            ep_port.append(ep.port)
            w = self.sff_idx[ep.sff_id] * span + ep.port
            w_kind[w], w_node[w] = _core_py.W_EP, ei

        self._ip_ids: dict[str, int] = {}
        for ep in eps:
            if ep.ip is not None:
                self._intern_ip(ep.ip)
        for flow in repo.flows:
            self._intern_ip(flow.src_ip)
            self._intern_ip(flow.dst_ip)

        self.core = self._core_mod.EngineCore(
            n_sff,
            span,
            w_kind,
            w_node,
            w_port,
            w_chan,
            link_delay,
            link_cap,
            sf_delay,
            sf_sff,
            sf_in,
            sf_out,
            ep_mac,
            ep_sff,
            ep_port,
            cfg.jitter_ns,
            cfg.rng_seed,
            cfg.trace,
        )
        self._headers: dict[FiveTuple, int] = {}
        self._headers_rev: list[FiveTuple] = []

    def _intern_ip(self, ip: str) -> int:
        return self._ip_ids.setdefault(ip, len(self._ip_ids))

    def _header_id(self, header: FiveTuple) -> int:
        hid = self._headers.get(header)
        if hid is None:
            hid = self.core.add_header(
                self._intern_ip(header.src_ip),
                self._intern_ip(header.dst_ip),
                header.src_port,
                header.dst_port,
                int(header.protocol),
            )
            self._headers[header] = hid
            self._headers_rev.append(header)
        return hid

    def _pack_rule(self, rule: FlowRule) -> tuple[int, ...]:
        m = rule.match
        set_eth = -1
        for action in rule.actions[:-1]:
            set_eth = action.mac.as_int
        return (
            -1 if m.in_port is None else m.in_port,
            -1 if m.eth_dst is None else m.eth_dst.as_int,
            -1 if m.src_ip is None else self._intern_ip(m.src_ip),
            -1 if m.dst_ip is None else self._intern_ip(m.dst_ip),
            -1 if m.src_port is None else m.src_port,
            -1 if m.dst_port is None else m.dst_port,
            -1 if m.protocol is None else m.protocol,
            rule.priority,
            set_eth,
            rule.output_port,
        )

    def _handle_miss(self, t: int, sff: int, port: int, pkt: int):
        hdr_id, eth, _size, _kind = self.core.packet_info(pkt)
        header = self._headers_rev[hdr_id]
        meta = PacketInEvent(self.sff_ids[sff], port, header, MacAddress.from_int(eth))
        pairs = handle_packet_in(self.repo, meta)
        if not pairs:
            raise SimulationError(f"undeliverable flow: no rules for header {header}")
        rows = [(self.sff_idx[sff_id], self._pack_rule(rule)) for sff_id, rule in pairs]
        self.core.install_rules(t + self.cfg.packet_in_latency_ns, rows)

    def _drive(self, on_probe: Callable[[int, int, int], None] | None = None):
        while True:
            res = self.core.run()
            if res is None:
                return
            if res[0] == "miss":
                self._handle_miss(res[1], res[2], res[3], res[4])
            elif res[0] == "probe":
                assert on_probe is not None, "probe delivery outside a probe run"
                on_probe(res[1], res[2], res[3])

    def _pick_flow(self, want_probe: bool) -> FlowSpec:
        for flow in self.repo.flows:
            is_icmp = flow.protocol is Protocol.ICMP
            if is_icmp == want_probe:
                return flow
        kind = "probe (icmp)" if want_probe else "data"
        raise SimulationError(f"no {kind} flow registered in the repository")

    def _flow_endpoints(self, flow: FlowSpec, direction: Direction):
        by_ip = self.repo.topology.endpoint_by_ip
        src = by_ip.get(flow.src_ip)
        dst = by_ip.get(flow.dst_ip)
        if src is None or dst is None:
            missing = flow.src_ip if src is None else flow.dst_ip
            raise SimulationError(f"flow endpoint {missing!r} not in topology")
        if direction is Direction.FORWARD:
            return src, dst
        return dst, src

    def run_transfer(self) -> Metrics:
        """Deliver the configured byte volume as paced datagrams and collect
        the run's metrics. Deterministic for a given configuration and seed."""
        cfg = self.cfg
        flow = self._pick_flow(want_probe=False)
        src_ep, dst_ep = self._flow_endpoints(flow, cfg.direction)
        header = (
            flow.five_tuple if cfg.direction is Direction.FORWARD else flow.five_tuple.swapped()
        )
        hdr_id = self._header_id(header)
        self.core.add_bulk(
            0,
            cfg.send_gap_ns,
            cfg.n_packets,
            self.ep_idx[src_ep.id],
            hdr_id,
            cfg.payload_size,
            dst_ep.mac.as_int,
        )
        self._drive()
        core = self.core
        if core.parked_count() != 0 or core.injected != core.delivered + core.dropped:
            raise SimulationError(
                f"packet conservation broken: injected={core.injected} "
                f"delivered={core.delivered} dropped={core.dropped} parked={core.parked_count()}"
            )
        return self._metrics(rtt_samples=())

    def run_probes(self, n_probes: int) -> list[int]:
        """Stop-and-wait request/response probes; one RTT sample each."""
        if n_probes < 1:
            raise ValueError("n_probes must be >= 1")
        cfg = self.cfg
        flow = self._pick_flow(want_probe=True)
        client, server = self._flow_endpoints(flow, Direction.FORWARD)
        fwd = self._header_id(flow.five_tuple)
        rev = self._header_id(flow.five_tuple.swapped())
        client_idx, server_idx = self.ep_idx[client.id], self.ep_idx[server.id]

        samples: list[int] = []
        state = {"sent_at": 0, "k": 0}

        def send_request(at: int):
            state["sent_at"] = at
            self.core.inject_one(
                at, client_idx, fwd, cfg.probe_size, server.mac.as_int, _core_py.PK_PROBE
            )

        def on_probe(t: int, ep: int, _pkt: int):
            if ep == server_idx:
                self.core.inject_one(
                    t, server_idx, rev, cfg.probe_size, client.mac.as_int, _core_py.PK_PROBE
                )
            elif ep == client_idx:
                samples.append(t - state["sent_at"])
                state["k"] += 1
                if state["k"] < n_probes:
                    send_request(t)

        send_request(0)
        self._drive(on_probe=on_probe)
        if len(samples) != n_probes:
            raise SimulationError(f"probe run incomplete: {len(samples)}/{n_probes} replies")
        return samples

    def _metrics(self, rtt_samples: tuple[int, ...]) -> Metrics:
        core = self.core
        if core.bins:
            horizon = max(core.bins) + 1
            transfer = tuple(core.bins.get(i, 0) for i in range(horizon))
        else:
            transfer = ()
        return Metrics(
            rtt_samples_ns=rtt_samples,
            transfer_bytes_per_s=transfer,
            throughput_bps_per_s=tuple(8 * b for b in transfer),
            completion_ns=core.completion_ns,
            sf_packet_counts={sid: core.sf_count[i] for i, sid in enumerate(self.sf_ids)},
            injected_packets=core.injected,
            delivered_packets=core.delivered,
            dropped_packets=core.dropped,
            mac_mismatches=core.mac_mismatches,
        )

    def trace_events(self) -> list[TraceEvent]:
        names = (self.sff_ids, self.sf_ids, self.ep_ids)
        out = []
        for t, tkind, nkind, nidx, pkt in self.core.trace:
            out.append(TraceEvent(t, _TRACE_KIND_NAMES[tkind], names[nkind][nidx], pkt))
        return out

    def sf_visit_order(self, packet_seq: int) -> list[str]:
        """SF ids a packet entered, in order (requires tracing)."""
        return [
            e.node_id
            for e in self.trace_events()
            if e.event_kind == "sf_rx" and e.packet_seq == packet_seq
        ]


def run_simulation(repo: Repository, cfg: SimConfig, scenario: Scenario) -> Metrics:
    """Event-driven delivery of ``cfg.total_bytes`` as datagrams; identical
    inputs produce bit-identical metrics."""
    return Simulation(repo, cfg, scenario).run_transfer()


def measure_rtt(repo: Repository, cfg: SimConfig, scenario: Scenario, n_probes: int) -> list[int]:
    """Round-trip samples of `n_probes` request/response probes through the
    chain (forward out, reverse back)."""
    return Simulation(repo, cfg, scenario).run_probes(n_probes)
