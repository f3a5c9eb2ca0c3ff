"""Forward and reverse service-path computation and flow-rule compilation.

Traffic steering is MAC based: each rule rewrites the packet's destination
MAC to the next service function it must visit (or back to the real
destination once no function remains) and outputs it on one port. Reverse
paths keep only the functions that require symmetry, visited in reverse
order, entering each one through its forward-direction output interface.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping, NamedTuple

from .model import (
    Direction,
    FiveTuple,
    FlowSpec,
    MacAddress,
    Repository,
    ServiceChain,
    ServiceFunction,
    Topology,
    lookup_chain,
    match_flow,
)

log = logging.getLogger(__name__)

# All steering rules share one priority; they are made disjoint by matching
# ingress port, carried MAC and the flow tuple. Priority 0 stays reserved for
# the table-miss entry.
DEFAULT_RULE_PRIORITY = 10


class PathError(Exception):
    """Base class for path computation failures."""


class UnknownSfError(PathError):
    def __init__(self, sf_id: str):
        self.sf_id = sf_id
        super().__init__(f"unknown service function {sf_id!r}")


class UnavailableSfError(PathError):
    def __init__(self, sf_id: str):
        self.sf_id = sf_id
        super().__init__(f"service function {sf_id!r} requires symmetry but is unavailable")


class NoRouteError(PathError):
    def __init__(self, a: str, b: str):
        super().__init__(f"no route between forwarders {a!r} and {b!r}")


class NoEndpointError(PathError):
    def __init__(self, ip: str):
        self.ip = ip
        super().__init__(f"no endpoint with address {ip!r}")


@dataclass(frozen=True)
class Hop:
    """One steering rule's worth of path: where the packet enters a
    forwarder, which MAC it must carry when it leaves, and through which
    port it leaves."""

    sff_id: str
    ingress_port: int
    next_mac: MacAddress
    egress_port: int


@dataclass(frozen=True)
class HopPath:
    direction: Direction
    sfc_id: int
    hops: tuple[Hop, ...]
    terminal_restore_mac: MacAddress

    def dump(self) -> str:
        """Canonical one-hop-per-line text form."""
        lines = [f"{self.direction.value} sfc={self.sfc_id} terminal={self.terminal_restore_mac}"]
        for h in self.hops:
            lines.append(f"{h.sff_id} in={h.ingress_port} next={h.next_mac} out={h.egress_port}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SetEthDst:
    mac: MacAddress


@dataclass(frozen=True)
class Output:
    port: int


Action = SetEthDst | Output


@dataclass(frozen=True)
class RuleMatch:
    """Match fields; None means wildcard."""

    in_port: int | None = None
    eth_dst: MacAddress | None = None
    src_ip: str | None = None
    dst_ip: str | None = None
    src_port: int | None = None
    dst_port: int | None = None
    protocol: int | None = None

    def specificity(self) -> int:
        return sum(
            1
            for v in (
                self.in_port,
                self.eth_dst,
                self.src_ip,
                self.dst_ip,
                self.src_port,
                self.dst_port,
                self.protocol,
            )
            if v is not None
        )


@dataclass(frozen=True)
class FlowRule:
    sff_id: str
    priority: int
    match: RuleMatch
    actions: tuple[Action, ...]

    def __post_init__(self):
        if self.priority <= 0:
            raise ValueError("installed rules need priority > 0 (0 is the table-miss entry)")
        outputs = [a for a in self.actions if isinstance(a, Output)]
        if len(outputs) != 1 or not isinstance(self.actions[-1], Output):
            raise ValueError("rule actions must contain exactly one Output, last")

    @property
    def output_port(self) -> int:
        assert isinstance(self.actions[-1], Output)
        return self.actions[-1].port

    def dump(self) -> str:
        m = self.match
        proto = {1: "icmp", 6: "tcp", 17: "udp"}.get(m.protocol, str(m.protocol))
        acts = ",".join(
            f"set_eth_dst:{a.mac}" if isinstance(a, SetEthDst) else f"output:{a.port}"
            for a in self.actions
        )
        return (
            f"{self.sff_id} prio={self.priority} in_port={m.in_port} eth_dst={m.eth_dst} "
            f"{proto} {m.src_ip}:{m.src_port}->{m.dst_ip}:{m.dst_port} actions={acts}"
        )


class PacketInEvent(NamedTuple):
    """What a forwarder reports to the controller on a table miss."""

    sff_id: str
    in_port: int
    header: FiveTuple
    eth_dst: MacAddress


def compute_reverse_sf_sequence(
    chain: ServiceChain, catalog: Mapping[str, ServiceFunction]
) -> list[str]:
    """SF ids the reply traffic must visit, in visiting order.

    Walks the chain from its last function back to its first, keeping exactly
    the ones flagged as requiring symmetry. A retained function that is not
    available is a hard error: silently skipping a stateful function would
    break the connection it guards.
    """
    retained: list[str] = []
    for sf_id in chain.sf_sequence[::-1]:
        sf = catalog.get(sf_id)
        if sf is None:
            raise UnknownSfError(sf_id)
        if not sf.requires_symmetry:
            continue
        if not sf.available:
            raise UnavailableSfError(sf_id)
        retained.append(sf_id)
    return retained


def _shortest_sff_route(topo: Topology, src: str, dst: str) -> list[str]:
    """Shortest-hop SFF route; among equals, the lexicographically smallest
    id sequence. Breadth-first distances from the destination, then a greedy
    forward walk picking the smallest viable neighbour."""
    if src == dst:
        return [src]
    adj = topo.adjacency
    if src not in adj or dst not in adj:
        raise NoRouteError(src, dst)
    dist = {dst: 0}
    frontier = [dst]
    while frontier:
        nxt = []
        for node in frontier:
            for nbr in adj[node]:
                if nbr not in dist:
                    dist[nbr] = dist[node] + 1
                    nxt.append(nbr)
        frontier = nxt
    if src not in dist:
        raise NoRouteError(src, dst)
    route = [src]
    cur = src
    while cur != dst:
        cur = min(n for n in adj[cur] if dist.get(n, -1) == dist[cur] - 1)
        route.append(cur)
    return route


def _link_ports(topo: Topology, a: str, b: str) -> tuple[int, int]:
    """Egress port on `a` and ingress port on `b` for the chosen a-b wire.
    Parallel wires are disambiguated by the smallest port pair."""
    best: tuple[int, int] | None = None
    for l in topo.links:
        if l.a_sff == a and l.b_sff == b:
            cand = (l.a_port, l.b_port)
        elif l.b_sff == a and l.a_sff == b:
            cand = (l.b_port, l.a_port)
        else:
            continue
        if best is None or cand < best:
            best = cand
    if best is None:
        raise NoRouteError(a, b)
    return best


def _resolve_endpoints(topo: Topology, flow: FlowSpec):
    src = topo.endpoint_by_ip.get(flow.src_ip)
    if src is None:
        raise NoEndpointError(flow.src_ip)
    dst = topo.endpoint_by_ip.get(flow.dst_ip)
    if dst is None:
        raise NoEndpointError(flow.dst_ip)
    return src, dst


def _build_path(
    direction: Direction,
    sfc_id: int,
    topo: Topology,
    start_sff: str,
    start_port: int,
    visits: list[tuple[ServiceFunction, int, int]],
    terminal_sff: str,
    terminal_port: int,
    terminal_mac: MacAddress,
) -> HopPath:
    """Assemble hops for one direction.

    ``visits`` lists (sf, entry_port, exit_port) per function in visiting
    order; entry/exit are the forwarder ports wired to the interface the
    packet goes in and comes back on for this direction.
    """
    hops: list[Hop] = []
    cur_sff, cur_in = start_sff, start_port
    for sf, entry_port, exit_port in visits:
        target = sf.mac
        route = _shortest_sff_route(topo, cur_sff, sf.sff_id)
        for a, b in zip(route, route[1:]):
            out_port, peer_in = _link_ports(topo, a, b)
            hops.append(Hop(a, cur_in, target, out_port))
            cur_in = peer_in
        hops.append(Hop(sf.sff_id, cur_in, target, entry_port))
        cur_sff, cur_in = sf.sff_id, exit_port
    route = _shortest_sff_route(topo, cur_sff, terminal_sff)
    for a, b in zip(route, route[1:]):
        out_port, peer_in = _link_ports(topo, a, b)
        hops.append(Hop(a, cur_in, terminal_mac, out_port))
        cur_in = peer_in
    hops.append(Hop(terminal_sff, cur_in, terminal_mac, terminal_port))
    return HopPath(direction, sfc_id, tuple(hops), terminal_mac)


def compute_forward_path(
    chain: ServiceChain,
    flow: FlowSpec,
    topo: Topology,
    catalog: Mapping[str, ServiceFunction],
) -> HopPath:
    """Path visiting every chain SF in order, each entered on its in_port and
    left on its out_port; ends by restoring the destination's own MAC."""
    src, dst = _resolve_endpoints(topo, flow)
    visits = []
    for sf_id in chain.sf_sequence:
        sf = catalog.get(sf_id)
        if sf is None:
            raise UnknownSfError(sf_id)
        visits.append((sf, sf.in_port, sf.out_port))
    return _build_path(
        Direction.FORWARD, chain.sfc_id, topo, src.sff_id, src.port, visits, dst.sff_id, dst.port, dst.mac
    )


def compute_reverse_path(
    chain: ServiceChain,
    flow: FlowSpec,
    topo: Topology,
    catalog: Mapping[str, ServiceFunction],
) -> HopPath:
    """Reply path over the symmetry-requiring subset of the chain.

    Each retained SF is entered through its out_port and exits through its
    in_port; the path ends at the flow's source endpoint with its MAC
    restored.
    """
    src, dst = _resolve_endpoints(topo, flow)
    visits = []
    for sf_id in compute_reverse_sf_sequence(chain, catalog):
        sf = catalog[sf_id]
        visits.append((sf, sf.out_port, sf.in_port))
    return _build_path(
        Direction.REVERSE, chain.sfc_id, topo, dst.sff_id, dst.port, visits, src.sff_id, src.port, src.mac
    )


def generate_flow_rules(path: HopPath, flow: FlowSpec) -> list[FlowRule]:
    """One rule per hop.

    A packet arrives carrying the MAC set by the previous hop (initially the
    real destination's, as sent by the source host), so matching on
    (ingress port, carried MAC, five-tuple) keeps the rules disjoint even
    when the path crosses one forwarder several times. Every rule rewrites
    to the hop's target MAC and outputs; the final rule's rewrite is the
    terminal restore.
    """
    header = flow.five_tuple if path.direction is Direction.FORWARD else flow.five_tuple.swapped()
    rules: list[FlowRule] = []
    carried = path.terminal_restore_mac
    for hop in path.hops:
        match = RuleMatch(
            in_port=hop.ingress_port,
            eth_dst=carried,
            src_ip=header.src_ip,
            dst_ip=header.dst_ip,
            src_port=header.src_port,
            dst_port=header.dst_port,
            protocol=int(header.protocol),
        )
        rules.append(
            FlowRule(
                sff_id=hop.sff_id,
                priority=DEFAULT_RULE_PRIORITY,
                match=match,
                actions=(SetEthDst(hop.next_mac), Output(hop.egress_port)),
            )
        )
        carried = hop.next_mac
    return rules


def handle_packet_in(repo: Repository, pkt_meta: PacketInEvent) -> list[tuple[str, FlowRule]]:
    """Controller reaction to a table miss: the full rule set for both
    directions of the flow the packet belongs to.

    Installing forward and reverse rules together on the first miss means a
    stateful SF sees the reply without a second controller round trip. The
    result is a pure function of (repo, header): replays and misses from
    either direction produce the identical list. Unknown traffic yields an
    empty list, which the forwarder treats as drop.
    """
    matched = match_flow(repo, pkt_meta.header)
    if matched is None:
        log.info(
            "packet-in from %s port %s: unknown flow %s, default deny",
            pkt_meta.sff_id,
            pkt_meta.in_port,
            pkt_meta.header,
        )
        return []
    flow, _direction = matched
    chain = lookup_chain(repo, flow.sfc_id)
    forward = compute_forward_path(chain, flow, repo.topology, repo.sfs)
    reverse = compute_reverse_path(chain, flow, repo.topology, repo.sfs)
    rules = generate_flow_rules(forward, flow) + generate_flow_rules(reverse, flow)
    return [(rule.sff_id, rule) for rule in rules]
