"""Domain model for symmetry-aware service chains.

Holds the administrator-populated repository: service functions, forwarders,
topology, chains and classified flows. A repository is immutable once loaded;
administrative changes build a new value.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from enum import Enum, IntEnum
from functools import cached_property
from typing import IO, Iterable, Mapping, NamedTuple

MAX_SFC_ID = 255

_MAC_RE = re.compile(r"^[0-9a-fA-F]{2}([:-][0-9a-fA-F]{2}){5}$")


class RepositoryError(Exception):
    """Base class for repository problems."""


class RepositoryParseError(RepositoryError):
    """Malformed repository document."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class RepositoryIntegrityError(RepositoryError):
    """A loaded repository violates one or more invariants."""

    def __init__(self, violations: list["Violation"]):
        self.violations = violations
        detail = "; ".join(str(v) for v in violations)
        super().__init__(f"repository integrity violated: {detail}")


class UnknownSfcIdError(RepositoryError):
    def __init__(self, sfc_id: int):
        self.sfc_id = sfc_id
        super().__init__(f"unknown SFC id {sfc_id}")


class MacAddress(str):
    """A MAC address in canonical lowercase colon-separated form."""

    __slots__ = ()

    def __new__(cls, value: str) -> "MacAddress":
        if isinstance(value, MacAddress):
            return value
        text = str(value).strip()
        if not _MAC_RE.match(text):
            raise ValueError(f"invalid MAC address: {value!r}")
        return super().__new__(cls, text.replace("-", ":").lower())

    @property
    def as_int(self) -> int:
        return int(self.replace(":", ""), 16)

    @classmethod
    def from_int(cls, value: int) -> "MacAddress":
        if not 0 <= value < 1 << 48:
            raise ValueError(f"MAC integer out of range: {value}")
        raw = f"{value:012x}"
        return cls(":".join(raw[i : i + 2] for i in range(0, 12, 2)))


class Protocol(IntEnum):
    """Transport protocols the classifier understands."""

    ICMP = 1
    TCP = 6
    UDP = 17

    @classmethod
    def from_name(cls, name: str) -> "Protocol":
        try:
            return cls[name.upper()]
        except KeyError:
            raise ValueError(f"unknown protocol {name!r}") from None

    @property
    def label(self) -> str:
        return self.name.lower()


class Direction(Enum):
    FORWARD = "forward"
    REVERSE = "reverse"


class FiveTuple(NamedTuple):
    """Classification key carried by every packet."""

    src_ip: str
    dst_ip: str
    src_port: int
    dst_port: int
    protocol: Protocol

    def swapped(self) -> "FiveTuple":
        return FiveTuple(self.dst_ip, self.src_ip, self.dst_port, self.src_port, self.protocol)


@dataclass(frozen=True)
class ServiceFunction:
    """An SF/VNF instance attached to a forwarder via distinct in/out ports.

    ``in_port``/``out_port`` name the forwarder ports wired to the function's
    two interfaces: forward traffic is handed to ``in_port`` and comes back on
    ``out_port``; reverse traffic does the opposite.
    """

    id: str
    mac: MacAddress
    sff_id: str
    in_port: int
    out_port: int
    requires_symmetry: bool = True
    processing_delay_ns: int = 0
    role: str | None = None
    available: bool = True


@dataclass(frozen=True)
class ServiceFunctionForwarder:
    """A switch-like element forwarding traffic to and from attached SFs."""

    id: str
    ports: frozenset[int]


@dataclass(frozen=True)
class Endpoint:
    """A traffic source/sink attached to one forwarder port."""

    id: str
    mac: MacAddress
    sff_id: str
    port: int
    ip: str | None = None


@dataclass(frozen=True)
class Link:
    """Bidirectional wire between two forwarder ports."""

    a_sff: str
    a_port: int
    b_sff: str
    b_port: int
    delay_ns: int = 0
    capacity_bps: int | None = None  # None: no serialization limit


@dataclass(frozen=True)
class Topology:
    sffs: tuple[ServiceFunctionForwarder, ...] = ()
    endpoints: tuple[Endpoint, ...] = ()
    links: tuple[Link, ...] = ()

    @cached_property
    def sff_map(self) -> Mapping[str, ServiceFunctionForwarder]:
        return {s.id: s for s in self.sffs}

    @cached_property
    def endpoint_map(self) -> Mapping[str, Endpoint]:
        return {e.id: e for e in self.endpoints}

    @cached_property
    def endpoint_by_ip(self) -> Mapping[str, Endpoint]:
        return {e.ip: e for e in self.endpoints if e.ip is not None}

    @cached_property
    def adjacency(self) -> Mapping[str, tuple[str, ...]]:
        """SFF graph neighbours, sorted for deterministic walks."""
        nbrs: dict[str, set[str]] = {s.id: set() for s in self.sffs}
        for l in self.links:
            if l.a_sff in nbrs and l.b_sff in nbrs:
                nbrs[l.a_sff].add(l.b_sff)
                nbrs[l.b_sff].add(l.a_sff)
        return {k: tuple(sorted(v)) for k, v in nbrs.items()}


@dataclass(frozen=True)
class ServiceChain:
    """Ordered SF sequence; the same id binds forward and reverse traffic."""

    sfc_id: int
    sf_sequence: tuple[str, ...]


@dataclass(frozen=True)
class FlowSpec:
    """A classified five-tuple bound to one chain."""

    src_ip: str
    dst_ip: str
    src_port: int
    dst_port: int
    protocol: Protocol
    sfc_id: int

    @property
    def five_tuple(self) -> FiveTuple:
        return FiveTuple(self.src_ip, self.dst_ip, self.src_port, self.dst_port, self.protocol)

    def reverse(self) -> "FlowSpec":
        """The same flow seen from the opposite direction: src/dst swapped,
        same chain binding."""
        return FlowSpec(
            src_ip=self.dst_ip,
            dst_ip=self.src_ip,
            src_port=self.dst_port,
            dst_port=self.src_port,
            protocol=self.protocol,
            sfc_id=self.sfc_id,
        )


@dataclass(frozen=True)
class Violation:
    """One broken repository rule; violations are data, not exceptions."""

    rule: str
    subject: str
    detail: str = ""

    def __str__(self) -> str:
        out = f"{self.rule}: {self.subject}"
        return f"{out} ({self.detail})" if self.detail else out


@dataclass(frozen=True)
class Repository:
    """Immutable view of everything the controller may consult."""

    topology: Topology = Topology()
    sfs: Mapping[str, ServiceFunction] = field(default_factory=dict)
    chains: Mapping[int, ServiceChain] = field(default_factory=dict)
    flows: tuple[FlowSpec, ...] = ()

    def with_chain(self, chain: ServiceChain) -> "Repository":
        chains = dict(self.chains)
        chains[chain.sfc_id] = chain
        return replace(self, chains=chains)

    def without_chain(self, sfc_id: int) -> "Repository":
        chains = {k: v for k, v in self.chains.items() if k != sfc_id}
        return replace(self, chains=chains)

    def with_flows(self, flows: Iterable[FlowSpec]) -> "Repository":
        return replace(self, flows=self.flows + tuple(flows))


def lookup_chain(repo: Repository, sfc_id: int) -> ServiceChain:
    """Resolve a chain by id; unknown ids are a hard error."""
    try:
        return repo.chains[sfc_id]
    except KeyError:
        raise UnknownSfcIdError(sfc_id) from None


def match_flow(repo: Repository, header: FiveTuple) -> tuple[FlowSpec, Direction] | None:
    """Find the registered flow a five-tuple belongs to, if any.

    Forward if the header equals a registered tuple, reverse if it equals its
    swap. First registered flow wins.
    """
    for flow in repo.flows:
        if header == flow.five_tuple:
            return flow, Direction.FORWARD
        if header == flow.five_tuple.swapped():
            return flow, Direction.REVERSE
    return None


# ---------------------------------------------------------------------------
# Loading / validation / serialization


def _us_to_ns(value) -> int:
    return round(float(value) * 1000.0)


def _ns_to_us(value_ns: int):
    us = value_ns / 1000.0
    return int(us) if us.is_integer() else us


def _require(entry: dict, key: str, where: str):
    if key not in entry:
        raise RepositoryParseError(f"{where}: missing key {key!r}")
    return entry[key]


def _repository_from_dict(doc: dict) -> Repository:
    """Build a Repository from a parsed document tree. Duplicate ids are
    rejected here, before they could vanish into the id maps."""
    if not isinstance(doc, dict):
        raise RepositoryParseError("repository document must be an object")

    topo_doc = doc.get("topology", {})
    sffs = []
    for i, entry in enumerate(topo_doc.get("sffs", [])):
        where = f"topology.sffs[{i}]"
        ports = _require(entry, "ports", where)
        sffs.append(
            ServiceFunctionForwarder(
                id=str(_require(entry, "id", where)),
                ports=frozenset(int(p) for p in ports),
            )
        )
    endpoints = []
    for i, entry in enumerate(topo_doc.get("endpoints", [])):
        where = f"topology.endpoints[{i}]"
        endpoints.append(
            Endpoint(
                id=str(_require(entry, "id", where)),
                mac=MacAddress(_require(entry, "mac", where)),
                sff_id=str(_require(entry, "sff", where)),
                port=int(_require(entry, "port", where)),
                ip=str(entry["ip"]) if entry.get("ip") is not None else None,
            )
        )
    links = []
    for i, entry in enumerate(topo_doc.get("links", [])):
        where = f"topology.links[{i}]"
        a = _require(entry, "a", where)
        b = _require(entry, "b", where)
        cap = entry.get("capacity_bps")
        links.append(
            Link(
                a_sff=str(_require(a, "sff", where + ".a")),
                a_port=int(_require(a, "port", where + ".a")),
                b_sff=str(_require(b, "sff", where + ".b")),
                b_port=int(_require(b, "port", where + ".b")),
                delay_ns=_us_to_ns(entry.get("delay_us", 0)),
                capacity_bps=int(cap) if cap else None,
            )
        )

    sfs: dict[str, ServiceFunction] = {}
    for i, entry in enumerate(doc.get("sfs", [])):
        where = f"sfs[{i}]"
        sf_id = str(_require(entry, "id", where))
        if sf_id in sfs:
            raise RepositoryIntegrityError([Violation("duplicate-id", sf_id, "service function")])
        sfs[sf_id] = ServiceFunction(
            id=sf_id,
            mac=MacAddress(_require(entry, "mac", where)),
            sff_id=str(_require(entry, "sff", where)),
            in_port=int(_require(entry, "in_port", where)),
            out_port=int(_require(entry, "out_port", where)),
            # Absent flag means symmetric: omitting a stateful SF breaks
            # connections, including a stateless one only costs latency.
            requires_symmetry=bool(entry.get("requires_symmetry", True)),
            processing_delay_ns=_us_to_ns(entry.get("processing_delay_us", 0)),
            role=str(entry["role"]) if entry.get("role") is not None else None,
            available=bool(entry.get("available", True)),
        )

    chains: dict[int, ServiceChain] = {}
    for i, entry in enumerate(doc.get("chains", [])):
        where = f"chains[{i}]"
        sfc_id = int(_require(entry, "sfc_id", where))
        if sfc_id in chains:
            raise RepositoryIntegrityError([Violation("duplicate-id", str(sfc_id), "chain")])
        chains[sfc_id] = ServiceChain(
            sfc_id=sfc_id,
            sf_sequence=tuple(str(s) for s in _require(entry, "sfs", where)),
        )

    flows = []
    for i, entry in enumerate(doc.get("flows", [])):
        where = f"flows[{i}]"
        flows.append(
            FlowSpec(
                src_ip=str(_require(entry, "src_ip", where)),
                dst_ip=str(_require(entry, "dst_ip", where)),
                src_port=int(_require(entry, "src_port", where)),
                dst_port=int(_require(entry, "dst_port", where)),
                protocol=Protocol.from_name(str(_require(entry, "protocol", where))),
                sfc_id=int(_require(entry, "sfc_id", where)),
            )
        )

    seen_ep = set()
    for ep in endpoints:
        if ep.id in seen_ep:
            raise RepositoryIntegrityError([Violation("duplicate-id", ep.id, "endpoint")])
        seen_ep.add(ep.id)
    seen_sff = set()
    for sff in sffs:
        if sff.id in seen_sff:
            raise RepositoryIntegrityError([Violation("duplicate-id", sff.id, "forwarder")])
        seen_sff.add(sff.id)

    return Repository(
        topology=Topology(sffs=tuple(sffs), endpoints=tuple(endpoints), links=tuple(links)),
        sfs=sfs,
        chains=chains,
        flows=tuple(flows),
    )


def repository_parse(text: str) -> Repository:
    """Parse and build a repository without validating invariants; useful
    for reporting every violation of a broken file at once."""
    try:
        doc = json.loads(text or "{}")
    except json.JSONDecodeError as exc:
        raise RepositoryParseError(exc.msg, line=exc.lineno, column=exc.colno) from exc
    return _repository_from_dict(doc)


def repository_loads(text: str) -> Repository:
    """Parse, build and validate a repository from document text."""
    repo = repository_parse(text)
    violations = repository_validate(repo)
    if violations:
        raise RepositoryIntegrityError(violations)
    return repo


def repository_load(source: IO[bytes] | IO[str]) -> Repository:
    """Load a repository from a readable stream; see ``repository_loads``."""
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return repository_loads(data)


def repository_validate(repo: Repository) -> list[Violation]:
    """Check every invariant; returns one Violation per broken rule.

    An empty list means the repository is internally consistent. Nothing is
    repaired or dropped.
    """
    out: list[Violation] = []
    topo = repo.topology
    sff_map = topo.sff_map

    def port_ok(sff_id: str, port: int) -> bool:
        sff = sff_map.get(sff_id)
        return sff is not None and port in sff.ports

    # Port occupancy: a forwarder port hosts at most one attachment.
    occupancy: dict[tuple[str, int], str] = {}

    def claim(sff_id: str, port: int, owner: str):
        key = (sff_id, port)
        if key in occupancy:
            out.append(Violation("port-conflict", f"{sff_id}:{port}", f"{occupancy[key]} and {owner}"))
        else:
            occupancy[key] = owner

    macs: dict[MacAddress, str] = {}

    def claim_mac(mac: MacAddress, owner: str):
        if mac in macs:
            out.append(Violation("duplicate-mac", mac, f"{macs[mac]} and {owner}"))
        else:
            macs[mac] = owner

    for ep in topo.endpoints:
        if ep.sff_id not in sff_map:
            out.append(Violation("unknown-sff", ep.id, f"endpoint attached to {ep.sff_id}"))
        elif not port_ok(ep.sff_id, ep.port):
            out.append(Violation("unknown-port", ep.id, f"{ep.sff_id}:{ep.port}"))
        else:
            claim(ep.sff_id, ep.port, ep.id)
        claim_mac(ep.mac, ep.id)

    ips_seen: dict[str, str] = {}
    for ep in topo.endpoints:
        if ep.ip is None:
            continue
        if ep.ip in ips_seen:
            out.append(Violation("duplicate-ip", ep.ip, f"{ips_seen[ep.ip]} and {ep.id}"))
        else:
            ips_seen[ep.ip] = ep.id

    for i, link in enumerate(topo.links):
        subject = f"link[{i}]"
        for side, (sff_id, port) in (("a", (link.a_sff, link.a_port)), ("b", (link.b_sff, link.b_port))):
            if sff_id not in sff_map:
                out.append(Violation("unknown-sff", subject, f"{side} side {sff_id}"))
            elif not port_ok(sff_id, port):
                out.append(Violation("unknown-port", subject, f"{side} side {sff_id}:{port}"))
            else:
                claim(sff_id, port, subject)
        if link.delay_ns < 0:
            out.append(Violation("bad-delay", subject, str(link.delay_ns)))
        if link.capacity_bps is not None and link.capacity_bps <= 0:
            out.append(Violation("bad-capacity", subject, str(link.capacity_bps)))

    for sf in repo.sfs.values():
        if sf.in_port == sf.out_port:
            out.append(Violation("sf-port-equal", sf.id, f"port {sf.in_port}"))
        if sf.sff_id not in sff_map:
            out.append(Violation("unknown-sff", sf.id, f"attached to {sf.sff_id}"))
        else:
            for port in (sf.in_port, sf.out_port):
                if not port_ok(sf.sff_id, port):
                    out.append(Violation("unknown-port", sf.id, f"{sf.sff_id}:{port}"))
                else:
                    claim(sf.sff_id, port, sf.id)
        claim_mac(sf.mac, sf.id)
        if sf.processing_delay_ns < 0:
            out.append(Violation("bad-delay", sf.id, str(sf.processing_delay_ns)))

    # Connectivity over the SFF graph.
    if len(topo.sffs) > 1:
        seen = set()
        stack = [topo.sffs[0].id]
        while stack:
            cur = stack.pop()
            if cur in seen:
                continue
            seen.add(cur)
            stack.extend(topo.adjacency.get(cur, ()))
        for sff in topo.sffs:
            if sff.id not in seen:
                out.append(Violation("sff-graph-disconnected", sff.id))

    for chain in repo.chains.values():
        subject = f"sfc {chain.sfc_id}"
        if not 0 <= chain.sfc_id <= MAX_SFC_ID:
            out.append(Violation("sfc-id-range", subject, f"must fit 0..{MAX_SFC_ID}"))
        if not chain.sf_sequence:
            out.append(Violation("empty-chain", subject))
        seen_sf: set[str] = set()
        for sf_id in chain.sf_sequence:
            if sf_id not in repo.sfs:
                out.append(Violation("unknown-sf", sf_id, subject))
            if sf_id in seen_sf:
                out.append(Violation("duplicate-sf-in-chain", sf_id, subject))
            seen_sf.add(sf_id)

    for i, flow in enumerate(repo.flows):
        subject = f"flow[{i}]"
        if flow.sfc_id not in repo.chains:
            out.append(Violation("unknown-sfc", subject, f"sfc {flow.sfc_id}"))
        for port in (flow.src_port, flow.dst_port):
            if not 0 <= port <= 65535:
                out.append(Violation("bad-transport-port", subject, str(port)))

    return out


def repository_dump(repo: Repository) -> dict:
    """Serialize back to the document tree accepted by ``repository_loads``."""
    topo = repo.topology
    return {
        "topology": {
            "sffs": [{"id": s.id, "ports": sorted(s.ports)} for s in topo.sffs],
            "endpoints": [
                {"id": e.id, "mac": str(e.mac), "sff": e.sff_id, "port": e.port}
                | ({"ip": e.ip} if e.ip is not None else {})
                for e in topo.endpoints
            ],
            "links": [
                {
                    "a": {"sff": l.a_sff, "port": l.a_port},
                    "b": {"sff": l.b_sff, "port": l.b_port},
                    "delay_us": _ns_to_us(l.delay_ns),
                    "capacity_bps": l.capacity_bps,
                }
                for l in topo.links
            ],
        },
        "sfs": [
            {
                "id": sf.id,
                "mac": str(sf.mac),
                "sff": sf.sff_id,
                "in_port": sf.in_port,
                "out_port": sf.out_port,
                "requires_symmetry": sf.requires_symmetry,
                "processing_delay_us": _ns_to_us(sf.processing_delay_ns),
            }
            | ({"role": sf.role} if sf.role is not None else {})
            | ({} if sf.available else {"available": False})
            for sf in repo.sfs.values()
        ],
        "chains": [
            {"sfc_id": c.sfc_id, "sfs": list(c.sf_sequence)} for c in repo.chains.values()
        ],
        "flows": [
            {
                "src_ip": f.src_ip,
                "dst_ip": f.dst_ip,
                "src_port": f.src_port,
                "dst_port": f.dst_port,
                "protocol": f.protocol.label,
                "sfc_id": f.sfc_id,
            }
            for f in repo.flows
        ],
    }


def repository_dumps(repo: Repository) -> str:
    return json.dumps(repository_dump(repo), indent=2, sort_keys=False) + "\n"
