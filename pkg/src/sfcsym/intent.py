"""Service-intent pipeline: parse a human-readable request, map it onto a
blueprint, size resources against the SLA, compose a concrete chain from the
catalog, and emit a deployment command.

Southbound activity (orchestrator, infrastructure manager, SDN controller)
is modelled as recorded command objects on an audit log; there is no live
integration.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Mapping, Sequence

from .model import MAX_SFC_ID, Repository, ServiceChain, ServiceFunction


class IntentError(Exception):
    pass


class IntentParseError(IntentError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class BlueprintMatchError(IntentError):
    pass


class CompositionError(IntentError):
    pass


class ConsistencyError(IntentError):
    pass


@dataclass(frozen=True)
class SlaTerms:
    bandwidth_bps: int
    latency_ms: float
    cost: float

    def __post_init__(self):
        if self.bandwidth_bps < 0 or self.latency_ms < 0 or self.cost < 0:
            raise ValueError("SLA terms must be non-negative")


@dataclass(frozen=True)
class IntentRequest:
    label: str
    validity_days: int
    sla: SlaTerms

    def __post_init__(self):
        if self.validity_days <= 0:
            raise ValueError("intent validity must be positive")


@dataclass(frozen=True)
class RoleSpec:
    role: str
    requires_symmetry: bool


@dataclass(frozen=True)
class Blueprint:
    """Slice template: ordered SF roles plus the SLA envelope it serves."""

    id: str
    sf_roles: tuple[RoleSpec, ...]
    max_latency_ms: float
    min_bandwidth_bps: int

    def __post_init__(self):
        if not self.sf_roles:
            raise ValueError("blueprint needs at least one role")

    def admits(self, intent: IntentRequest) -> bool:
        """True when the blueprint can serve the intent's SLA: it guarantees
        a latency no higher than requested and at least the requested
        bandwidth."""
        return (
            self.max_latency_ms <= intent.sla.latency_ms
            and self.min_bandwidth_bps >= intent.sla.bandwidth_bps
        )

    def rejection_reason(self, intent: IntentRequest) -> str | None:
        reasons = []
        if self.max_latency_ms > intent.sla.latency_ms:
            reasons.append(
                f"latency bound {self.max_latency_ms}ms exceeds requested {intent.sla.latency_ms}ms"
            )
        if self.min_bandwidth_bps < intent.sla.bandwidth_bps:
            reasons.append(
                f"bandwidth {self.min_bandwidth_bps}bps below requested {intent.sla.bandwidth_bps}bps"
            )
        return "; ".join(reasons) or None


@dataclass(frozen=True)
class RoleResources:
    cpu_units: int
    memory_mb: int
    bandwidth_bps: int

    def __post_init__(self):
        if self.cpu_units < 0 or self.memory_mb < 0 or self.bandwidth_bps < 0:
            raise ValueError("resources must be non-negative")


@dataclass(frozen=True)
class ResourceAllocation:
    per_role: Mapping[str, RoleResources]


@dataclass(frozen=True)
class SfSnapshot:
    role: str
    requires_symmetry: bool


@dataclass(frozen=True)
class DeploymentCommand:
    intent_label: str
    chain: ServiceChain
    allocation: ResourceAllocation
    sf_attributes: Mapping[str, SfSnapshot]

    def dump(self) -> str:
        """Canonical text form, stable across runs."""
        lines = [
            f"intent={self.intent_label}",
            f"sfc_id={self.chain.sfc_id}",
            "chain=" + ",".join(self.chain.sf_sequence),
        ]
        for sf_id in self.chain.sf_sequence:
            snap = self.sf_attributes[sf_id]
            lines.append(f"sf {sf_id} role={snap.role} requires_symmetry={snap.requires_symmetry}")
        for role in sorted(self.allocation.per_role):
            r = self.allocation.per_role[role]
            lines.append(
                f"alloc {role} cpu={r.cpu_units} memory_mb={r.memory_mb} bandwidth_bps={r.bandwidth_bps}"
            )
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SouthboundCall:
    """Recorded command toward NFVO / VIM / SDN-C; integration stub only."""

    target: str
    action: str
    params: tuple[tuple[str, object], ...]


_MANDATORY_KEYS = ("Intent Label", "Intent validity", "SLA")
_SLA_FIELDS = ("bandwidth", "latency", "cost")


def parse_intent(text: str) -> IntentRequest:
    """Parse the line-oriented `Key: value` intent format.

    SLA values are read as bandwidth in bit/s, latency in milliseconds and
    cost in plain currency units.
    """
    values: dict[str, str] = {}
    lines_at: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if ":" not in line:
            raise IntentParseError(f"expected 'Key: value', got {line!r}", lineno)
        key, value = line.split(":", 1)
        values[key.strip()] = value.strip()
        lines_at[key.strip()] = lineno
    for key in _MANDATORY_KEYS:
        if key not in values:
            raise IntentParseError(f"missing mandatory key {key!r}")

    validity_raw = values["Intent validity"]
    validity_lineno = lines_at["Intent validity"]
    parts = validity_raw.split()
    if not parts or (len(parts) > 1 and parts[1].lower() not in ("day", "days")):
        raise IntentParseError(f"cannot read validity {validity_raw!r}", validity_lineno)
    try:
        validity_days = int(parts[0])
    except ValueError:
        raise IntentParseError(f"cannot read validity {validity_raw!r}", validity_lineno) from None

    sla_raw = values["SLA"]
    sla_lineno = lines_at["SLA"]
    terms: dict[str, float] = {}
    for item in sla_raw.split(";"):
        item = item.strip()
        if not item:
            continue
        if ":" not in item:
            raise IntentParseError(f"malformed SLA term {item!r}", sla_lineno)
        name, number = item.split(":", 1)
        name = name.strip().lower()
        if name not in _SLA_FIELDS:
            raise IntentParseError(f"unknown SLA field {name!r}", sla_lineno)
        try:
            terms[name] = float(number.strip())
        except ValueError:
            raise IntentParseError(f"SLA field {name!r} is not numeric: {number!r}", sla_lineno) from None
    for field in _SLA_FIELDS:
        if field not in terms:
            raise IntentParseError(f"SLA is missing field {field!r}", sla_lineno)

    return IntentRequest(
        label=values["Intent Label"],
        validity_days=validity_days,
        sla=SlaTerms(
            bandwidth_bps=round(terms["bandwidth"]),
            latency_ms=terms["latency"],
            cost=terms["cost"],
        ),
    )


def format_intent(intent: IntentRequest) -> str:
    bw = intent.sla.bandwidth_bps
    lat = intent.sla.latency_ms
    lat_text = int(lat) if float(lat).is_integer() else lat
    cost = intent.sla.cost
    cost_text = int(cost) if float(cost).is_integer() else cost
    return (
        f"Intent Label: {intent.label}\n"
        f"Intent validity: {intent.validity_days} days\n"
        f"SLA: Bandwidth:{bw};Latency: {lat_text}; Cost: {cost_text};\n"
    )


def map_intent_to_blueprint(intent: IntentRequest, catalog: Sequence[Blueprint]) -> Blueprint:
    """First blueprint, in catalog order, whose SLA envelope admits the
    intent. Catalog order is the documented selection rule."""
    if not catalog:
        raise BlueprintMatchError("blueprint catalog is empty")
    failures = []
    for bp in catalog:
        reason = bp.rejection_reason(intent)
        if reason is None:
            return bp
        failures.append(f"{bp.id}: {reason}")
    raise BlueprintMatchError(
        "no blueprint admits intent "
        f"{intent.label!r}: " + "; ".join(failures)
    )


def compute_resources(
    intent: IntentRequest,
    bp: Blueprint,
    cpu_capacity_bps: int = 10**9,
    memory_mb_per_role: int = 512,
) -> ResourceAllocation:
    """Linear sizing policy: every role gets the SLA bandwidth, enough CPU
    units to carry it at `cpu_capacity_bps` each, and a constant memory
    allotment."""
    bw = intent.sla.bandwidth_bps
    cpu = -(-bw // cpu_capacity_bps)  # ceil
    per_role = {
        spec.role: RoleResources(cpu_units=cpu, memory_mb=memory_mb_per_role, bandwidth_bps=bw)
        for spec in bp.sf_roles
    }
    return ResourceAllocation(per_role=per_role)


def compose_sfc_instance(bp: Blueprint, repo: Repository) -> ServiceChain:
    """Pick one catalog SF per role (least loaded, then lexicographic id)
    and mint a chain under the lowest free id."""
    load: dict[str, int] = {sf_id: 0 for sf_id in repo.sfs}
    for chain in repo.chains.values():
        for sf_id in chain.sf_sequence:
            if sf_id in load:
                load[sf_id] += 1

    chosen: list[str] = []
    used: set[str] = set()
    for spec in bp.sf_roles:
        candidates = [
            sf
            for sf in repo.sfs.values()
            if sf.role == spec.role
            and sf.requires_symmetry == spec.requires_symmetry
            and sf.available
            and sf.id not in used
        ]
        if not candidates:
            raise CompositionError(f"no available instance for role {spec.role!r}")
        best = min(candidates, key=lambda sf: (load[sf.id], sf.id))
        chosen.append(best.id)
        used.add(best.id)

    sfc_id = next((i for i in range(1, MAX_SFC_ID + 1) if i not in repo.chains), None)
    if sfc_id is None:
        raise CompositionError("no free SFC id left")
    return ServiceChain(sfc_id=sfc_id, sf_sequence=tuple(chosen))


def build_deployment_command(
    intent: IntentRequest,
    bp: Blueprint,
    alloc: ResourceAllocation,
    chain: ServiceChain,
    catalog: Mapping[str, ServiceFunction],
) -> DeploymentCommand:
    """Bundle the resolved chain with a snapshot of each SF's attributes so
    the operations layer acts on exactly what was decided here."""
    if len(chain.sf_sequence) != len(bp.sf_roles):
        raise ConsistencyError(
            f"chain has {len(chain.sf_sequence)} SFs but blueprint {bp.id!r} has {len(bp.sf_roles)} roles"
        )
    snapshot: dict[str, SfSnapshot] = {}
    for sf_id, spec in zip(chain.sf_sequence, bp.sf_roles):
        sf = catalog.get(sf_id)
        if sf is None:
            raise ConsistencyError(f"chain references unknown SF {sf_id!r}")
        if sf.role is None:
            raise ConsistencyError(f"SF {sf_id!r} lacks a role attribute")
        if sf.role != spec.role:
            raise ConsistencyError(f"SF {sf_id!r} has role {sf.role!r}, expected {spec.role!r}")
        snapshot[sf_id] = SfSnapshot(role=sf.role, requires_symmetry=sf.requires_symmetry)
    return DeploymentCommand(
        intent_label=intent.label,
        chain=chain,
        allocation=alloc,
        sf_attributes=snapshot,
    )


def execute_deployment(
    cmd: DeploymentCommand, repo: Repository, audit: list[SouthboundCall]
) -> Repository:
    """Register the command's chain; re-execution is a no-op.

    A same-id chain with a different SF sequence is a consistency error, as
    is a chain referencing SFs that have since disappeared.
    """
    for sf_id in cmd.chain.sf_sequence:
        if sf_id not in repo.sfs:
            raise ConsistencyError(f"command references deleted SF {sf_id!r}")
    existing = repo.chains.get(cmd.chain.sfc_id)
    if existing is not None:
        if existing != cmd.chain:
            raise ConsistencyError(
                f"SFC id {cmd.chain.sfc_id} already registered with a different chain"
            )
        audit.append(
            SouthboundCall("repository", "register-chain-noop", (("sfc_id", cmd.chain.sfc_id),))
        )
        return repo
    audit.append(
        SouthboundCall(
            "nfvo",
            "instantiate",
            (("intent", cmd.intent_label), ("sfs", cmd.chain.sf_sequence)),
        )
    )
    for role in sorted(cmd.allocation.per_role):
        r = cmd.allocation.per_role[role]
        audit.append(
            SouthboundCall(
                "vim",
                "allocate",
                (("role", role), ("cpu", r.cpu_units), ("memory_mb", r.memory_mb), ("bandwidth_bps", r.bandwidth_bps)),
            )
        )
    audit.append(
        SouthboundCall("sdn-c", "enable-steering", (("sfc_id", cmd.chain.sfc_id),))
    )
    return repo.with_chain(cmd.chain)


def load_blueprints(source: IO[str] | IO[bytes]) -> tuple[Blueprint, ...]:
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise IntentParseError(f"blueprint catalog: {exc.msg}", exc.lineno) from exc
    if not isinstance(doc, list):
        raise IntentParseError("blueprint catalog must be a list")
    out = []
    for i, entry in enumerate(doc):
        try:
            out.append(
                Blueprint(
                    id=str(entry["id"]),
                    sf_roles=tuple(
                        RoleSpec(role=str(r["role"]), requires_symmetry=bool(r["requires_symmetry"]))
                        for r in entry["sf_roles"]
                    ),
                    max_latency_ms=float(entry["max_latency_ms"]),
                    min_bandwidth_bps=int(entry["min_bandwidth_bps"]),
                )
            )
        except KeyError as exc:
            raise IntentParseError(f"blueprints[{i}]: missing key {exc.args[0]!r}") from None
    return tuple(out)
