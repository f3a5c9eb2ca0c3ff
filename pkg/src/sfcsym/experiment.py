"""Experiment harness: repeated partial-vs-full runs with statistics.

A run of both scenarios checks the three expected orderings (round trip
down, completion time down, throughput up under partial symmetry). Whether
strict inequalities are required is decided analytically from the paths: if
the reply paths differ and the skipped work carries any delay, ties count as
violations.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .model import Direction, FlowSpec, Protocol, Repository, lookup_chain, repository_load
from .pathengine import HopPath, compute_reverse_path
from .simulator import Scenario, SimConfig, Simulation, apply_scenario
from .stats import compute_confidence_interval, sample_std

METRIC_NAMES = ("rtt_ns", "completion_ns", "throughput_bps")

# Expected sign of (partial - full) per metric when the scenarios differ.
_EXPECTED_SIGN = {"rtt_ns": -1, "completion_ns": -1, "throughput_bps": 1}

ORDERING_CONFIRMED = "confirmed"
ORDERING_TIED = "tied"
ORDERING_VIOLATED = "violated"


@dataclass(frozen=True)
class ExperimentConfig:
    repository: Repository | None = None
    repo_path: str | Path | None = None
    scenario: str = "both"  # both | partial | full
    repetitions: int = 100
    confidence_level: float = 0.95
    output_format: str = "csv"
    rng_seed: int = 0
    total_bytes: int = 10 * 1024 * 1024
    payload_size: int = 1024
    offered_rate_bps: int = 10**9
    sf_delay_override_us: float | None = None
    n_probes: int = 100
    probe_size: int = 64
    jitter_ns: int = 0

    def __post_init__(self):
        if not 0.0 < self.confidence_level < 1.0:
            raise ValueError("confidence level must be in (0, 1)")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.scenario not in ("both", "partial", "full"):
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.repository is None and self.repo_path is None:
            raise ValueError("either repository or repo_path is required")

    def load_repository(self) -> Repository:
        if self.repository is not None:
            return self.repository
        with open(self.repo_path, "rb") as fh:
            return repository_load(fh)

    def sim_config(self, seed: int, trace: bool = False) -> SimConfig:
        override = self.sf_delay_override_us
        return SimConfig(
            total_bytes=self.total_bytes,
            payload_size=self.payload_size,
            offered_rate_bps=self.offered_rate_bps,
            direction=Direction.REVERSE,
            per_sf_processing_delay_ns=None if override is None else round(override * 1000),
            probe_size=self.probe_size,
            jitter_ns=self.jitter_ns,
            rng_seed=seed,
            trace=trace,
        )


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    std: float
    ci_lo: float
    ci_hi: float
    n: int

    def __post_init__(self):
        assert self.ci_lo <= self.mean <= self.ci_hi, "interval must bracket the mean"


@dataclass(frozen=True)
class ScenarioResult:
    label: str
    summaries: Mapping[str, MetricSummary]
    samples: Mapping[str, tuple[float, ...]]
    sf_packet_counts: Mapping[str, int]
    transfer_series_mean: tuple[float, ...]
    throughput_series_mean: tuple[float, ...]


@dataclass(frozen=True)
class Report:
    scenarios: Mapping[str, ScenarioResult]
    repetitions: int
    confidence_level: float
    rng_seed: int
    deltas: Mapping[str, float] = field(default_factory=dict)
    orderings: Mapping[str, str] = field(default_factory=dict)
    expected_strict: bool = False

    @property
    def any_violation(self) -> bool:
        return any(v == ORDERING_VIOLATED for v in self.orderings.values())


def _summarize(samples: Sequence[float], level: float) -> MetricSummary:
    mean = statistics.fmean(samples)
    lo, hi = compute_confidence_interval(samples, level)
    return MetricSummary(mean=mean, std=sample_std(samples), ci_lo=lo, ci_hi=hi, n=len(samples))


def _mean_series(series_per_rep: list[tuple[int, ...]]) -> tuple[float, ...]:
    if not series_per_rep:
        return ()
    horizon = max(len(s) for s in series_per_rep)
    out = []
    for i in range(horizon):
        out.append(statistics.fmean(s[i] if i < len(s) else 0 for s in series_per_rep))
    return tuple(out)


def _path_cost_ns(path: HopPath, repo: Repository, cfg: SimConfig, probe_size: int) -> int:
    """Unloaded one-way latency along a hop path: SF processing plus link
    propagation and serialization for a probe-sized packet."""
    link_by_ports = {}
    for link in repo.topology.links:
        link_by_ports[(link.a_sff, link.a_port)] = link
        link_by_ports[(link.b_sff, link.b_port)] = link
    total = 0
    for hop in path.hops:
        link = link_by_ports.get((hop.sff_id, hop.egress_port))
        if link is not None:
            ser = 0
            if link.capacity_bps:
                ser = (probe_size * 8 * 1_000_000_000) // link.capacity_bps
            total += link.delay_ns + ser
            continue
        sf = next((s for s in repo.sfs.values() if s.sff_id == hop.sff_id and s.in_port == hop.egress_port), None)
        if sf is None:
            sf = next((s for s in repo.sfs.values() if s.sff_id == hop.sff_id and s.out_port == hop.egress_port), None)
        if sf is not None:
            delay = sf.processing_delay_ns
            if cfg.per_sf_processing_delay_ns is not None:
                delay = cfg.per_sf_processing_delay_ns
            total += delay
    return total


def analytic_reverse_delta_ns(repo: Repository, cfg: SimConfig, flow: FlowSpec) -> int:
    """Expected RTT difference (full minus partial) for an unloaded probe:
    the cost of the full-symmetry reply path minus the partial one."""
    chain = lookup_chain(repo, flow.sfc_id)
    partial_repo = apply_scenario(repo, Scenario.PARTIAL)
    full_repo = apply_scenario(repo, Scenario.FULL)
    rev_partial = compute_reverse_path(chain, flow, partial_repo.topology, partial_repo.sfs)
    rev_full = compute_reverse_path(chain, flow, full_repo.topology, full_repo.sfs)
    cost_partial = _path_cost_ns(rev_partial, partial_repo, cfg, cfg.probe_size)
    cost_full = _path_cost_ns(rev_full, full_repo, cfg, cfg.probe_size)
    return cost_full - cost_partial


def _ordering_status(deltas: Sequence[float], expected_sign: int, expect_strict: bool) -> str:
    wrong = [d for d in deltas if d * expected_sign < 0]
    ties = [d for d in deltas if d == 0]
    if wrong:
        return ORDERING_VIOLATED
    if len(ties) == len(deltas):
        return ORDERING_VIOLATED if expect_strict else ORDERING_TIED
    if ties and expect_strict:
        return ORDERING_VIOLATED
    return ORDERING_CONFIRMED


def run_scenario(
    repo: Repository, cfg: ExperimentConfig, scenario: Scenario
) -> ScenarioResult:
    """All repetitions of one scenario: probe RTTs plus one bulk transfer per
    repetition, seeded seed+i."""
    rtt_means: list[float] = []
    completions: list[float] = []
    throughputs: list[float] = []
    transfer_series: list[tuple[int, ...]] = []
    throughput_series: list[tuple[int, ...]] = []
    sf_counts: dict[str, int] = {}
    for i in range(cfg.repetitions):
        sim_cfg = cfg.sim_config(seed=cfg.rng_seed + i)
        probes = Simulation(repo, sim_cfg, scenario).run_probes(cfg.n_probes)
        metrics = Simulation(repo, sim_cfg, scenario).run_transfer()
        rtt_means.append(statistics.fmean(probes))
        completions.append(float(metrics.completion_ns))
        seconds = max(metrics.completion_ns, 1) / 1_000_000_000
        throughputs.append(8 * metrics.delivered_packets * cfg.payload_size / seconds)
        transfer_series.append(metrics.transfer_bytes_per_s)
        throughput_series.append(metrics.throughput_bps_per_s)
        if i == 0:
            sf_counts = dict(metrics.sf_packet_counts)
    samples = {
        "rtt_ns": tuple(rtt_means),
        "completion_ns": tuple(completions),
        "throughput_bps": tuple(throughputs),
    }
    level = cfg.confidence_level
    return ScenarioResult(
        label=scenario.value,
        summaries={name: _summarize(samples[name], level) for name in METRIC_NAMES},
        samples=samples,
        sf_packet_counts=sf_counts,
        transfer_series_mean=_mean_series(transfer_series),
        throughput_series_mean=_mean_series(throughput_series),
    )


def run_experiment(cfg: ExperimentConfig) -> Report:
    repo = cfg.load_repository()
    wanted = (
        (Scenario.PARTIAL, Scenario.FULL)
        if cfg.scenario == "both"
        else (Scenario(cfg.scenario),)
    )
    results = {s.value: run_scenario(repo, cfg, s) for s in wanted}

    deltas: dict[str, float] = {}
    orderings: dict[str, str] = {}
    expected_strict = False
    if cfg.scenario == "both":
        data_flow = next((f for f in repo.flows if f.protocol is not Protocol.ICMP), None)
        if data_flow is not None:
            expected_strict = (
                analytic_reverse_delta_ns(repo, cfg.sim_config(cfg.rng_seed), data_flow) > 0
            )
        partial, full = results["partial"], results["full"]
        for name in METRIC_NAMES:
            deltas[name] = partial.summaries[name].mean - full.summaries[name].mean
            per_rep = [
                p - f for p, f in zip(partial.samples[name], full.samples[name])
            ]
            orderings[name] = _ordering_status(per_rep, _EXPECTED_SIGN[name], expected_strict)

    return Report(
        scenarios=results,
        repetitions=cfg.repetitions,
        confidence_level=cfg.confidence_level,
        rng_seed=cfg.rng_seed,
        deltas=deltas,
        orderings=orderings,
        expected_strict=expected_strict,
    )
