"""Acceptance suite: one test per release criterion, each printing a PASS
line with the measured evidence. Run with `pytest tests/test_acceptance.py -s`
to see the lines.
"""

import math
import random
import statistics
import time

import pytest

from sfcsym.model import FiveTuple, MacAddress, Protocol, ServiceChain, ServiceFunction
from sfcsym.pathengine import compute_reverse_sf_sequence
from sfcsym.simulator import (
    ACTIVE_BACKEND,
    Scenario,
    SimConfig,
    Simulation,
    available_backends,
    measure_rtt,
    run_simulation,
)

MS = 1_000_000
US = 1_000

TEN_MB = 10 * 1024 * 1024


def ok(n, text):
    print(f"PASS criterion {n}: {text}")


def catalog_for(flags):
    out = {}
    for i, (sf_id, sym) in enumerate(flags.items()):
        out[sf_id] = ServiceFunction(
            id=sf_id,
            mac=MacAddress.from_int(0x0200_0000_3000 + i),
            sff_id="s1",
            in_port=2 * i + 2,
            out_port=2 * i + 3,
            requires_symmetry=sym,
        )
    return out


def test_criterion_1_reverse_path_oracle_equivalence():
    started = time.perf_counter()
    cases = 0
    for seed in (101, 202, 303):
        rng = random.Random(seed)
        for _ in range(1000):
            n = rng.randint(1, 8)
            ids = [f"F{i}" for i in range(n)]
            flags = {s: rng.random() < 0.5 for s in ids}
            chain = ServiceChain(1, tuple(ids))
            oracle = [s for s in reversed(ids) if flags[s]]
            assert compute_reverse_sf_sequence(chain, catalog_for(flags)) == oracle
            cases += 1
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0, f"took {elapsed:.3f}s"
    ok(1, f"reverse sequence equals brute-force oracle on {cases} chains in {elapsed:.3f}s")


def test_criterion_2_chain_scenario_fidelity(eval_repo):
    cfg = SimConfig(trace=True)
    partial = Simulation(eval_repo, cfg, Scenario.PARTIAL)
    partial.run_probes(1)
    forward_trace = partial.sf_visit_order(0)
    partial_reverse_trace = partial.sf_visit_order(1)
    full = Simulation(eval_repo, cfg, Scenario.FULL)
    full.run_probes(1)
    full_reverse_trace = full.sf_visit_order(1)

    assert forward_trace == ["SF2", "SF1", "SF3"]
    assert partial_reverse_trace == ["SF3"]
    assert full_reverse_trace == ["SF3", "SF1", "SF2"]
    ok(2, "traces: forward SF2>SF1>SF3, partial reverse SF3, full reverse SF3>SF1>SF2")


def test_criterion_3_rtt_ordering_and_analytic_delta(eval_repo):
    # Hand count on the shipped line topology, per-SF delay 1 ms, links
    # 0.1 ms at 1 Gb/s: the full reply additionally crosses SF1 and SF2
    # (2 x 1 ms) and the sff1-sff2 link twice more; each crossing costs
    # 0.1 ms propagation plus 64B x 8 / 1e9 = 512 ns serialization.
    expected_delta = 2 * (1 * MS) + 2 * (100 * US + 512)
    reps = 20
    deltas = []
    for i in range(reps):
        cfg = SimConfig(per_sf_processing_delay_ns=1 * MS, rng_seed=i)
        rtt_partial = statistics.fmean(measure_rtt(eval_repo, cfg, Scenario.PARTIAL, 5))
        rtt_full = statistics.fmean(measure_rtt(eval_repo, cfg, Scenario.FULL, 5))
        assert rtt_partial < rtt_full, f"repetition {i}: {rtt_partial} !< {rtt_full}"
        deltas.append(round(rtt_full - rtt_partial))
    assert all(d == expected_delta for d in deltas), deltas
    ok(3, f"RTT partial < full in {reps}/{reps} repetitions; delta exactly {expected_delta} ns")


@pytest.fixture(scope="module")
def transfer_runs(eval_repo):
    runs = {}
    for scenario in (Scenario.PARTIAL, Scenario.FULL):
        per_rep = []
        for i in range(2):
            cfg = SimConfig(total_bytes=TEN_MB, payload_size=1024, rng_seed=i)
            per_rep.append(run_simulation(eval_repo, cfg, scenario))
        runs[scenario] = per_rep
    return runs


def test_criterion_4_transfer_and_throughput_ordering(transfer_runs):
    partial, full = transfer_runs[Scenario.PARTIAL], transfer_runs[Scenario.FULL]
    for p, f in zip(partial, full):
        assert p.completion_ns < f.completion_ns

    def mean_throughput(runs):
        return statistics.fmean(
            8 * m.delivered_packets * 1024 / (m.completion_ns / 1e9) for m in runs
        )

    tp_partial, tp_full = mean_throughput(partial), mean_throughput(full)
    assert tp_partial > tp_full
    ok(
        4,
        f"10 MB reverse transfer: completion {partial[0].completion_ns} < {full[0].completion_ns} ns, "
        f"throughput {tp_partial:.0f} > {tp_full:.0f} bit/s",
    )


def test_criterion_5_load_reduction(transfer_runs):
    n = TEN_MB // 1024
    partial, full = transfer_runs[Scenario.PARTIAL][0], transfer_runs[Scenario.FULL][0]
    assert partial.delivered_packets == n
    assert partial.sf_packet_counts == {"SF1": 0, "SF2": 0, "SF3": n}
    assert sum(partial.sf_packet_counts.values()) < sum(full.sf_packet_counts.values())
    ok(
        5,
        f"reverse load: partial {sum(partial.sf_packet_counts.values())} packets "
        f"< full {sum(full.sf_packet_counts.values())}; SF1=SF2=0, SF3={n}",
    )


def test_criterion_6_mac_restore(eval_repo, transfer_runs):
    total = 0
    for runs in transfer_runs.values():
        for m in runs:
            assert m.mac_mismatches == 0
            total += m.delivered_packets
    for scenario in (Scenario.PARTIAL, Scenario.FULL):
        sim = Simulation(eval_repo, SimConfig(), scenario)
        sim.run_probes(10)
        assert sim.core.mac_mismatches == 0
        total += sim.core.delivered
    ok(6, f"all {total} delivered packets carried the endpoint's own MAC")


def test_criterion_7_flow_table_oracle():
    from sfcsym.pathengine import FlowRule, Output, RuleMatch
    from sfcsym.simulator import FlowTable, Packet, flow_table_match

    ips = ["10.0.0.1", "10.0.0.2", "10.0.0.3"]
    ports = [0, 80, 5001]
    protos = [Protocol.UDP, Protocol.TCP, Protocol.ICMP]
    ip_id = {ip: i for i, ip in enumerate(ips)}

    def linear_scan(entries, header, in_port, eth_dst):
        candidates = []
        for seq, r in enumerate(entries):
            m = r.match
            checks = (
                (m.in_port, in_port),
                (m.eth_dst, eth_dst),
                (m.src_ip, header.src_ip),
                (m.dst_ip, header.dst_ip),
                (m.src_port, header.src_port),
                (m.dst_port, header.dst_port),
                (m.protocol, int(header.protocol)),
            )
            if all(w is None or w == g for w, g in checks):
                candidates.append((-r.priority, -m.specificity(), seq, r))
        return sorted(candidates)[0][3] if candidates else None

    def pack(rule):
        m = rule.match
        return (
            -1 if m.in_port is None else m.in_port,
            -1 if m.eth_dst is None else m.eth_dst.as_int,
            -1 if m.src_ip is None else ip_id[m.src_ip],
            -1 if m.dst_ip is None else ip_id[m.dst_ip],
            -1 if m.src_port is None else m.src_port,
            -1 if m.dst_port is None else m.dst_port,
            -1 if m.protocol is None else m.protocol,
            rule.priority,
            -1,
            rule.output_port,
        )

    backend_match = available_backends()[ACTIVE_BACKEND].match_rows
    rng = random.Random(20240915)
    started = time.perf_counter()
    for case in range(10_000):

        def maybe(v):
            return v if rng.random() < 0.5 else None

        entries = []
        table = FlowTable()
        for _ in range(rng.randint(0, 12)):
            rule = FlowRule(
                "s1",
                rng.randint(1, 5),
                RuleMatch(
                    in_port=maybe(rng.randint(1, 3)),
                    eth_dst=maybe(MacAddress.from_int(rng.randint(1, 3))),
                    src_ip=maybe(rng.choice(ips)),
                    dst_ip=maybe(rng.choice(ips)),
                    src_port=maybe(rng.choice(ports)),
                    dst_port=maybe(rng.choice(ports)),
                    protocol=maybe(int(rng.choice(protos))),
                ),
                (Output(rng.randint(1, 9)),),
            )
            if table.install(rule):
                entries.append(rule)
        header = FiveTuple(
            rng.choice(ips), rng.choice(ips), rng.choice(ports), rng.choice(ports), rng.choice(protos)
        )
        eth_dst = MacAddress.from_int(rng.randint(1, 3))
        in_port = rng.randint(1, 3)
        pkt = Packet(eth_src=MacAddress.from_int(9), eth_dst=eth_dst, header=header, payload_size=64)

        expected = linear_scan(entries, header, in_port, eth_dst)
        assert flow_table_match(table, pkt, in_port) is expected

        rows = [pack(r) for r in entries]
        got = backend_match(
            rows,
            in_port,
            eth_dst.as_int,
            ip_id[header.src_ip],
            ip_id[header.dst_ip],
            header.src_port,
            header.dst_port,
            int(header.protocol),
        )
        assert (None if got < 0 else entries[got]) is expected
    elapsed = time.perf_counter() - started
    assert elapsed < 5.0, f"took {elapsed:.2f}s"
    ok(7, f"matcher == linear-scan oracle on 10000 cases ({ACTIVE_BACKEND} backend) in {elapsed:.2f}s")


def test_criterion_8_intent_pipeline(intent_text, blueprints, eval_repo):
    from dataclasses import replace

    from sfcsym.intent import (
        build_deployment_command,
        compose_sfc_instance,
        compute_resources,
        execute_deployment,
        map_intent_to_blueprint,
        parse_intent,
    )

    repo = replace(eval_repo, chains={})
    intent = parse_intent(intent_text)
    blueprint = map_intent_to_blueprint(intent, blueprints)
    alloc = compute_resources(intent, blueprint)
    chain = compose_sfc_instance(blueprint, repo)
    cmd = build_deployment_command(intent, blueprint, alloc, chain, repo.sfs)
    assert cmd.chain.sf_sequence == ("SF2", "SF1", "SF3")
    assert cmd.sf_attributes["SF3"].requires_symmetry is True

    audit = []
    once = execute_deployment(cmd, repo, audit)
    twice = execute_deployment(cmd, once, audit)
    assert twice == once and once.chains[chain.sfc_id] == chain
    ok(8, "sample intent composes SF2,SF1,SF3 with SF3 symmetric; re-execution is a no-op")


def test_criterion_9_confidence_interval_oracle():
    from sfcsym.stats import compute_confidence_interval

    samples = [float(x) for x in range(1, 11)]
    t_9 = 2.2621571627409915  # t(0.975, df=9)
    mean, sd = 5.5, math.sqrt(55 / 6)
    expected = (mean - t_9 * sd / math.sqrt(10), mean + t_9 * sd / math.sqrt(10))
    got = compute_confidence_interval(samples, 0.95)
    for g, e in zip(got, expected):
        assert abs(g - e) <= 1e-9 * abs(e)
    assert compute_confidence_interval([7.0] * 30, 0.95) == (7.0, 7.0)
    assert compute_confidence_interval([3.0], 0.95) == (3.0, 3.0)
    ok(9, f"t-interval matches tabulated oracle to 1e-9; degenerate cases exact")


def test_criterion_10_cli_determinism_and_runtime(tmp_path, capsys):
    from sfcsym.cli import main
    from sfcsym.scenario import write_scenario_files

    write_scenario_files(tmp_path / "scenario")
    repo = str(tmp_path / "scenario" / "evaluation.json")
    base = ["run", "--repo", repo, "--scenario", "both", "--seed", "42"]

    started = time.perf_counter()
    code_a = main(base + ["--out", str(tmp_path / "a")])
    first_run = time.perf_counter() - started
    code_b = main(base + ["--out", str(tmp_path / "b")])
    capsys.readouterr()
    assert code_a == code_b == 0
    names_a = sorted(p.name for p in (tmp_path / "a").iterdir())
    names_b = sorted(p.name for p in (tmp_path / "b").iterdir())
    assert names_a == names_b
    for name in names_a:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert first_run < 60.0, f"default run took {first_run:.1f}s"
    ok(10, f"two default runs byte-identical across {len(names_a)} files; one run takes {first_run:.1f}s")
