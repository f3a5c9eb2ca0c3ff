#!/usr/bin/env python3
"""Benchmark the compiled engine core against the pure-Python fallback.

Runs the shipped evaluation scenario's bulk transfer on both backends and
reports wall time, processed events per second and the speedup. Results are
also cross-checked for bit-identity, since a fast core that disagrees with
the reference is worthless.
"""

import argparse
import time

from sfcsym.scenario import evaluation_repository
from sfcsym.simulator import Scenario, SimConfig, Simulation, available_backends


def bench_backend(name, module, repo, cfg, scenario, repeats):
    best = None
    metrics_json = None
    events = 0
    for _ in range(repeats):
        sim = Simulation(repo, cfg, scenario, backend=module)
        started = time.perf_counter()
        metrics = sim.run_transfer()
        elapsed = time.perf_counter() - started
        best = elapsed if best is None else min(best, elapsed)
        metrics_json = metrics.to_json()
        events = sim.core.event_seq
    return best, events, metrics_json


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--total-mb", type=int, default=10, help="transfer size per run")
    parser.add_argument("--repeats", type=int, default=3, help="timing repeats, best-of")
    parser.add_argument("--scenario", choices=("partial", "full"), default="full")
    args = parser.parse_args()

    repo = evaluation_repository()
    cfg = SimConfig(total_bytes=args.total_mb * 1024 * 1024, payload_size=1024)
    scenario = Scenario(args.scenario)
    backends = available_backends()
    if "cython" not in backends:
        print("compiled core not available; run `pip install -e .` first")

    results = {}
    for name, module in sorted(backends.items()):
        elapsed, events, metrics_json = bench_backend(name, module, repo, cfg, scenario, args.repeats)
        results[name] = (elapsed, events, metrics_json)
        rate = events / elapsed
        print(f"{name:>7}: {elapsed:8.3f} s  {events:>9} events  {rate:12.0f} events/s")

    if len(results) == 2:
        py, cy = results["python"], results["cython"]
        assert py[2] == cy[2], "backends disagree on metrics"
        print(f"speedup: {py[0] / cy[0]:.1f}x (outputs bit-identical)")


if __name__ == "__main__":
    main()
