"""Command-line harness for the symmetry experiments.

Exit codes of `run`: 0 when every checked ordering is confirmed (or tied
where no strict difference is expected), 2 when an ordering is violated,
1 on execution errors.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .experiment import ExperimentConfig, METRIC_NAMES, Report, run_experiment
from .intent import (
    build_deployment_command,
    compose_sfc_instance,
    compute_resources,
    load_blueprints,
    map_intent_to_blueprint,
    parse_intent,
)
from .model import repository_load, repository_parse, repository_validate
from .report import emit_report
from .simulator import ACTIVE_BACKEND, Scenario, Simulation, format_trace

PAPER_SCALE_BYTES = 1024**3
PAPER_SCALE_REPS = 100


def _default_seed() -> int:
    env = os.environ.get("SFC_SYM_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise SystemExit(f"SFC_SYM_SEED must be an integer, got {env!r}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sfc-sym",
        description="Partial vs full symmetry experiments for service function chains.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the scenario experiment and emit reports")
    run.add_argument("--repo", required=True, help="repository file")
    run.add_argument("--scenario", choices=("both", "partial", "full"), default="both")
    run.add_argument("--reps", type=int, default=20, help="repetitions per scenario")
    run.add_argument("--seed", type=int, default=None, help="base RNG seed (default: SFC_SYM_SEED or 0)")
    run.add_argument(
        "--sf-delay-us",
        type=float,
        default=None,
        help="override every SF's processing delay (microseconds)",
    )
    run.add_argument("--format", choices=("csv", "text"), default="csv")
    run.add_argument("--out", default="sfc-sym-report", help="output directory")
    run.add_argument(
        "--paper-scale",
        action="store_true",
        help=f"full-scale protocol: {PAPER_SCALE_BYTES} bytes, {PAPER_SCALE_REPS} repetitions",
    )
    run.add_argument("--trace", action="store_true", help="write per-event traces for one run per scenario")
    run.add_argument("--total-bytes", type=int, default=10 * 1024 * 1024)
    run.add_argument("--payload", type=int, default=1024)
    run.add_argument("--rate-bps", type=int, default=10**9)
    run.add_argument("--probes", type=int, default=100, help="RTT probes per repetition")
    run.add_argument("--jitter-ns", type=int, default=0, help="per-link uniform jitter bound")

    validate = sub.add_parser("validate", help="check a repository file against all invariants")
    validate.add_argument("--repo", required=True)

    intent = sub.add_parser("intent", help="run the intent pipeline and print the deployment command")
    intent.add_argument("--file", required=True, help="intent text file")
    intent.add_argument("--blueprints", required=True, help="blueprint catalog file")
    intent.add_argument("--repo", required=True, help="repository file")

    return parser


def _experiment_config(args) -> ExperimentConfig:
    return ExperimentConfig(
        repo_path=args.repo,
        scenario=args.scenario,
        repetitions=PAPER_SCALE_REPS if args.paper_scale else args.reps,
        rng_seed=_default_seed() if args.seed is None else args.seed,
        total_bytes=PAPER_SCALE_BYTES if args.paper_scale else args.total_bytes,
        payload_size=args.payload,
        offered_rate_bps=args.rate_bps,
        sf_delay_override_us=args.sf_delay_us,
        output_format=args.format,
        n_probes=args.probes,
        jitter_ns=args.jitter_ns,
    )


def _cmd_run(args) -> int:
    cfg = _experiment_config(args)
    print(f"backend: {ACTIVE_BACKEND}")
    report = run_experiment(cfg)
    written = emit_report(report, cfg.output_format, args.out)
    if args.trace:
        written.extend(_write_traces(cfg, args.out))
    for path in written:
        print(f"wrote {path}")
    _print_summary(report)
    return 2 if report.any_violation else 0


def _write_traces(cfg: ExperimentConfig, out_dir: str) -> list[Path]:
    repo = cfg.load_repository()
    out = []
    scenarios = (
        (Scenario.PARTIAL, Scenario.FULL)
        if cfg.scenario == "both"
        else (Scenario(cfg.scenario),)
    )
    for scenario in scenarios:
        sim_cfg = cfg.sim_config(seed=cfg.rng_seed, trace=True)
        sim = Simulation(repo, sim_cfg, scenario)
        sim.run_probes(1)
        probe_path = Path(out_dir) / f"trace_rtt_{scenario.value}.txt"
        probe_path.write_text(format_trace(sim.trace_events()))
        out.append(probe_path)
        sim = Simulation(repo, sim_cfg, scenario)
        sim.run_transfer()
        transfer_path = Path(out_dir) / f"trace_transfer_{scenario.value}.txt"
        transfer_path.write_text(format_trace(sim.trace_events()))
        out.append(transfer_path)
    return out


def _print_summary(report: Report):
    for scenario in ("partial", "full"):
        if scenario not in report.scenarios:
            continue
        result = report.scenarios[scenario]
        parts = []
        for metric in METRIC_NAMES:
            s = result.summaries[metric]
            parts.append(f"{metric}={s.mean:.6g}")
        print(f"{scenario}: " + " ".join(parts))
    for metric, status in report.orderings.items():
        print(f"ordering {metric}: {status} (delta {report.deltas[metric]:.6g})")


def _cmd_validate(args) -> int:
    path = Path(args.repo)
    try:
        repo = repository_parse(path.read_text())
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    violations = repository_validate(repo)
    if not violations:
        print(f"{path}: valid")
        return 0
    for v in violations:
        print(f"violation {v}")
    return 1


def _cmd_intent(args) -> int:
    intent_text = Path(args.file).read_text()
    intent = parse_intent(intent_text)
    with open(args.blueprints) as fh:
        catalog = load_blueprints(fh)
    with open(args.repo, "rb") as fh:
        repo = repository_load(fh)
    bp = map_intent_to_blueprint(intent, catalog)
    alloc = compute_resources(intent, bp)
    chain = compose_sfc_instance(bp, repo)
    cmd = build_deployment_command(intent, bp, alloc, chain, repo.sfs)
    print(f"blueprint: {bp.id}")
    print(cmd.dump(), end="")
    return 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("SFC_SYM_LOG", "WARNING"))
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "intent":
            return _cmd_intent(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    parser.error("no command")
    return 1


if __name__ == "__main__":
    sys.exit(main())
