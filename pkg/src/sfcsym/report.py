"""Report emission: summary table plus plot-ready per-second series files.

All output is deterministic: fixed row/column order and shortest round-trip
float formatting, so identical experiments produce byte-identical files.
"""

from __future__ import annotations

import csv
from pathlib import Path

from .experiment import METRIC_NAMES, Report

SUMMARY_COLUMNS = ("scenario", "metric", "mean", "std", "ci_lo", "ci_hi", "n")
SCENARIO_ORDER = ("partial", "full")


def _fmt(value: float) -> str:
    return repr(float(value))


def _ordered_scenarios(report: Report) -> list[str]:
    return [s for s in SCENARIO_ORDER if s in report.scenarios]


def _check(report: Report):
    for name, result in report.scenarios.items():
        if result.summaries["rtt_ns"].n == 0:
            raise ValueError(f"report for scenario {name!r} lacks RTT samples")


def render_summary_csv(report: Report) -> str:
    lines = [",".join(SUMMARY_COLUMNS)]
    for scenario in _ordered_scenarios(report):
        result = report.scenarios[scenario]
        for metric in METRIC_NAMES:
            s = result.summaries[metric]
            lines.append(
                ",".join(
                    (scenario, metric, _fmt(s.mean), _fmt(s.std), _fmt(s.ci_lo), _fmt(s.ci_hi), str(s.n))
                )
            )
    return "\n".join(lines) + "\n"


def render_summary_text(report: Report) -> str:
    out = []
    out.append(f"repetitions={report.repetitions} confidence={report.confidence_level} seed={report.rng_seed}")
    for scenario in _ordered_scenarios(report):
        result = report.scenarios[scenario]
        out.append(f"[{scenario}]")
        for metric in METRIC_NAMES:
            s = result.summaries[metric]
            out.append(
                f"  {metric}: mean={_fmt(s.mean)} std={_fmt(s.std)} "
                f"ci=[{_fmt(s.ci_lo)}, {_fmt(s.ci_hi)}] n={s.n}"
            )
        counts = " ".join(f"{k}={result.sf_packet_counts[k]}" for k in sorted(result.sf_packet_counts))
        out.append(f"  sf_packet_counts: {counts}")
    if report.deltas:
        out.append("[deltas partial-full]")
        for metric in METRIC_NAMES:
            out.append(f"  {metric}: {_fmt(report.deltas[metric])}")
        out.append("[orderings]")
        for metric in METRIC_NAMES:
            out.append(f"  {metric}: {report.orderings[metric]}")
        out.append(f"  strict_expected: {report.expected_strict}")
    return "\n".join(out) + "\n"


def _write_series(path: Path, header: str, series: tuple[float, ...]):
    lines = [f"second,{header}"]
    for second, value in enumerate(series):
        lines.append(f"{second},{_fmt(value)}")
    path.write_text("\n".join(lines) + "\n")


def emit_report(report: Report, output_format: str, out_dir: str | Path) -> list[Path]:
    """Write the summary plus series and per-SF count files; returns the
    paths written, in a stable order."""
    _check(report)
    if output_format not in ("csv", "text"):
        raise ValueError(f"unknown output format {output_format!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    if output_format == "csv":
        summary = out_dir / "report.csv"
        summary.write_text(render_summary_csv(report))
    else:
        summary = out_dir / "report.txt"
        summary.write_text(render_summary_text(report))
    written.append(summary)

    for scenario in _ordered_scenarios(report):
        result = report.scenarios[scenario]
        transfer = out_dir / f"transfer_per_second_{scenario}.csv"
        _write_series(transfer, "bytes", result.transfer_series_mean)
        written.append(transfer)
        throughput = out_dir / f"throughput_per_second_{scenario}.csv"
        _write_series(throughput, "bits_per_second", result.throughput_series_mean)
        written.append(throughput)

    counts_path = out_dir / "sf_packet_counts.csv"
    lines = ["scenario,sf_id,packets"]
    for scenario in _ordered_scenarios(report):
        result = report.scenarios[scenario]
        for sf_id in sorted(result.sf_packet_counts):
            lines.append(f"{scenario},{sf_id},{result.sf_packet_counts[sf_id]}")
    counts_path.write_text("\n".join(lines) + "\n")
    written.append(counts_path)
    return written


def parse_summary_csv(path: str | Path) -> list[dict]:
    """Read back a summary CSV with full numeric precision."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for row in rows:
        for key in ("mean", "std", "ci_lo", "ci_hi"):
            row[key] = float(row[key])
        row["n"] = int(row["n"])
    return rows
