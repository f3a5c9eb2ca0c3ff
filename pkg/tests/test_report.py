import pytest

from sfcsym.experiment import ExperimentConfig, run_experiment
from sfcsym.report import emit_report, parse_summary_csv, render_summary_csv


@pytest.fixture(scope="module")
def small_report(eval_repo):
    cfg = ExperimentConfig(
        repository=eval_repo,
        repetitions=2,
        total_bytes=64 * 1024,
        n_probes=3,
        rng_seed=5,
    )
    return run_experiment(cfg)


def test_summary_csv_shape(small_report):
    lines = render_summary_csv(small_report).splitlines()
    assert lines[0] == "scenario,metric,mean,std,ci_lo,ci_hi,n"
    assert len(lines) == 1 + 2 * 3  # two scenarios, three metrics
    assert lines[1].startswith("partial,rtt_ns,")
    assert lines[4].startswith("full,rtt_ns,")


def test_emit_and_parse_round_trip(small_report, tmp_path):
    written = emit_report(small_report, "csv", tmp_path)
    rows = parse_summary_csv(tmp_path / "report.csv")
    for row in rows:
        summary = small_report.scenarios[row["scenario"]].summaries[row["metric"]]
        assert row["mean"] == summary.mean
        assert row["std"] == summary.std
        assert row["ci_lo"] == summary.ci_lo
        assert row["ci_hi"] == summary.ci_hi
        assert row["n"] == summary.n
    names = {p.name for p in written}
    assert names == {
        "report.csv",
        "transfer_per_second_partial.csv",
        "throughput_per_second_partial.csv",
        "transfer_per_second_full.csv",
        "throughput_per_second_full.csv",
        "sf_packet_counts.csv",
    }


def test_emit_text_format(small_report, tmp_path):
    emit_report(small_report, "text", tmp_path)
    text = (tmp_path / "report.txt").read_text()
    assert "[partial]" in text and "[full]" in text
    assert "[orderings]" in text


def test_emission_is_deterministic(small_report, tmp_path):
    emit_report(small_report, "csv", tmp_path / "a")
    emit_report(small_report, "csv", tmp_path / "b")
    for name in ("report.csv", "sf_packet_counts.csv", "transfer_per_second_full.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_report_without_rtt_rejected(small_report, tmp_path):
    from dataclasses import replace

    broken_scenarios = {}
    for name, result in small_report.scenarios.items():
        summaries = dict(result.summaries)
        summaries["rtt_ns"] = replace(summaries["rtt_ns"], n=0)
        broken_scenarios[name] = replace(result, summaries=summaries)
    broken = replace(small_report, scenarios=broken_scenarios)
    with pytest.raises(ValueError, match="RTT"):
        emit_report(broken, "csv", tmp_path)


def test_ci_brackets_mean_in_report(small_report):
    for result in small_report.scenarios.values():
        for summary in result.summaries.values():
            assert summary.ci_lo <= summary.mean <= summary.ci_hi
            if summary.std == 0:
                assert summary.ci_lo == summary.mean == summary.ci_hi


def test_orderings_and_deltas(small_report):
    assert small_report.deltas["rtt_ns"] < 0
    assert small_report.deltas["completion_ns"] < 0
    assert small_report.deltas["throughput_bps"] > 0
    assert small_report.orderings == {
        "rtt_ns": "confirmed",
        "completion_ns": "confirmed",
        "throughput_bps": "confirmed",
    }
    assert small_report.expected_strict is True


def test_zero_delay_experiment_reports_ties(zero_delay_repo):
    cfg = ExperimentConfig(
        repository=zero_delay_repo,
        repetitions=1,
        total_bytes=32 * 1024,
        n_probes=2,
    )
    report = run_experiment(cfg)
    assert report.expected_strict is False
    assert set(report.orderings.values()) == {"tied"}
    assert all(d == 0 for d in report.deltas.values())
    assert report.any_violation is False
