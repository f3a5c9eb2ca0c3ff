import json

import pytest

from sfcsym.cli import main
from sfcsym.scenario import evaluation_document, write_scenario_files


@pytest.fixture(scope="module")
def scenario_dir(tmp_path_factory):
    target = tmp_path_factory.mktemp("scenario")
    write_scenario_files(target)
    return target


def run_cli(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


SMALL_RUN = ["--reps", "2", "--total-bytes", "65536", "--probes", "3"]


def test_validate_ok(scenario_dir, capsys):
    code, out, _ = run_cli(["validate", "--repo", str(scenario_dir / "evaluation.json")], capsys)
    assert code == 0
    assert "valid" in out


def test_validate_reports_violations(tmp_path, capsys):
    doc = evaluation_document()
    doc["chains"][0]["sfs"].append("SF9")
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    code, out, _ = run_cli(["validate", "--repo", str(bad)], capsys)
    assert code == 1
    assert "unknown-sf" in out and "SF9" in out


def test_run_both_scenarios(scenario_dir, tmp_path, capsys):
    out_dir = tmp_path / "report"
    code, out, _ = run_cli(
        ["run", "--repo", str(scenario_dir / "evaluation.json"), "--out", str(out_dir), "--seed", "3"]
        + SMALL_RUN,
        capsys,
    )
    assert code == 0
    assert (out_dir / "report.csv").exists()
    assert "ordering rtt_ns: confirmed" in out
    assert "ordering completion_ns: confirmed" in out
    assert "ordering throughput_bps: confirmed" in out


def test_run_single_scenario_text_format(scenario_dir, tmp_path, capsys):
    out_dir = tmp_path / "single"
    code, out, _ = run_cli(
        [
            "run",
            "--repo",
            str(scenario_dir / "evaluation.json"),
            "--scenario",
            "partial",
            "--format",
            "text",
            "--out",
            str(out_dir),
        ]
        + SMALL_RUN,
        capsys,
    )
    assert code == 0
    assert (out_dir / "report.txt").exists()
    assert not (out_dir / "transfer_per_second_full.csv").exists()


def test_run_identical_seeds_identical_files(scenario_dir, tmp_path, capsys):
    args = ["run", "--repo", str(scenario_dir / "evaluation.json"), "--seed", "11"] + SMALL_RUN
    code_a, _, _ = run_cli(args + ["--out", str(tmp_path / "a")], capsys)
    code_b, _, _ = run_cli(args + ["--out", str(tmp_path / "b")], capsys)
    assert code_a == code_b == 0
    for name in sorted(p.name for p in (tmp_path / "a").iterdir()):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_seed_env_fallback(scenario_dir, tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SFC_SYM_SEED", "77")
    out_dir = tmp_path / "env"
    code, out, _ = run_cli(
        ["run", "--repo", str(scenario_dir / "evaluation.json"), "--out", str(out_dir), "--format", "text"]
        + SMALL_RUN,
        capsys,
    )
    assert code == 0
    assert "seed=77" in (out_dir / "report.txt").read_text()


def test_trace_flag_writes_traces(scenario_dir, tmp_path, capsys):
    out_dir = tmp_path / "traced"
    code, _, _ = run_cli(
        ["run", "--repo", str(scenario_dir / "evaluation.json"), "--out", str(out_dir), "--trace"]
        + SMALL_RUN,
        capsys,
    )
    assert code == 0
    trace = (out_dir / "trace_rtt_partial.txt").read_text()
    assert trace.splitlines()[0].endswith("inject,client,0")
    assert (out_dir / "trace_transfer_full.txt").exists()


def test_run_errors_exit_code_one(tmp_path, capsys):
    code, _, err = run_cli(["run", "--repo", str(tmp_path / "missing.json")], capsys)
    assert code == 1
    assert "error" in err


def test_paper_scale_flag_restores_full_protocol():
    from sfcsym.cli import _build_parser, _experiment_config

    parser = _build_parser()
    args = parser.parse_args(["run", "--repo", "r.json", "--paper-scale"])
    cfg = _experiment_config(args)
    assert cfg.total_bytes == 1024**3
    assert cfg.repetitions == 100
    assert cfg.payload_size == 1024
    desk = _experiment_config(parser.parse_args(["run", "--repo", "r.json"]))
    assert desk.total_bytes == 10 * 1024 * 1024
    assert desk.repetitions == 20


def test_intent_pipeline_command(scenario_dir, capsys):
    code, out, _ = run_cli(
        [
            "intent",
            "--file",
            str(scenario_dir / "sample-intent.txt"),
            "--blueprints",
            str(scenario_dir / "blueprints.json"),
            "--repo",
            str(scenario_dir / "evaluation.json"),
        ],
        capsys,
    )
    assert code == 0
    assert "blueprint: added-value-web" in out
    assert "chain=SF2,SF1,SF3" in out
    assert "sf SF3 role=stateful-firewall requires_symmetry=True" in out
