"""The shipped evaluation scenario: a three-forwarder line with one chain.

Client and server sit at opposite ends; the chain visits SF2, then SF1, then
SF3, so forward traffic zigzags across the line. Only SF3 (a stateful
firewall role) requires symmetry, which is what makes the partial-vs-full
comparison interesting: the reply path can skip two functions and two extra
link crossings.
"""

from __future__ import annotations

import json

from .model import Repository, repository_loads


def evaluation_document(
    sf_delay_us: float = 1000.0,
    link_delay_us: float = 100.0,
    capacity_bps: int | None = 10**9,
) -> dict:
    """Document tree for the default scenario repository."""
    return {
        "topology": {
            "sffs": [
                {"id": "sff1", "ports": [1, 2, 3, 4]},
                {"id": "sff2", "ports": [1, 2, 3, 4]},
                {"id": "sff3", "ports": [1, 2, 3, 4]},
            ],
            "endpoints": [
                {"id": "client", "mac": "02:00:00:00:01:01", "sff": "sff1", "port": 1, "ip": "10.0.0.1"},
                {"id": "server", "mac": "02:00:00:00:01:02", "sff": "sff3", "port": 2, "ip": "10.0.0.2"},
            ],
            "links": [
                {
                    "a": {"sff": "sff1", "port": 2},
                    "b": {"sff": "sff2", "port": 1},
                    "delay_us": link_delay_us,
                    "capacity_bps": capacity_bps,
                },
                {
                    "a": {"sff": "sff2", "port": 2},
                    "b": {"sff": "sff3", "port": 1},
                    "delay_us": link_delay_us,
                    "capacity_bps": capacity_bps,
                },
            ],
        },
        "sfs": [
            {
                "id": "SF1",
                "mac": "02:00:00:00:02:01",
                "sff": "sff1",
                "in_port": 3,
                "out_port": 4,
                "requires_symmetry": False,
                "processing_delay_us": sf_delay_us,
                "role": "spam-check",
            },
            {
                "id": "SF2",
                "mac": "02:00:00:00:02:02",
                "sff": "sff2",
                "in_port": 3,
                "out_port": 4,
                "requires_symmetry": False,
                "processing_delay_us": sf_delay_us,
                "role": "url-filter",
            },
            {
                "id": "SF3",
                "mac": "02:00:00:00:02:03",
                "sff": "sff3",
                "in_port": 3,
                "out_port": 4,
                "requires_symmetry": True,
                "processing_delay_us": sf_delay_us,
                "role": "stateful-firewall",
            },
        ],
        "chains": [{"sfc_id": 1, "sfs": ["SF2", "SF1", "SF3"]}],
        "flows": [
            {
                "src_ip": "10.0.0.1",
                "dst_ip": "10.0.0.2",
                "src_port": 5001,
                "dst_port": 5201,
                "protocol": "udp",
                "sfc_id": 1,
            },
            {
                "src_ip": "10.0.0.1",
                "dst_ip": "10.0.0.2",
                "src_port": 0,
                "dst_port": 0,
                "protocol": "icmp",
                "sfc_id": 1,
            },
        ],
    }


def evaluation_repository(**kwargs) -> Repository:
    return repository_loads(json.dumps(evaluation_document(**kwargs)))


def evaluation_blueprints() -> list[dict]:
    """Blueprint catalog whose first entry composes the evaluation chain."""
    return [
        {
            "id": "added-value-web",
            "sf_roles": [
                {"role": "url-filter", "requires_symmetry": False},
                {"role": "spam-check", "requires_symmetry": False},
                {"role": "stateful-firewall", "requires_symmetry": True},
            ],
            "max_latency_ms": 20.0,
            "min_bandwidth_bps": 10**9,
        },
        {
            "id": "bulk-transfer",
            "sf_roles": [{"role": "stateful-firewall", "requires_symmetry": True}],
            "max_latency_ms": 200.0,
            "min_bandwidth_bps": 10 * 10**9,
        },
    ]


def sample_intent_text() -> str:
    return (
        "Intent Label: added-value-service1\n"
        "Intent validity: 30 days\n"
        "SLA: Bandwidth:100000000;Latency: 50; Cost: 10;\n"
    )


def write_scenario_files(directory) -> list[str]:
    """Materialize the shipped scenario files; returns the paths written."""
    from pathlib import Path

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    repo_path = directory / "evaluation.json"
    repo_path.write_text(json.dumps(evaluation_document(), indent=2) + "\n")
    paths.append(str(repo_path))
    bp_path = directory / "blueprints.json"
    bp_path.write_text(json.dumps(evaluation_blueprints(), indent=2) + "\n")
    paths.append(str(bp_path))
    intent_path = directory / "sample-intent.txt"
    intent_path.write_text(sample_intent_text())
    paths.append(str(intent_path))
    return paths


if __name__ == "__main__":
    import sys

    target = sys.argv[1] if len(sys.argv) > 1 else "scenarios"
    for path in write_scenario_files(target):
        print(path)
