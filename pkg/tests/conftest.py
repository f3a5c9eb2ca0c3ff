import pytest

from sfcsym.scenario import evaluation_blueprints, evaluation_repository, sample_intent_text


@pytest.fixture(scope="session")
def eval_repo():
    return evaluation_repository()


@pytest.fixture(scope="session")
def zero_delay_repo():
    return evaluation_repository(sf_delay_us=0, link_delay_us=0, capacity_bps=None)


@pytest.fixture(scope="session")
def blueprints():
    from sfcsym.intent import Blueprint, RoleSpec

    out = []
    for entry in evaluation_blueprints():
        out.append(
            Blueprint(
                id=entry["id"],
                sf_roles=tuple(
                    RoleSpec(r["role"], r["requires_symmetry"]) for r in entry["sf_roles"]
                ),
                max_latency_ms=entry["max_latency_ms"],
                min_bandwidth_bps=entry["min_bandwidth_bps"],
            )
        )
    return tuple(out)


@pytest.fixture(scope="session")
def intent_text():
    return sample_intent_text()
