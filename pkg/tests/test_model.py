import io
import json

import pytest

from sfcsym.model import (
    Direction,
    FlowSpec,
    MacAddress,
    Protocol,
    RepositoryIntegrityError,
    RepositoryParseError,
    UnknownSfcIdError,
    lookup_chain,
    match_flow,
    repository_dump,
    repository_dumps,
    repository_load,
    repository_loads,
    repository_validate,
)
from sfcsym.scenario import evaluation_document


def test_mac_canonical_forms():
    assert MacAddress("AA:BB:cc:dd:EE:ff") == "aa:bb:cc:dd:ee:ff"
    assert MacAddress("aa-bb-cc-dd-ee-ff") == "aa:bb:cc:dd:ee:ff"
    assert MacAddress("02:00:00:00:01:01").as_int == 0x020000000101
    assert MacAddress.from_int(0x020000000101) == "02:00:00:00:01:01"


@pytest.mark.parametrize("bad", ["", "aa:bb:cc:dd:ee", "aa:bb:cc:dd:ee:gg", "aabbccddeeff", "aa:bb:cc:dd:ee:ff:00"])
def test_mac_rejects_malformed(bad):
    with pytest.raises(ValueError):
        MacAddress(bad)


def test_load_evaluation_repository(eval_repo):
    assert set(eval_repo.chains) == {1}
    assert eval_repo.chains[1].sf_sequence == ("SF2", "SF1", "SF3")
    assert len(eval_repo.sfs) == 3
    assert eval_repo.sfs["SF3"].requires_symmetry is True
    assert eval_repo.sfs["SF1"].requires_symmetry is False
    assert repository_validate(eval_repo) == []


def test_empty_document_gives_empty_repository():
    repo = repository_loads("{}")
    assert repo.chains == {}
    assert repo.flows == ()
    assert repo.topology.sffs == ()
    assert repository_loads("") .chains == {}


def test_dangling_sf_reference_is_named():
    doc = evaluation_document()
    doc["chains"][0]["sfs"].append("SF9")
    with pytest.raises(RepositoryIntegrityError) as exc:
        repository_loads(json.dumps(doc))
    assert any(v.rule == "unknown-sf" and v.subject == "SF9" for v in exc.value.violations)


def test_parse_error_carries_position():
    with pytest.raises(RepositoryParseError) as exc:
        repository_loads('{"topology": \n  nope}')
    assert exc.value.line == 2


def test_duplicate_sf_id_rejected():
    doc = evaluation_document()
    doc["sfs"].append(dict(doc["sfs"][0]))
    with pytest.raises(RepositoryIntegrityError) as exc:
        repository_loads(json.dumps(doc))
    assert any(v.rule == "duplicate-id" for v in exc.value.violations)


def test_duplicate_mac_violation():
    doc = evaluation_document()
    doc["sfs"][1]["mac"] = doc["sfs"][0]["mac"]
    with pytest.raises(RepositoryIntegrityError) as exc:
        repository_loads(json.dumps(doc))
    rules = [v.rule for v in exc.value.violations]
    assert rules.count("duplicate-mac") == 1


def test_duplicate_sf_in_chain_violation():
    # Fixture: the same SF appears twice in one chain. The independent check
    # is a plain duplicate scan over the sequence.
    doc = evaluation_document()
    doc["chains"][0]["sfs"] = ["SF2", "SF1", "SF2"]
    seq = doc["chains"][0]["sfs"]
    dup_oracle = len(seq) - len(set(seq))
    assert dup_oracle == 1
    from sfcsym.model import repository_parse

    repo = repository_parse(json.dumps(doc))
    violations = [v for v in repository_validate(repo) if v.rule == "duplicate-sf-in-chain"]
    assert len(violations) == dup_oracle
    assert violations[0].subject == "SF2"


def test_disconnected_topology_violation():
    doc = evaluation_document()
    doc["topology"]["links"].pop()  # orphan sff3
    from sfcsym.model import repository_parse

    repo = repository_parse(json.dumps(doc))
    assert any(v.rule == "sff-graph-disconnected" for v in repository_validate(repo))


def test_port_conflict_detected():
    doc = evaluation_document()
    doc["sfs"][0]["in_port"] = 1  # collides with the client endpoint
    from sfcsym.model import repository_parse

    repo = repository_parse(json.dumps(doc))
    assert any(v.rule == "port-conflict" for v in repository_validate(repo))


def test_round_trip_stability(eval_repo):
    text = repository_dumps(eval_repo)
    again = repository_loads(text)
    assert again == eval_repo
    assert repository_dump(again) == repository_dump(eval_repo)


def test_load_enforces_validation(eval_repo):
    # Anything repository_load accepts must already be violation-free.
    stream = io.BytesIO(repository_dumps(eval_repo).encode())
    assert repository_validate(repository_load(stream)) == []


def test_lookup_chain(eval_repo):
    assert lookup_chain(eval_repo, 1).sf_sequence == ("SF2", "SF1", "SF3")
    with pytest.raises(UnknownSfcIdError):
        lookup_chain(eval_repo, 99)
    removed = eval_repo.without_chain(1)
    with pytest.raises(UnknownSfcIdError):
        lookup_chain(removed, 1)


def test_flow_reverse_involution():
    import random

    rng = random.Random(7)
    for _ in range(50):
        flow = FlowSpec(
            src_ip=f"10.0.{rng.randrange(256)}.{rng.randrange(256)}",
            dst_ip=f"10.1.{rng.randrange(256)}.{rng.randrange(256)}",
            src_port=rng.randrange(65536),
            dst_port=rng.randrange(65536),
            protocol=rng.choice(list(Protocol)),
            sfc_id=rng.randrange(1, 255),
        )
        assert flow.reverse().reverse() == flow
        assert flow.reverse().sfc_id == flow.sfc_id


def test_match_flow_directions(eval_repo):
    flow = eval_repo.flows[0]
    assert match_flow(eval_repo, flow.five_tuple) == (flow, Direction.FORWARD)
    assert match_flow(eval_repo, flow.five_tuple.swapped()) == (flow, Direction.REVERSE)
    stranger = flow.five_tuple._replace(src_port=9999)
    assert match_flow(eval_repo, stranger) is None
