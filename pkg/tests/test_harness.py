import random
import threading

import pytest

from kase import first
from kase import main_scheme as ms
from kase.errors import AidTimeout, AuditFailure, FormatError, ProtocolError, ScopeError
from kase.harness import (
    AidHalf,
    AuditSecrets,
    Deployment,
    IndexStore,
    MISCONFIGURATIONS,
    MainHalf,
    new_query_id,
    replicate,
    split_trapdoor,
    transcript_audit,
)
from kase.harness.messages import check_query_id, raise_for_error
from kase.scheme import encrypt, extract, keygen, setup

CORPUS = {1: ["apple", "pear"], 2: ["kiwi"], 3: ["apple", "fig", "kiwi"], 5: ["apple"], 6: ["plum"]}


@pytest.fixture(scope="module")
def world():
    r = random.Random(42)
    params = setup(6, r)
    sk = keygen(params, r)
    store = IndexStore(params)
    for i, words in CORPUS.items():
        store.upload(i, [encrypt(params, sk, i, w, r) for w in words])
    return params, sk, store


def plaintext_oracle(docs, w):
    return [i for i in sorted(set(docs)) if w in CORPUS.get(i, [])]


@pytest.mark.parametrize("transport", ["inproc", "socket"])
@pytest.mark.parametrize("w,docs", [("apple", (1, 2, 3, 4, 5, 6)), ("kiwi", (1, 3)), ("fig", (1, 2)),
                                    ("none", (1, 2, 3))])
def test_both_constructions_match_oracle(world, transport, w, docs):
    params, sk, store = world
    agg = extract(params, sk, docs)
    with Deployment(params, store, transport=transport) as dep:
        assert dep.search_first(first.trapdoor(params, agg, docs, w), docs) == plaintext_oracle(docs, w)
        assert dep.search_main(ms.trapdoor_main(params, agg, docs, w), docs) == plaintext_oracle(docs, w)


def test_transports_record_identical_transcripts(world):
    params, sk, store = world
    docs = (1, 3, 5)
    bundle = ms.trapdoor_main(params, extract(params, sk, docs), docs, "apple", random.Random(1))
    qid = new_query_id()
    payloads = {}
    for transport in ("inproc", "socket"):
        with Deployment(params, store, transport=transport) as dep:
            dep.search_main(bundle, docs, qid)
            payloads[transport] = [(e.src, e.dst, e.payload) for e in dep.transcript.entries]
    assert payloads["inproc"] == payloads["socket"]
    assert [(s, d, p["type"]) for s, d, p in payloads["inproc"]] == [
        ("user", "aid", "aid-half"),
        ("aid", "main", "aid-batch"),
        ("main", "aid", "ack"),
        ("aid", "user", "ack"),
        ("user", "main", "main-half"),
        ("main", "user", "response"),
    ]


def test_aid_never_sees_results(world):
    params, sk, store = world
    docs = (1, 3)
    with Deployment(params, store) as dep:
        dep.search_main(ms.trapdoor_main(params, extract(params, sk, docs), docs, "apple"), docs)
        to_aid = [e.payload for e in dep.transcript.entries if e.dst == "aid"]
    assert to_aid and all("docs" not in p for p in to_aid)


def test_replay_returns_same_answer(world):
    params, sk, store = world
    docs = (1, 3)
    bundle = ms.trapdoor_main(params, extract(params, sk, docs), docs, "apple")
    main_half, aid_half = split_trapdoor(bundle, docs)
    with Deployment(params, store) as dep:
        raise_for_error(dep.user_to_aid(aid_half.to_wire()))
        first_reply = dep.user_to_main(main_half.to_wire())
        # no second aid batch: the cached answer is served
        assert dep.user_to_main(main_half.to_wire()) == first_reply
    assert first_reply["docs"] == [1, 3]


def test_missing_aid_batch_times_out(world):
    params, sk, store = world
    docs = (1,)
    bundle = ms.trapdoor_main(params, extract(params, sk, docs), docs, "apple")
    main_half, _ = split_trapdoor(bundle, docs)
    with Deployment(params, store, timeout=0.2) as dep:
        reply = dep.user_to_main(main_half.to_wire())
    assert reply["type"] == "error" and reply["code"] == "timeout"
    with pytest.raises(AidTimeout):
        raise_for_error(reply)


def _drop_last_share(msg):
    if msg.get("type") == "aid-batch":
        msg = dict(msg, shares=msg["shares"][:-1])
    return msg


def _shift_set(msg):
    if msg.get("type") == "aid-batch":
        msg = dict(msg, S=msg["S"][:-1])
    return msg


@pytest.mark.parametrize("tamper", [_drop_last_share, _shift_set])
def test_tampered_batch_rejected(world, tamper):
    params, sk, store = world
    docs = (1, 3)
    bundle = ms.trapdoor_main(params, extract(params, sk, docs), docs, "apple")
    with Deployment(params, store, aid_tamper=tamper) as dep:
        with pytest.raises(ProtocolError):
            dep.search_main(bundle, docs)


def test_garbled_batch_is_format_error(world):
    params, sk, store = world
    docs = (1,)

    def garble(msg):
        if msg.get("type") == "aid-batch":
            share = dict(msg["shares"][0], c3="00" * 576)
            msg = dict(msg, shares=[share] + msg["shares"][1:])
        return msg

    bundle = ms.trapdoor_main(params, extract(params, sk, docs), docs, "apple")
    with Deployment(params, store, aid_tamper=garble) as dep:
        with pytest.raises(FormatError):
            dep.search_main(bundle, docs)


def test_mismatched_halves_rejected(world):
    params, sk, store = world
    docs = (1, 2)
    bundle = ms.trapdoor_main(params, extract(params, sk, docs), docs, "apple")
    main_half, aid_half = split_trapdoor(bundle, docs)
    from kase.harness import search_main
    with Deployment(params, store) as dep:
        with pytest.raises(ProtocolError):
            search_main(dep.user_to_main, dep.user_to_aid, main_half,
                        AidHalf(new_query_id(), aid_half.S, aid_half.r_aid))
        with pytest.raises(ProtocolError):
            search_main(dep.user_to_main, dep.user_to_aid, main_half,
                        AidHalf(aid_half.query_id, (1,), aid_half.r_aid))


def test_out_of_range_set_is_scope_error(world):
    params, sk, store = world
    td = first.trapdoor(params, extract(params, sk, (1,)), (1,), "apple")
    with Deployment(params, store) as dep:
        with pytest.raises(ScopeError):
            dep.search_first(td, (1, params.n + 1))


def test_unknown_message_type(world):
    params, _, store = world
    with Deployment(params, store) as dep:
        assert dep.user_to_aid({"type": "hello"})["code"] == "protocol"
        assert dep.user_to_main({"type": "main-half", "bogus": 1})["code"] == "format"


def test_concurrent_socket_searches(world):
    params, sk, store = world
    cases = [("apple", (1, 3, 5)), ("kiwi", (2, 3)), ("plum", (5, 6)), ("pear", (1, 2))] * 2
    results = {}
    with Deployment(params, store, transport="socket") as dep:
        def run(k, w, docs):
            bundle = ms.trapdoor_main(params, extract(params, sk, docs), docs, w)
            results[k] = dep.search_main(bundle, docs)

        threads = [threading.Thread(target=run, args=(k, w, d)) for k, (w, d) in enumerate(cases)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
    assert results == {k: plaintext_oracle(d, w) for k, (w, d) in enumerate(cases)}


def test_query_id_validation():
    assert check_query_id(new_query_id())
    with pytest.raises(FormatError):
        check_query_id("xyz")


# ---------------------------------------------------------------------------
# store

def test_snapshot_roundtrip(world, tmp_path):
    params, _, store = world
    path = tmp_path / "store.jsonl"
    store.save(path)
    loaded = IndexStore.load(path, params)
    assert loaded.digest() == store.digest()
    assert len(loaded) == sum(len(v) for v in CORPUS.values())
    assert loaded.doc_indexes() == sorted(CORPUS)


def test_snapshot_errors_name_the_line(world, tmp_path):
    params, _, store = world
    path = tmp_path / "store.jsonl"
    store.save(path)
    lines = path.read_text().splitlines()
    lines[2] = lines[2].replace('"c1": "', '"c1": "zz')
    path.write_text("\n".join(lines))
    with pytest.raises(FormatError, match="line 3.c1"):
        IndexStore.load(path, params)


def test_replicate_detects_divergence(world):
    params, sk, _ = world
    a, b = IndexStore(params), IndexStore(params)
    c = encrypt(params, sk, 1, "apple")
    digest = replicate([a, b], 1, [c])
    assert a.digest() == b.digest() == digest
    b.upload(2, [encrypt(params, sk, 2, "kiwi")])
    with pytest.raises(ProtocolError):
        replicate([a, b], 3, [encrypt(params, sk, 3, "fig")])


def test_separate_replicas(world):
    params, sk, store = world
    aid_store = IndexStore(params)
    for i in store.doc_indexes():
        aid_store.upload(i, store.slots(i))
    docs = (1, 3)
    with Deployment(params, store, aid_store) as dep:
        assert dep.search_main(ms.trapdoor_main(params, extract(params, sk, docs), docs, "kiwi"), docs) == [3]


# ---------------------------------------------------------------------------
# audit

def _honest_run(world, transport="inproc"):
    params, sk, store = world
    docs = (1, 3, 5)
    bundle = ms.trapdoor_main(params, extract(params, sk, docs), docs, "apple")
    with Deployment(params, store, transport=transport) as dep:
        dep.search_main(bundle, docs)
        return dep.transcript, AuditSecrets("main", bundle.r_main, bundle.r_aid, ["apple"])


@pytest.mark.parametrize("transport", ["inproc", "socket"])
def test_honest_run_audits_clean(world, transport):
    transcript, secrets = _honest_run(world, transport)
    report = transcript_audit(transcript, secrets)
    assert report.clean, report.to_json()
    assert report.messages_checked == 6
    report.raise_for_violations()


@pytest.mark.parametrize("kind,rule", [
    ("r_main_to_aid", "r_main-to-aid"),
    ("unsplit_r", "r-on-wire"),
    ("keyword_label", "plaintext-keyword"),
    ("r_aid_to_main", "r_aid-to-main"),
])
def test_misconfiguration_flagged(world, kind, rule):
    assert kind in MISCONFIGURATIONS
    params, sk, store = world
    docs = (1, 3, 5)
    bundle = ms.trapdoor_main(params, extract(params, sk, docs), docs, "apple")
    with Deployment(params, store) as dep:
        dep.search_main(bundle, docs, keyword="apple", misconfig=kind)
        report = transcript_audit(dep.transcript, AuditSecrets("main", bundle.r_main, bundle.r_aid, ["apple"]))
    assert rule in report.flagged_rules()
    with pytest.raises(AuditFailure):
        report.raise_for_violations()


def test_short_keywords_do_not_match_protocol_tags(world):
    params, sk, store = world
    docs = (1,)
    bundle = ms.trapdoor_main(params, extract(params, sk, docs), docs, "ack")
    with Deployment(params, store) as dep:
        dep.search_main(bundle, docs)
        report = transcript_audit(dep.transcript, AuditSecrets("main", bundle.r_main, bundle.r_aid, ["ack", "S"]))
    assert report.clean


def test_first_construction_audit_notes_linkability(world):
    params, sk, store = world
    td = first.trapdoor(params, extract(params, sk, (1,)), (1,), "apple")
    with Deployment(params, store) as dep:
        dep.search_first(td, (1,))
        report = transcript_audit(dep.transcript, AuditSecrets("first", keywords=["apple"]))
    assert report.clean and report.notes


def test_new_transcript_rewires_endpoints(world):
    params, sk, store = world
    docs = (1,)
    with Deployment(params, store) as dep:
        old = dep.transcript
        fresh = dep.new_transcript()
        dep.search_main(ms.trapdoor_main(params, extract(params, sk, docs), docs, "apple"), docs)
    assert len(old) == 0 and len(fresh) == 6


def test_main_half_wire_roundtrip(world):
    params, sk, _ = world
    bundle = ms.trapdoor_main(params, extract(params, sk, (1,)), (1,), "apple")
    main_half, aid_half = split_trapdoor(bundle, (1,))
    assert MainHalf.from_wire(main_half.to_wire()) == main_half
    assert AidHalf.from_wire(aid_half.to_wire()) == aid_half
