import math
import random

import pytest
from hypothesis import given, strategies as st

from kase import first, lab
from kase.errors import OracleViolation, ParameterError
from kase.scheme import encrypt, extract, keygen, setup


@pytest.fixture
def kit(rng):
    params = setup(4, rng)
    return params, keygen(params, rng)


# ---------------------------------------------------------------------------
# attacks

def test_ratio_attack_recovers_keyword_on_shared_t(kit, rng):
    params, sk = kit
    weak = lab.WeakSharedRandomnessVariant()
    known = weak.encrypt(params, sk, 2, "known", rng)
    challenge = weak.encrypt(params, sk, 2, "secret", rng)
    assert known.c1 == challenge.c1
    assert lab.attack_ciphertext_ratio(challenge, known, "known", ["decoy", "secret"]) == "secret"


def test_ratio_attack_open_verdict_on_fresh_t(kit, rng):
    params, sk = kit
    known = encrypt(params, sk, 2, "known", rng)
    challenge = encrypt(params, sk, 2, "secret", rng)
    assert lab.attack_ciphertext_ratio(challenge, known, "known", ["decoy", "secret"]) is None


def test_ratio_attack_identical_ciphertexts(kit, rng):
    params, sk = kit
    c = encrypt(params, sk, 1, "same", rng)
    assert lab.attack_ciphertext_ratio(c, c, "same", ["same"]) is None


def test_weak_variant_t_is_per_document(kit, rng):
    params, sk = kit
    weak = lab.WeakSharedRandomnessVariant()
    a, b, c = (weak.encrypt(params, sk, i, w, rng) for i, w in [(1, "x"), (1, "y"), (2, "x")])
    assert a.c1 == b.c1 != c.c1


def test_deterministic_trapdoor_attack(kit):
    params, sk = kit
    agg = extract(params, sk, (1, 3))
    tr_known = first.trapdoor(params, agg, (1, 3), "known").tr
    tr_secret = first.trapdoor(params, agg, (1, 3), "secret").tr
    assert lab.attack_deterministic_trapdoor(tr_secret, tr_known, "known", ["a", "secret"]) == "secret"
    assert lab.attack_deterministic_trapdoor(tr_secret, tr_known, "known", ["a", "b"]) is None


def test_deterministic_trapdoor_attack_self_consistent(kit):
    params, sk = kit
    tr = first.trapdoor(params, extract(params, sk, (2,)), (2,), "w").tr
    assert lab.attack_deterministic_trapdoor(tr, tr, "w", ["w"]) == "w"


# ---------------------------------------------------------------------------
# transcripts

@given(n=st.integers(1, 10_000), data=st.data())
def test_advantage_and_radius_exact(n, data):
    wins = data.draw(st.integers(0, n))
    t = lab.GameTranscript("g", "s", "a", n, wins)
    assert t.advantage == abs(wins / n - 0.5)
    assert t.ci == 3 * math.sqrt(0.25 / n)
    assert t.verdict == ("advantage" if t.advantage > t.ci else "no-advantage")


def test_transcript_bounds():
    with pytest.raises(ValueError):
        lab.GameTranscript("g", "s", "a", 10, 11)
    with pytest.raises(ValueError):
        lab.GameTranscript("g", "s", "a", 10, -1)


def test_transcript_json_fields():
    report = lab.GameTranscript("keyword-privacy", "first", "ratio", 200, 100).to_json()
    assert {"game", "N", "wins", "advantage", "ci", "verdict"} <= set(report)


# ---------------------------------------------------------------------------
# oracle constraints

def test_extract_oracle_constraints(kit, rng):
    params, sk = kit
    oracles = lab.KeywordPrivacyOracles(params, sk, lab.FirstScheme(), 2, rng)
    with pytest.raises(OracleViolation):
        oracles.extract([1, 2])
    for _ in range(params.n - 1):
        oracles.extract([1])
    with pytest.raises(OracleViolation, match="budget"):
        oracles.extract([3])


def test_trapdoor_oracle_constraints(kit, rng):
    params, sk = kit
    oracles = lab.TrapdoorPrivacyOracles(params, sk, lab.FirstScheme(), (1, 2), "star", rng)
    with pytest.raises(OracleViolation):
        oracles.encrypt(3, "star")
    with pytest.raises(OracleViolation):
        oracles.encrypt(1, "other")
    oracles.encrypt(3, "other")
    for _ in range(params.n - 2):
        oracles.trapdoor((1, 2), "q")
    with pytest.raises(OracleViolation, match="budget"):
        oracles.trapdoor((1, 2), "q")


class GreedyExtractor(lab.KeywordPrivacyAdversary):
    name = "greedy"

    def query(self, params, oracles):
        oracles.extract(range(1, params.n + 1))

    def guess(self, challenge):
        return 0


class CheatingTrapdoorAdversary(lab.TrapdoorPrivacyAdversary):
    name = "cheater"

    def query(self, params, oracles):
        oracles.encrypt(self.s_star[0], "x")

    def guess(self, challenge):
        return 0


def test_violating_adversaries_abort():
    t = lab.run_keyword_privacy_game("first", 4, 5, GreedyExtractor, random.Random(1))
    assert (t.aborts, t.wins) == (5, 0)
    t = lab.run_trapdoor_privacy_game("first", 4, 5, CheatingTrapdoorAdversary, random.Random(1))
    assert (t.aborts, t.wins) == (5, 0)


# ---------------------------------------------------------------------------
# games (small N; the acceptance module runs N = 200)

def test_ratio_adversary_breaks_weak_variant():
    t = lab.run_keyword_privacy_game("weak", 3, 40, "ratio", random.Random(2))
    assert t.wins == 40 and t.verdict == "advantage"


@pytest.mark.parametrize("scheme", ["first", "main"])
def test_ratio_adversary_at_chance(scheme):
    t = lab.run_keyword_privacy_game(scheme, 3, 60, "ratio", random.Random(3))
    assert t.advantage <= t.ci


def test_extraction_adversary_breaks_first_only():
    t = lab.run_trapdoor_privacy_game("first", 3, 40, "extraction", random.Random(4))
    assert t.wins == 40
    t = lab.run_trapdoor_privacy_game("main", 3, 60, "extraction", random.Random(4))
    assert t.advantage <= t.ci


@pytest.mark.parametrize("game", [lab.run_keyword_privacy_game, lab.run_trapdoor_privacy_game])
def test_random_guess_at_chance(game):
    t = game("first", 3, 100, "random-guess", random.Random(5))
    assert t.advantage <= t.ci


@pytest.mark.parametrize("scheme", ["first", "main"])
def test_unforgeability_small(scheme):
    report = lab.check_unforgeability_operational(scheme, trials=8, rng=random.Random(6))
    assert report.passed
    assert report.control_true == 8
    assert report.to_json()["verdict"] == "holds"


def test_unknown_scheme():
    with pytest.raises(ParameterError):
        lab.make_scheme("fourth")
    with pytest.raises(ParameterError):
        lab.check_unforgeability_operational("weak", trials=1)
    with pytest.raises(ParameterError):
        lab.run_trapdoor_privacy_game("first", 1, 1)
