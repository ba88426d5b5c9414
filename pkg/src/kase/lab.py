"""Attack demonstrations and statistical game runners.

Two attacks from the literature are mechanized here:

* ciphertext ratio: when every keyword of a document shares one encryption
  exponent t, dividing two c3 values cancels the blinding term, and the
  quotient can be checked against e(H(w)/H(w'), c1) for a guessed w;
* deterministic trapdoor: when Tr = k_agg * H(w), then
  Tr* * H(w') / Tr' = H(w*) recovers the hash of the challenge keyword.

The game runners replay the keyword-privacy and trapdoor-privacy games N
times and report the empirical advantage ``|wins/N - 1/2|`` next to a
3-sigma binomial band ``3 * sqrt(1/(4N))``. They falsify; they prove nothing.
"""

from __future__ import annotations

import math
import random
import string
from dataclasses import dataclass
from typing import Callable, Iterable

from . import backbone as bb
from . import first
from . import main_scheme as ms
from .backbone import G1, GT, GROUP
from .errors import OracleViolation, ParameterError
from .scheme import (
    AggregateKey,
    EncryptedKeyword,
    PublicParams,
    SecretKey,
    adjust_product,
    canonical_set,
    encrypt,
    encrypt_with,
    extract,
    keygen,
    set_product,
    setup,
)

KEYWORD_LENGTH = 8


# ---------------------------------------------------------------------------
# schemes under test

class FirstScheme:
    name = "first"

    def encrypt(self, params, sk, i, w, rng=None) -> EncryptedKeyword:
        return encrypt(params, sk, i, w, rng)

    def trapdoor(self, params, agg, docs, w, rng=None) -> tuple[G1, int | None]:
        """The trapdoor as seen by the searching server: (tr, server share or None)."""
        return first.trapdoor(params, agg, docs, w).tr, None


class MainScheme(FirstScheme):
    name = "main"

    def trapdoor(self, params, agg, docs, w, rng=None):
        bundle = ms.trapdoor_main(params, agg, docs, w, rng)
        return bundle.main_view


class WeakSharedRandomnessVariant(FirstScheme):
    """Single-server scheme whose Encrypt reuses one t for a whole document.

    The minimal change that reproduces the flawed precondition of earlier
    key-aggregate schemes; everything else is the first construction.
    """

    name = "weak"

    def __init__(self):
        self._t: dict[int, int] = {}

    def encrypt(self, params, sk, i, w, rng=None):
        t = self._t.get(i)
        if t is None:
            t = self._t[i] = bb.random_scalar(rng, nonzero=True)
        return encrypt_with(params, sk, i, bb.hash_keyword(w), t)


SCHEMES: dict[str, Callable[[], FirstScheme]] = {
    "first": FirstScheme,
    "main": MainScheme,
    "weak": WeakSharedRandomnessVariant,
}


def make_scheme(name: str) -> FirstScheme:
    try:
        return SCHEMES[name]()
    except KeyError:
        raise ParameterError(f"unknown scheme {name!r}; choose from {sorted(SCHEMES)}") from None


# ---------------------------------------------------------------------------
# attacks

def attack_ciphertext_ratio(
    challenge: EncryptedKeyword,
    known: EncryptedKeyword,
    w_known: str,
    candidates: Iterable[str],
) -> str | None:
    """Guess the keyword inside ``challenge`` from a known ciphertext of the same document.

    Returns the matching candidate, or None when nothing matches (including
    the degenerate case of two identical ciphertexts, whose ratio is 1).
    """
    ratio = bb.gt_div(challenge.c3, known.c3)
    if ratio == GROUP.gt_identity:
        return None
    h_known = bb.hash_keyword(w_known)
    for w in candidates:
        if bb.pair(bb.sub(bb.hash_keyword(w), h_known), known.c1) == ratio:
            return w
    return None


def attack_deterministic_trapdoor(
    tr_challenge: G1,
    tr_known: G1,
    w_known: str,
    candidates: Iterable[str],
) -> str | None:
    recovered = bb.sub(bb.add(tr_challenge, bb.hash_keyword(w_known)), tr_known)
    for w in candidates:
        if bb.hash_keyword(w) == recovered:
            return w
    return None


# ---------------------------------------------------------------------------
# game bookkeeping

@dataclass
class GameTranscript:
    game: str
    scheme: str
    adversary: str
    trials: int
    wins: int
    aborts: int = 0

    def __post_init__(self):
        if not 0 <= self.wins <= self.trials:
            raise ValueError("wins must lie in [0, trials]")

    @property
    def win_rate(self) -> float:
        return self.wins / self.trials

    @property
    def advantage(self) -> float:
        return abs(self.wins / self.trials - 0.5)

    @property
    def ci(self) -> float:
        return 3 * math.sqrt(0.25 / self.trials)

    @property
    def verdict(self) -> str:
        return "advantage" if self.advantage > self.ci else "no-advantage"

    def to_json(self) -> dict:
        return {
            "game": self.game,
            "scheme": self.scheme,
            "adversary": self.adversary,
            "N": self.trials,
            "wins": self.wins,
            "aborts": self.aborts,
            "advantage": self.advantage,
            "ci": self.ci,
            "verdict": self.verdict,
        }


def random_keyword(rng: random.Random, length: int = KEYWORD_LENGTH, exclude: Iterable[str] = ()) -> str:
    exclude = set(exclude)
    while True:
        w = "".join(rng.choice(string.ascii_lowercase) for _ in range(length))
        if w not in exclude:
            return w


# ---------------------------------------------------------------------------
# keyword privacy

class KeywordPrivacyOracles:
    """O_Extract (at most n-1 calls, never covering i*) and O_Encrypt."""

    def __init__(self, params: PublicParams, sk: SecretKey, scheme: FirstScheme, i_star: int, rng):
        self.params, self._sk, self._scheme, self.i_star, self._rng = params, sk, scheme, i_star, rng
        self.extract_budget = params.n - 1
        self.extract_calls = 0

    def extract(self, docs) -> AggregateKey:
        s = canonical_set(self.params, docs)
        if self.extract_calls >= self.extract_budget:
            raise OracleViolation(f"extract budget of {self.extract_budget} queries exhausted")
        if self.i_star in s:
            raise OracleViolation("extract query covers the challenge document")
        self.extract_calls += 1
        return extract(self.params, self._sk, s)

    def encrypt(self, i: int, w: str) -> EncryptedKeyword:
        return self._scheme.encrypt(self.params, self._sk, i, w, self._rng)


class KeywordPrivacyAdversary:
    name = "abstract"

    def __init__(self, rng: random.Random):
        self.rng = rng

    def declare_index(self, n: int) -> int:
        return self.rng.randint(1, n)

    def query(self, params: PublicParams, oracles: KeywordPrivacyOracles) -> None:
        pass

    def challenge_keyword(self) -> str:
        return random_keyword(self.rng)

    def guess(self, challenge: EncryptedKeyword) -> int:
        raise NotImplementedError


class RandomGuessKeywordAdversary(KeywordPrivacyAdversary):
    name = "random-guess"

    def guess(self, challenge):
        return self.rng.randrange(2)


class RatioAdversary(KeywordPrivacyAdversary):
    """Asks for one ciphertext of a different keyword at i*, then runs the ratio attack."""

    name = "ratio"

    def declare_index(self, n):
        self.i_star = super().declare_index(n)
        return self.i_star

    def query(self, params, oracles):
        self.w_star = random_keyword(self.rng)
        self.w_other = random_keyword(self.rng, exclude=[self.w_star])
        self.known = oracles.encrypt(self.i_star, self.w_other)

    def challenge_keyword(self):
        return self.w_star

    def guess(self, challenge):
        hit = attack_ciphertext_ratio(challenge, self.known, self.w_other, [self.w_star])
        return 0 if hit == self.w_star else 1


KEYWORD_ADVERSARIES = {"ratio": RatioAdversary, "random-guess": RandomGuessKeywordAdversary}


def run_keyword_privacy_game(
    scheme: str,
    n: int,
    trials: int,
    adversary: str | Callable[[random.Random], KeywordPrivacyAdversary] = "ratio",
    rng: random.Random | None = None,
) -> GameTranscript:
    rng = rng or random.Random()
    make_adv = KEYWORD_ADVERSARIES[adversary] if isinstance(adversary, str) else adversary
    wins = aborts = 0
    adv_name = "?"
    for _ in range(trials):
        adv = make_adv(rng)
        adv_name = adv.name
        sch = make_scheme(scheme)
        i_star = adv.declare_index(n)
        params = setup(n, rng)
        sk = keygen(params, rng)
        oracles = KeywordPrivacyOracles(params, sk, sch, i_star, rng)
        try:
            adv.query(params, oracles)
        except OracleViolation:
            aborts += 1
            continue
        w_star = adv.challenge_keyword()
        theta = rng.randrange(2)
        w_theta = w_star if theta == 0 else random_keyword(rng, len(w_star), exclude=[w_star])
        challenge = sch.encrypt(params, sk, i_star, w_theta, rng)
        wins += adv.guess(challenge) == theta
    return GameTranscript("keyword-privacy", scheme, adv_name, trials, wins, aborts)


# ---------------------------------------------------------------------------
# trapdoor privacy

class TrapdoorPrivacyOracles:
    """O_Trapdoor (at most n-|S*| calls) and O_Encrypt (w != w*, i not in S*)."""

    def __init__(self, params, sk, scheme, s_star, w_star, rng):
        self.params, self._sk, self._scheme, self._rng = params, sk, scheme, rng
        self.s_star, self.w_star = s_star, w_star
        self.trapdoor_budget = params.n - len(s_star)
        self.trapdoor_calls = 0

    def trapdoor(self, docs, w: str):
        s = canonical_set(self.params, docs)
        if self.trapdoor_calls >= self.trapdoor_budget:
            raise OracleViolation(f"trapdoor budget of {self.trapdoor_budget} queries exhausted")
        self.trapdoor_calls += 1
        agg = extract(self.params, self._sk, s)
        return self._scheme.trapdoor(self.params, agg, s, w, self._rng)

    def encrypt(self, i: int, w: str) -> EncryptedKeyword:
        if w == self.w_star or i in self.s_star:
            raise OracleViolation("encrypt query touches the challenge keyword or set")
        return self._scheme.encrypt(self.params, self._sk, i, w, self._rng)


class TrapdoorPrivacyAdversary:
    name = "abstract"

    def __init__(self, rng: random.Random):
        self.rng = rng

    def declare(self, n: int) -> tuple[tuple[int, ...], str]:
        size = self.rng.randint(1, max(1, n - 1))
        self.s_star = tuple(sorted(self.rng.sample(range(1, n + 1), size)))
        self.w_star = random_keyword(self.rng)
        return self.s_star, self.w_star

    def query(self, params, oracles: TrapdoorPrivacyOracles) -> None:
        pass

    def guess(self, challenge) -> int:
        raise NotImplementedError


class RandomGuessTrapdoorAdversary(TrapdoorPrivacyAdversary):
    name = "random-guess"

    def guess(self, challenge):
        return self.rng.randrange(2)


class ExtractionAdversary(TrapdoorPrivacyAdversary):
    """One trapdoor query for a fresh keyword, then (Tr* * H(w')) / Tr'."""

    name = "extraction"

    def query(self, params, oracles):
        self.w_other = random_keyword(self.rng, exclude=[self.w_star])
        self.known, _ = oracles.trapdoor(self.s_star, self.w_other)

    def guess(self, challenge):
        tr_challenge, _ = challenge
        hit = attack_deterministic_trapdoor(tr_challenge, self.known, self.w_other, [self.w_star])
        return 0 if hit == self.w_star else 1


TRAPDOOR_ADVERSARIES = {"extraction": ExtractionAdversary, "random-guess": RandomGuessTrapdoorAdversary}


def run_trapdoor_privacy_game(
    scheme: str,
    n: int,
    trials: int,
    adversary: str | Callable[[random.Random], TrapdoorPrivacyAdversary] = "extraction",
    rng: random.Random | None = None,
) -> GameTranscript:
    if n < 2:
        raise ParameterError("the trapdoor game needs n >= 2 so that a query budget exists")
    rng = rng or random.Random()
    make_adv = TRAPDOOR_ADVERSARIES[adversary] if isinstance(adversary, str) else adversary
    wins = aborts = 0
    adv_name = "?"
    for _ in range(trials):
        adv = make_adv(rng)
        adv_name = adv.name
        sch = make_scheme(scheme)
        s_star, w_star = adv.declare(n)
        params = setup(n, rng)
        sk = keygen(params, rng)
        s_star = canonical_set(params, s_star)
        oracles = TrapdoorPrivacyOracles(params, sk, sch, s_star, w_star, rng)
        try:
            adv.query(params, oracles)
        except OracleViolation:
            aborts += 1
            continue
        theta = rng.randrange(2)
        w_theta = w_star if theta == 0 else random_keyword(rng, len(w_star), exclude=[w_star])
        agg = extract(params, sk, s_star)
        challenge = sch.trapdoor(params, agg, s_star, w_theta, rng)
        wins += adv.guess(challenge) == theta
    return GameTranscript("trapdoor-privacy", scheme, adv_name, trials, wins, aborts)


# ---------------------------------------------------------------------------
# aggregate key unforgeability, operational form

def probe(scheme: str, params: PublicParams, agg: AggregateKey, claimed, i: int, w: str,
          c: EncryptedKeyword, rng=None) -> bool:
    """Run Trapdoor, Adjust and Test at document ``i`` with no scope check.

    Models a server that skips its authorization check, so the only thing
    standing between the key and document ``i`` is the algebra.
    """
    s = canonical_set(params, claimed)
    pub_i = adjust_product(params, i, s)
    if scheme == "main":
        bundle = ms.trapdoor_main(params, agg, s, w, rng)
        tr_i = bb.add(bundle.tr, bb.add(ms.f(bundle.r_main, pub_i), ms.f(bundle.r_aid, pub_i)))
        pub = set_product(params, s)
        return ms.test_main(params, tr_i, s, c,
                            ms.test_shares(params, s, c, bundle.r_main, pub),
                            ms.test_shares(params, s, c, bundle.r_aid, pub))
    td = first.trapdoor(params, agg, s, w)
    return first.test(params, bb.add(td.tr, pub_i), s, c)


@dataclass
class UnforgeabilityReport:
    scheme: str
    trials: int
    outside_false: int = 0
    relabel_false: int = 0
    combined_false: int = 0
    combined_trials: int = 0
    control_true: int = 0
    keyword_distribution: str = "uniform random 8-letter lowercase keywords"

    @property
    def passed(self) -> bool:
        return (
            self.outside_false == self.trials
            and self.relabel_false == self.trials
            and self.combined_false == self.combined_trials
            and self.control_true == self.trials
        )

    def to_json(self) -> dict:
        d = dict(self.__dict__)
        d["game"] = "aggregate-key-unforgeability"
        d["verdict"] = "holds" if self.passed else "violated"
        return d


def check_unforgeability_operational(
    scheme: str = "first",
    n: int | None = None,
    trials: int = 100,
    rng: random.Random | None = None,
) -> UnforgeabilityReport:
    """Keys for S must never search document i* outside S.

    Per trial: a key for S is used at i* directly (``outside``), under the
    claimed set S + {i*} (``relabel``), and as the product of two honest keys
    for a split of S claiming S1 + S2 + {i*} (``combined``). A key that does
    cover i* is the control.
    """
    if scheme not in ("first", "main"):
        raise ParameterError("unforgeability is checked for 'first' or 'main'")
    rng = rng or random.Random()
    report = UnforgeabilityReport(scheme, trials)
    for _ in range(trials):
        size = n if n is not None else rng.randint(2, 16)
        if size < 2:
            raise ParameterError("need n >= 2 to leave a document outside S")
        params = setup(size, rng)
        sk = keygen(params, rng)
        i_star = rng.randint(1, size)
        others = [j for j in range(1, size + 1) if j != i_star]
        s = sorted(rng.sample(others, rng.randint(1, len(others))))
        w = random_keyword(rng)
        c = encrypt(params, sk, i_star, w, rng)

        agg = extract(params, sk, s)
        report.outside_false += not probe(scheme, params, agg, s, i_star, w, c, rng)
        report.relabel_false += not probe(scheme, params, agg, s + [i_star], i_star, w, c, rng)
        if len(s) >= 2:
            cut = rng.randint(1, len(s) - 1)
            k = bb.add(extract(params, sk, s[:cut]).k, extract(params, sk, s[cut:]).k)
            report.combined_trials += 1
            report.combined_false += not probe(scheme, params, AggregateKey(k), s + [i_star], i_star, w, c, rng)

        agg_ok = extract(params, sk, s + [i_star])
        report.control_true += probe(scheme, params, agg_ok, s + [i_star], i_star, w, c, rng)
    return report
