"""Two-server construction with a secret-shared trapdoor blinding scalar.

The user blinds the trapdoor as ``(k_agg * H(w))^r`` and splits
``r = r_main + r_aid``. Each server raises the values it can compute on its
own (``pub_i``, ``e(c2, pub)``, ``c3``) to its share; the aid server ships
its exponentiated values to the main server, which multiplies the halves
together and evaluates the test equation without ever learning ``r``.

Functions here are per-party building blocks. The message flow between
the parties lives in :mod:`kase.harness`.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable

from . import backbone as bb
from .backbone import G1, G2, GT
from .errors import ParameterError, ScopeError
from .scheme import (
    AggregateKey,
    EncryptedKeyword,
    PublicParams,
    adjust_product,
    canonical_set,
    set_product,
)


@dataclass(frozen=True)
class TrapdoorBundle:
    tr: G1
    r_main: int
    r_aid: int

    @property
    def main_view(self) -> tuple[G1, int]:
        return self.tr, self.r_main

    @property
    def aid_view(self) -> int:
        return self.r_aid

    def to_bytes(self) -> bytes:
        return bb.encode_g(self.tr) + bb.encode_scalar(self.r_main) + bb.encode_scalar(self.r_aid)


@dataclass(frozen=True)
class MainShareMsg:
    """Aid-side exponentiations for one (document, keyword slot) pair."""

    doc_index: int
    slot: int
    pub_i: G1
    c2: GT
    c3: GT


def f(x: int, a: G1) -> G1:
    """a^x in G."""
    return bb.smul(a, x)


def f_t(x: int, b: GT) -> GT:
    """b^x in GT."""
    return bb.gt_pow(b, x)


def trapdoor_main(
    params: PublicParams,
    agg: AggregateKey,
    docs: Iterable[int],
    w: str | bytes,
    rng: random.Random | None = None,
    *,
    r: int | None = None,
) -> TrapdoorBundle:
    """Blinded trapdoor plus additive shares of the blinding scalar.

    ``r`` can be pinned by tests that need it as an oracle; zero is refused
    because it makes Test accept every keyword.
    """
    canonical_set(params, docs)
    if r is None:
        r = bb.random_scalar(rng, nonzero=True)
    elif r % bb.ORDER == 0:
        raise ParameterError("blinding scalar r must be nonzero")
    r_main, r_aid = bb.scalar_split(r, rng)
    while r_main == 0 or r_aid == 0:
        r_main, r_aid = bb.scalar_split(r, rng)
    tr = bb.smul(bb.add(agg.k, bb.hash_keyword(w)), r)
    return TrapdoorBundle(tr, r_main, r_aid)


def adjust_share(params: PublicParams, i: int, docs: Iterable[int], r_share: int) -> G1:
    """f(r_share, pub_i), computed by either server on its own."""
    s = canonical_set(params, docs)
    if i not in s:
        raise ScopeError(f"document {i} is not covered by the trapdoor's set")
    return f(r_share, adjust_product(params, i, s))


def adjust_main(
    params: PublicParams,
    i: int,
    docs: Iterable[int],
    tr: G1,
    share_main: G1,
    share_aid: G1,
) -> G1:
    """Tr_i = Tr * pub_i^r_main * pub_i^r_aid = (k_agg * H(w) * pub_i)^r."""
    s = canonical_set(params, docs)
    if i not in s:
        raise ScopeError(f"document {i} is not covered by the trapdoor's set")
    return bb.add(tr, bb.add(share_main, share_aid))


def test_shares(
    params: PublicParams,
    docs: Iterable[int],
    c: EncryptedKeyword,
    r_share: int,
    pub: G2 | None = None,
) -> tuple[GT, GT]:
    """(e(c2, pub)^r_share, c3^r_share), computed by either server."""
    if pub is None:
        pub = set_product(params, canonical_set(params, docs))
    c2_sharp = bb.pair(c.c2, pub)
    return f_t(r_share, c2_sharp), f_t(r_share, c.c3)


def test_main(
    params: PublicParams,
    tr_i: G1,
    docs: Iterable[int],
    c: EncryptedKeyword,
    main_shares: tuple[GT, GT],
    aid_shares: tuple[GT, GT],
) -> bool:
    """Recombine the halves and check e(Tr_i, c1) / e(c2, pub)^r == c3^r."""
    c2_r = bb.gt_mul(main_shares[0], aid_shares[0])
    c3_r = bb.gt_mul(main_shares[1], aid_shares[1])
    return bb.gt_div(bb.pair(tr_i, c.c1), c2_r) == c3_r


test_main.__test__ = False
test_shares.__test__ = False


def search_document(
    params: PublicParams,
    bundle: TrapdoorBundle,
    i: int,
    docs: Iterable[int],
    c: EncryptedKeyword,
) -> bool:
    """Both parties' work for one ciphertext, run in one process.

    Convenience for tests and benchmarks; a deployment splits these calls
    across the two servers.
    """
    s = canonical_set(params, docs)
    share_aid = adjust_share(params, i, s, bundle.r_aid)
    share_main = adjust_share(params, i, s, bundle.r_main)
    tr_i = adjust_main(params, i, s, bundle.tr, share_main, share_aid)
    aid = test_shares(params, s, c, bundle.r_aid)
    main = test_shares(params, s, c, bundle.r_main)
    return test_main(params, tr_i, s, c, main, aid)
