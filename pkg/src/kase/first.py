"""Single-server construction.

Trapdoors are ``k_agg * H(w)`` and therefore a deterministic function of
the keyword; this construction gives keyword privacy and aggregate key
unforgeability but not trapdoor privacy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from . import backbone as bb
from .backbone import G1, G2
from .errors import ScopeError
from .scheme import (
    AggregateKey,
    EncryptedKeyword,
    PublicParams,
    adjust_product,
    canonical_set,
    set_product,
)


@dataclass(frozen=True)
class TrapdoorFirst:
    tr: G1

    def to_bytes(self) -> bytes:
        return bb.encode_g(self.tr)


def trapdoor(params: PublicParams, agg: AggregateKey, docs: Iterable[int], w: str | bytes) -> TrapdoorFirst:
    canonical_set(params, docs)
    return TrapdoorFirst(bb.add(agg.k, bb.hash_keyword(w)))


def adjust(params: PublicParams, i: int, docs: Iterable[int], td: TrapdoorFirst) -> G1:
    """Tr_i = Tr * prod_{j in S, j != i} g_{n+1-j+i}."""
    s = canonical_set(params, docs)
    if i not in s:
        raise ScopeError(f"document {i} is not covered by the trapdoor's set")
    return bb.add(td.tr, adjust_product(params, i, s))


def test(
    params: PublicParams,
    tr_i: G1,
    docs: Iterable[int],
    c: EncryptedKeyword,
    pub: G2 | None = None,
) -> bool:
    """Check e(Tr_i, c1) / e(c2, pub) == c3.

    ``pub`` may be passed in when the caller memoizes it per document set.
    """
    if pub is None:
        pub = set_product(params, canonical_set(params, docs))
    lhs = bb.gt_div(bb.pair(tr_i, c.c1), bb.pair(c.c2, pub))
    return lhs == c.c3


test.__test__ = False  # keep pytest from collecting the scheme function
