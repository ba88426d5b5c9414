"""Public parameters, keys and the algorithms both constructions share.

Setup, KeyGen, Encrypt and Extract have identical algebra in the
single-server and the two-server construction; only Trapdoor, Adjust and
Test differ (see :mod:`kase.first` and :mod:`kase.main_scheme`).

Layout on the asymmetric curve: ciphertext component ``c1`` and the
per-set product ``pub`` live in H, everything aggregated (``c2``, aggregate
keys, trapdoors) lives in G.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

from . import backbone as bb
from .backbone import G1, G2, GT, GROUP, GroupSystem
from .errors import DocumentIndexError, ParameterError

MAX_DOCUMENTS = 1 << 16


@dataclass(frozen=True, eq=False)
class PublicParams:
    """Power sequence g^(alpha^i), h^(alpha^i) with the gap at index n+1.

    ``pub_g`` holds indexes 1..n and n+2..2n, ``pub_h`` holds 1..n. The
    exponent alpha is discarded by :func:`setup`; ``alpha`` is only kept when
    a test explicitly asks for it.
    """

    n: int
    pub_g: Mapping[int, G1]
    pub_h: Mapping[int, G2]
    hash_id: str = bb.HASH_ID
    group: GroupSystem = GROUP
    alpha: int | None = field(default=None, repr=False)

    def g(self, i: int) -> G1:
        if i == self.n + 1:
            raise ParameterError(f"g_{i} is the withheld gap element")
        try:
            return self.pub_g[i]
        except KeyError:
            raise DocumentIndexError(f"no public element g_{i} for n={self.n}") from None

    def h(self, i: int) -> G2:
        try:
            return self.pub_h[i]
        except KeyError:
            raise DocumentIndexError(f"no public element h_{i} for n={self.n}") from None

    @cached_property
    def gap_pairing(self) -> GT:
        """e(g_1, h_n), which equals e(g, h)^(alpha^(n+1))."""
        return bb.pair(self.g(1), self.h(self.n))

    @property
    def trusted_setup_warning(self) -> str:
        return (
            "whoever ran setup could have kept alpha, and g^(alpha^(n+1)) "
            "forges aggregate keys for every document set"
        )


@dataclass(frozen=True)
class SecretKey:
    beta: int = field(repr=False)

    @cached_property
    def g_beta(self) -> G1:
        return bb.smul(GROUP.g, self.beta)


@dataclass(frozen=True)
class EncryptedKeyword:
    c1: G2
    c2: G1
    c3: GT
    doc_index: int

    def to_bytes(self) -> bytes:
        return bb.encode_h(self.c1) + bb.encode_g(self.c2) + bb.encode_gt(self.c3)


@dataclass(frozen=True)
class AggregateKey:
    """One G element; the document set travels next to it, not inside."""

    k: G1

    def to_bytes(self) -> bytes:
        return bb.encode_g(self.k)


def check_document_count(n: int) -> int:
    if isinstance(n, bool) or not isinstance(n, int):
        raise ParameterError(f"n must be an int, got {n!r}")
    if not 1 <= n <= MAX_DOCUMENTS:
        raise ParameterError(f"n must lie in [1, {MAX_DOCUMENTS}], got {n}")
    return n


def check_doc_index(params: PublicParams, i: int) -> int:
    if isinstance(i, bool) or not isinstance(i, int):
        raise DocumentIndexError(f"document index must be an int, got {i!r}")
    if not 1 <= i <= params.n:
        raise DocumentIndexError(f"document index {i} outside [1, {params.n}]")
    return i


def canonical_set(params: PublicParams, docs: Iterable[int]) -> tuple[int, ...]:
    """Sorted, de-duplicated document set; empty or out-of-range sets raise."""
    s = tuple(sorted({check_doc_index(params, i) for i in docs}))
    if not s:
        raise ParameterError("document set must be nonempty")
    return s


def setup(n: int, rng: random.Random | None = None, *, keep_alpha: bool = False) -> PublicParams:
    check_document_count(n)
    alpha = bb.random_scalar(rng, nonzero=True)
    pub_g: dict[int, G1] = {}
    pub_h: dict[int, G2] = {}
    power = 1
    for i in range(1, 2 * n + 1):
        power = power * alpha % bb.ORDER
        if i != n + 1:
            pub_g[i] = bb.smul(GROUP.g, power)
        if i <= n:
            pub_h[i] = bb.smul(GROUP.h, power)
    params = PublicParams(n=n, pub_g=pub_g, pub_h=pub_h, alpha=alpha if keep_alpha else None)
    del alpha, power
    return params


def keygen(params: PublicParams, rng: random.Random | None = None) -> SecretKey:
    return SecretKey(bb.random_scalar(rng))


def encrypt_with(params: PublicParams, sk: SecretKey, i: int, hw: G1, t: int) -> EncryptedKeyword:
    """Encrypt a hashed keyword under explicit randomness ``t``.

    c1 = h^t, c2 = (g^beta * g_i)^t, c3 = (e(H(w), h) / e(g_1, h_n))^t.
    """
    check_doc_index(params, i)
    c1 = bb.smul(GROUP.h, t)
    c2 = bb.smul(bb.add(sk.g_beta, params.g(i)), t)
    c3 = bb.gt_pow(bb.gt_div(bb.pair(hw, GROUP.h), params.gap_pairing), t)
    return EncryptedKeyword(c1, c2, c3, i)


def encrypt(
    params: PublicParams,
    sk: SecretKey,
    i: int,
    w: str | bytes,
    rng: random.Random | None = None,
) -> EncryptedKeyword:
    check_doc_index(params, i)
    # t = 0 would make the ciphertext match every trapdoor
    t = bb.random_scalar(rng, nonzero=True)
    return encrypt_with(params, sk, i, bb.hash_keyword(w), t)


def extract(params: PublicParams, sk: SecretKey, docs: Iterable[int]) -> AggregateKey:
    """k_agg = prod_{j in S} g_{n+1-j}^beta, computed as one exponentiation."""
    s = canonical_set(params, docs)
    base = bb.product([params.g(params.n + 1 - j) for j in s], GROUP.g_identity)
    return AggregateKey(bb.smul(base, sk.beta))


def adjust_indexes(params: PublicParams, i: int, s: tuple[int, ...]) -> list[int]:
    """Indexes n+1-j+i for j in S, j != i. Never n+1 because j != i."""
    return [params.n + 1 - j + i for j in s if j != i]


def adjust_product(params: PublicParams, i: int, s: tuple[int, ...]) -> G1:
    """pub_i = prod_{j in S, j != i} g_{n+1-j+i}."""
    return bb.product([params.g(k) for k in adjust_indexes(params, i, s)], GROUP.g_identity)


def set_product(params: PublicParams, s: tuple[int, ...]) -> G2:
    """pub = prod_{j in S} h_{n+1-j}."""
    return bb.product([params.h(params.n + 1 - j) for j in s], GROUP.h_identity)
