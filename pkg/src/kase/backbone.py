"""Asymmetric bilinear group system on BLS12-381.

Group arithmetic and pairings are delegated to mcl (through ``pymcl``);
hashing to G uses the IETF ``BLS12381G1_XMD:SHA-256_SSWU_RO_`` suite
(through ``blspy``) under the domain-separation tag :data:`HASH_DST`.

Notation: G is mcl's G1, H is G2, GT is the pairing target group. All
group laws are written multiplicatively in docstrings, but mcl exposes G
and H additively, so ``add`` is the group operation and ``smul`` is
exponentiation.

Scalars are plain Python ints reduced modulo :data:`ORDER`.

Every arithmetic helper in this module reports itself to the active
:func:`counting` contexts, which is how the cost-model checks count
pairings, exponentiations and additions without touching the schemes.
"""

from __future__ import annotations

import contextvars
import random
import secrets
import unicodedata
from contextlib import contextmanager
from dataclasses import dataclass, fields
from functools import cached_property

import blspy
import pymcl
from pymcl import G1, G2, GT, Fr

from .errors import FormatError, ParameterError

__all__ = [
    "CURVE_ID", "SECURITY_BITS", "ORDER", "FIELD_MODULUS", "HASH_DST", "HASH_ID",
    "ENCODING", "GroupSystem", "GROUP", "G1", "G2", "GT",
    "OpCounts", "counting",
    "random_scalar", "scalar_split", "scalar_inv",
    "smul", "add", "sub", "neg", "product", "pair", "gt_mul", "gt_div", "gt_pow",
    "hash_to_g", "keyword_bytes", "hash_keyword",
    "encode_scalar", "decode_scalar", "encode_g", "decode_g",
    "encode_h", "decode_h", "encode_gt", "decode_gt",
    "is_gt_member",
]

CURVE_ID = "BLS12-381"
SECURITY_BITS = 128
ORDER: int = pymcl.r
FIELD_MODULUS = int(
    "1a0111ea397fe69a4b1ba7b6434bacd764774b84f38512bf6730d2a0f6b0f624"
    "1eabfffeb153ffffb9feffffffffaaab",
    16,
)
HASH_DST = b"KASE:H:v1"
HASH_ID = "BLS12381G1_XMD:SHA-256_SSWU_RO_/" + HASH_DST.decode()

# Byte widths of the wire encodings. Points and GT use mcl's native compressed
# little-endian layout; scalars are big-endian.
ENCODING = {
    "id": "mcl-bls12-381/v1",
    "scalar": 32,
    "G": 48,
    "H": 96,
    "GT": 576,
}

_SYSTEM_RNG = secrets.SystemRandom()


@dataclass(frozen=True, eq=False)
class GroupSystem:
    """The tuple (p, G, H, GT, e) with fixed generators."""

    order: int
    g: G1
    h: G2
    curve: str = CURVE_ID
    security_bits: int = SECURITY_BITS

    @cached_property
    def gt(self) -> GT:
        return pymcl.pairing(self.g, self.h)

    @property
    def g_identity(self) -> G1:
        return G1()

    @property
    def h_identity(self) -> G2:
        return G2()

    @property
    def gt_identity(self) -> GT:
        return GT()


GROUP = GroupSystem(order=ORDER, g=pymcl.g1, h=pymcl.g2)


# ---------------------------------------------------------------------------
# operation counters

@dataclass
class OpCounts:
    """Operation tallies, one field per primitive-operation cost symbol.

    ``hash`` is T_h, ``smul`` T_sm (in G or H), ``add`` T_a (in G or H),
    ``pair`` T_p, ``gt_mul`` T_mul (division included), ``gt_exp`` T_exp.
    """

    hash: int = 0
    smul: int = 0
    add: int = 0
    pair: int = 0
    gt_mul: int = 0
    gt_exp: int = 0

    def as_dict(self) -> dict[str, int]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def __add__(self, other: OpCounts) -> OpCounts:
        return OpCounts(**{k: v + getattr(other, k) for k, v in self.as_dict().items()})


_ACTIVE: contextvars.ContextVar[tuple[OpCounts, ...]] = contextvars.ContextVar(
    "kase_op_counters", default=()
)


@contextmanager
def counting():
    """Count group operations performed in this context (nesting allowed)."""
    counts = OpCounts()
    token = _ACTIVE.set(_ACTIVE.get() + (counts,))
    try:
        yield counts
    finally:
        _ACTIVE.reset(token)


def _tick(name: str) -> None:
    active = _ACTIVE.get()
    if active:
        for counts in active:
            setattr(counts, name, getattr(counts, name) + 1)


# ---------------------------------------------------------------------------
# scalars

def random_scalar(rng: random.Random | None = None, *, nonzero: bool = False) -> int:
    """Uniform element of Z_p (or Z_p^* with ``nonzero``).

    ``rng`` defaults to the OS CSPRNG. Passing a seeded ``random.Random`` makes
    runs reproducible and is meant for tests and oracles only.
    """
    rng = rng or _SYSTEM_RNG
    return rng.randrange(1 if nonzero else 0, ORDER)


def scalar_split(r: int, rng: random.Random | None = None) -> tuple[int, int]:
    """Two-party additive sharing: ``r_main`` uniform, ``r_aid = r - r_main``."""
    r_main = random_scalar(rng)
    return r_main, (r - r_main) % ORDER


def scalar_inv(x: int) -> int:
    if x % ORDER == 0:
        raise ParameterError("zero has no inverse mod p")
    return pow(x, -1, ORDER)


def _fr(x: int) -> Fr:
    return Fr(str(x % ORDER), 10)


# ---------------------------------------------------------------------------
# group operations

def smul(a, x: int):
    """a^x for a in G or H."""
    _tick("smul")
    return a * _fr(x)


def add(a, b):
    """Group operation in G or H (a * b in multiplicative notation)."""
    _tick("add")
    return a + b


def sub(a, b):
    _tick("add")
    return a - b


def neg(a):
    return -a


def product(elems, identity):
    """Fold the group operation over ``elems`` starting from ``identity``.

    Costs exactly ``len(elems)`` additions, which keeps the operation counts
    in line with the |S|-linear terms of the cost table.
    """
    acc = identity
    for e in elems:
        acc = add(acc, e)
    return acc


def pair(a: G1, b: G2) -> GT:
    _tick("pair")
    return pymcl.pairing(a, b)


def gt_mul(a: GT, b: GT) -> GT:
    _tick("gt_mul")
    return a * b


def gt_div(a: GT, b: GT) -> GT:
    _tick("gt_mul")
    return a / b


def gt_pow(b: GT, x: int) -> GT:
    _tick("gt_exp")
    return b ** _fr(x)


# ---------------------------------------------------------------------------
# hashing

def keyword_bytes(w: str | bytes) -> bytes:
    """UTF-8 bytes of the NFC-normalized keyword; no case folding."""
    if isinstance(w, bytes):
        w = w.decode("utf-8")
    return unicodedata.normalize("NFC", w).encode("utf-8")


def _g1_from_zcash(data: bytes) -> G1:
    # ZCash compressed form: flags in the top 3 bits of the first byte.
    flags = data[0]
    if flags & 0x40:
        return G1()
    x = int.from_bytes(bytes([flags & 0x1F]) + data[1:], "big")
    q = FIELD_MODULUS
    y = pow((x * x * x + 4) % q, (q + 1) // 4, q)
    if (y > (q - 1) // 2) != bool(flags & 0x20):
        y = q - y
    return G1(f"1 {x} {y}", 10)


def hash_to_g(msg: bytes) -> G1:
    """Hash an arbitrary byte string to G (IETF SSWU, random-oracle variant)."""
    _tick("hash")
    point = blspy.G1Element.from_message(bytes(msg), HASH_DST)
    return _g1_from_zcash(bytes(point))


def hash_keyword(w: str | bytes) -> G1:
    return hash_to_g(keyword_bytes(w))


# ---------------------------------------------------------------------------
# encodings

def encode_scalar(x: int) -> bytes:
    if not 0 <= x < ORDER:
        raise FormatError("scalar out of range")
    return x.to_bytes(ENCODING["scalar"], "big")


def decode_scalar(data: bytes) -> int:
    if len(data) != ENCODING["scalar"]:
        raise FormatError(f"scalar must be {ENCODING['scalar']} bytes, got {len(data)}")
    x = int.from_bytes(data, "big")
    if x >= ORDER:
        raise FormatError("scalar is not reduced modulo the group order")
    return x


def _decode_point(cls, data: bytes, width: int, name: str):
    if len(data) != width:
        raise FormatError(f"{name} element must be {width} bytes, got {len(data)}")
    try:
        # mcl checks curve membership and subgroup order on load
        return cls.deserialize(bytes(data))
    except ValueError as exc:
        raise FormatError(f"invalid {name} element ({exc})") from None


def encode_g(a: G1) -> bytes:
    return a.serialize()


def decode_g(data: bytes) -> G1:
    return _decode_point(G1, data, ENCODING["G"], "G")


def encode_h(b: G2) -> bytes:
    return b.serialize()


def decode_h(data: bytes) -> G2:
    return _decode_point(G2, data, ENCODING["H"], "H")


def encode_gt(z: GT) -> bytes:
    return z.serialize()


_ORDER_MINUS_ONE = Fr(str(ORDER - 1), 10)


def is_gt_member(z: GT) -> bool:
    """True iff z lies in the order-p subgroup of the GT field."""
    if z.is_zero():
        return False
    return (z ** _ORDER_MINUS_ONE) * z == GT()


def decode_gt(data: bytes) -> GT:
    if len(data) != ENCODING["GT"]:
        raise FormatError(f"GT element must be {ENCODING['GT']} bytes, got {len(data)}")
    try:
        z = GT.deserialize(bytes(data))
    except ValueError as exc:
        raise FormatError(f"invalid GT element ({exc})") from None
    if not is_gt_member(z):
        raise FormatError("GT element outside the prime-order subgroup")
    return z

