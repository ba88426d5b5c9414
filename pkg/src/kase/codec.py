"""``kase/v1`` JSON envelopes for parameters, keys, ciphertexts and trapdoors.

Every file is a single JSON object::

    {"format": "kase/v1", "kind": ..., "construction": "first"|"main",
     "curve": "BLS12-381", "encoding": {...byte widths...}, "n": n,
     "payload": {...}}

Group elements and scalars are hex strings in the backbone encodings. Keys
are emitted in a fixed order and unknown keys are rejected on load.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Callable

from . import backbone as bb
from .errors import FormatError
from .first import TrapdoorFirst
from .scheme import (
    AggregateKey,
    EncryptedKeyword,
    PublicParams,
    SecretKey,
    canonical_set,
    check_document_count,
)

FORMAT = "kase/v1"
CONSTRUCTIONS = ("first", "main")
_TOP_KEYS = ("format", "kind", "construction", "curve", "encoding", "n", "payload")


def hexval(data: bytes) -> str:
    return data.hex()


def unhex(value: Any, field: str) -> bytes:
    if not isinstance(value, str):
        raise FormatError("expected a hex string", field)
    try:
        return bytes.fromhex(value)
    except ValueError:
        raise FormatError("not valid hex", field) from None


def decode_field(decoder: Callable[[bytes], Any], value: Any, field: str):
    try:
        return decoder(unhex(value, field))
    except FormatError as exc:
        if exc.field is not None:
            raise
        raise FormatError(str(exc), field) from None


def require_keys(obj: Any, keys: tuple[str, ...], where: str, optional: tuple[str, ...] = ()) -> None:
    if not isinstance(obj, dict):
        raise FormatError("expected an object", where or None)
    unknown = set(obj) - set(keys) - set(optional)
    if unknown:
        raise FormatError(f"unknown field(s) {sorted(unknown)}", where or None)
    for key in keys:
        if key not in obj:
            raise FormatError("missing field", f"{where}.{key}" if where else key)


def index_list(value: Any, field: str) -> list[int]:
    if not isinstance(value, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
        raise FormatError("expected a list of document indexes", field)
    return value


def envelope(kind: str, construction: str, n: int, payload: dict) -> dict:
    if construction not in CONSTRUCTIONS:
        raise FormatError(f"unknown construction {construction!r}", "construction")
    return {
        "format": FORMAT,
        "kind": kind,
        "construction": construction,
        "curve": bb.CURVE_ID,
        "encoding": dict(bb.ENCODING),
        "n": n,
        "payload": payload,
    }


def open_envelope(obj: Any, kind: str, payload_keys: tuple[str, ...], optional: tuple[str, ...] = ()) -> dict:
    require_keys(obj, _TOP_KEYS, "")
    if obj["format"] != FORMAT:
        raise FormatError(f"unsupported format {obj['format']!r}", "format")
    if obj["kind"] != kind:
        raise FormatError(f"expected kind {kind!r}, got {obj['kind']!r}", "kind")
    if obj["construction"] not in CONSTRUCTIONS:
        raise FormatError(f"unknown construction {obj['construction']!r}", "construction")
    if obj["curve"] != bb.CURVE_ID:
        raise FormatError(f"unsupported curve {obj['curve']!r}", "curve")
    if obj["encoding"] != bb.ENCODING:
        raise FormatError("encoding widths do not match this backend", "encoding")
    if not isinstance(obj["n"], int) or isinstance(obj["n"], bool):
        raise FormatError("expected an int", "n")
    require_keys(obj["payload"], payload_keys, "payload", optional)
    return obj["payload"]


# ---------------------------------------------------------------------------
# params

def params_to_json(params: PublicParams, construction: str = "main") -> dict:
    n = params.n
    g_idx = [i for i in range(1, 2 * n + 1) if i != n + 1]
    payload = {
        "hash_id": params.hash_id,
        "security_bits": params.group.security_bits,
        "alpha_destroyed": params.alpha is None,
        "warning": params.trusted_setup_warning,
        "pub_g": [hexval(bb.encode_g(params.pub_g[i])) for i in g_idx],
        "pub_h": [hexval(bb.encode_h(params.pub_h[i])) for i in range(1, n + 1)],
    }
    return envelope("params", construction, n, payload)


def params_from_json(obj: Any) -> PublicParams:
    payload = open_envelope(
        obj, "params", ("hash_id", "security_bits", "alpha_destroyed", "warning", "pub_g", "pub_h")
    )
    try:
        n = check_document_count(obj["n"])
    except ValueError as exc:
        raise FormatError(str(exc), "n") from None
    if payload["hash_id"] != bb.HASH_ID:
        raise FormatError(f"unsupported hash {payload['hash_id']!r}", "payload.hash_id")
    g_idx = [i for i in range(1, 2 * n + 1) if i != n + 1]
    if not isinstance(payload["pub_g"], list) or len(payload["pub_g"]) != len(g_idx):
        raise FormatError(f"expected {len(g_idx)} elements", "payload.pub_g")
    if not isinstance(payload["pub_h"], list) or len(payload["pub_h"]) != n:
        raise FormatError(f"expected {n} elements", "payload.pub_h")
    pub_g = {
        i: decode_field(bb.decode_g, v, f"payload.pub_g[{k}]")
        for k, (i, v) in enumerate(zip(g_idx, payload["pub_g"]))
    }
    pub_h = {
        i + 1: decode_field(bb.decode_h, v, f"payload.pub_h[{i}]")
        for i, v in enumerate(payload["pub_h"])
    }
    return PublicParams(n=n, pub_g=pub_g, pub_h=pub_h)


# ---------------------------------------------------------------------------
# keys, ciphertexts, trapdoors

def secret_key_to_json(sk: SecretKey, params: PublicParams, construction: str = "main") -> dict:
    return envelope("secret-key", construction, params.n, {"beta": hexval(bb.encode_scalar(sk.beta))})


def secret_key_from_json(obj: Any) -> SecretKey:
    payload = open_envelope(obj, "secret-key", ("beta",))
    return SecretKey(decode_field(bb.decode_scalar, payload["beta"], "payload.beta"))


def aggregate_key_to_json(agg: AggregateKey, docs, params: PublicParams, construction: str = "main") -> dict:
    s = canonical_set(params, docs)
    return envelope("aggregate-key", construction, params.n, {"k": hexval(agg.to_bytes()), "S": list(s)})


def aggregate_key_from_json(obj: Any) -> tuple[AggregateKey, list[int]]:
    payload = open_envelope(obj, "aggregate-key", ("k", "S"))
    k = decode_field(bb.decode_g, payload["k"], "payload.k")
    return AggregateKey(k), index_list(payload["S"], "payload.S")


def ciphertext_fields(c: EncryptedKeyword) -> dict:
    return {
        "doc_index": c.doc_index,
        "c1": hexval(bb.encode_h(c.c1)),
        "c2": hexval(bb.encode_g(c.c2)),
        "c3": hexval(bb.encode_gt(c.c3)),
    }


def ciphertext_from_fields(obj: Any, where: str = "") -> EncryptedKeyword:
    require_keys(obj, ("doc_index", "c1", "c2", "c3"), where)
    prefix = f"{where}." if where else ""
    i = obj["doc_index"]
    if not isinstance(i, int) or isinstance(i, bool):
        raise FormatError("expected an int", f"{prefix}doc_index")
    return EncryptedKeyword(
        decode_field(bb.decode_h, obj["c1"], f"{prefix}c1"),
        decode_field(bb.decode_g, obj["c2"], f"{prefix}c2"),
        decode_field(bb.decode_gt, obj["c3"], f"{prefix}c3"),
        i,
    )


def ciphertext_to_json(c: EncryptedKeyword, params: PublicParams, construction: str = "main") -> dict:
    return envelope("ciphertext", construction, params.n, ciphertext_fields(c))


def ciphertext_from_json(obj: Any) -> EncryptedKeyword:
    payload = open_envelope(obj, "ciphertext", ("doc_index", "c1", "c2", "c3"))
    return ciphertext_from_fields(payload, "payload")


def _scope_fields(params: PublicParams, docs, key_docs) -> dict:
    fields = {"S": list(canonical_set(params, docs))}
    if key_docs is not None:
        fields["key_S"] = list(canonical_set(params, key_docs))
    return fields


def trapdoor_first_to_json(td: TrapdoorFirst, docs, params: PublicParams, key_docs=None) -> dict:
    """``key_docs``, when given, records the set the aggregate key actually covers."""
    payload = {"tr": hexval(td.to_bytes()), **_scope_fields(params, docs, key_docs)}
    return envelope("trapdoor", "first", params.n, payload)


def trapdoor_first_from_json(obj: Any) -> tuple[TrapdoorFirst, list[int]]:
    payload = open_envelope(obj, "trapdoor", ("tr", "S"), ("key_S",))
    if obj["construction"] != "first":
        raise FormatError("expected a first-construction trapdoor", "construction")
    return TrapdoorFirst(decode_field(bb.decode_g, payload["tr"], "payload.tr")), index_list(payload["S"], "payload.S")


def trapdoor_key_scope(obj: Any) -> list[int] | None:
    """The ``key_S`` field of any trapdoor file, or None if absent."""
    payload = obj.get("payload") if isinstance(obj, dict) else None
    if not isinstance(payload, dict) or "key_S" not in payload:
        return None
    return index_list(payload["key_S"], "payload.key_S")


def trapdoor_main_half_to_json(query_id: str, tr, r_main: int, docs, params: PublicParams, key_docs=None) -> dict:
    payload = {
        "query_id": query_id,
        "tr": hexval(bb.encode_g(tr)),
        "r_main": hexval(bb.encode_scalar(r_main)),
        **_scope_fields(params, docs, key_docs),
    }
    return envelope("trapdoor-main", "main", params.n, payload)


def trapdoor_aid_half_to_json(query_id: str, r_aid: int, docs, params: PublicParams, key_docs=None) -> dict:
    payload = {
        "query_id": query_id,
        "r_aid": hexval(bb.encode_scalar(r_aid)),
        **_scope_fields(params, docs, key_docs),
    }
    return envelope("trapdoor-aid", "main", params.n, payload)


def trapdoor_main_half_from_json(obj: Any) -> dict:
    """Decoded ``{query_id, S, tr, r_main}``."""
    payload = open_envelope(obj, "trapdoor-main", ("query_id", "tr", "r_main", "S"), ("key_S",))
    if not isinstance(payload["query_id"], str):
        raise FormatError("expected a string", "payload.query_id")
    return {
        "query_id": payload["query_id"],
        "S": index_list(payload["S"], "payload.S"),
        "tr": decode_field(bb.decode_g, payload["tr"], "payload.tr"),
        "r_main": decode_field(bb.decode_scalar, payload["r_main"], "payload.r_main"),
    }


def trapdoor_aid_half_from_json(obj: Any) -> dict:
    """Decoded ``{query_id, S, r_aid}``."""
    payload = open_envelope(obj, "trapdoor-aid", ("query_id", "r_aid", "S"), ("key_S",))
    if not isinstance(payload["query_id"], str):
        raise FormatError("expected a string", "payload.query_id")
    return {
        "query_id": payload["query_id"],
        "S": index_list(payload["S"], "payload.S"),
        "r_aid": decode_field(bb.decode_scalar, payload["r_aid"], "payload.r_aid"),
    }


# ---------------------------------------------------------------------------
# files

def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=2) + "\n"


def write_json(path: str | Path, obj: dict) -> None:
    Path(path).write_text(dumps(obj))


def read_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not JSON ({exc.msg})") from None
