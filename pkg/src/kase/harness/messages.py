"""Wire schema for the search protocol.

Messages are JSON objects with a ``type`` tag. Group elements and scalars
are hex in the backbone encodings. Every message may carry a free-form
``meta`` object that servers ignore; any other unknown field is rejected.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass, field
from typing import Any

from .. import backbone as bb
from ..codec import decode_field, hexval, index_list, require_keys
from ..errors import (
    AidTimeout,
    DocumentIndexError,
    FormatError,
    KaseError,
    ParameterError,
    ProtocolError,
    ScopeError,
)
from ..main_scheme import MainShareMsg

QUERY_ID_BYTES = 16


def new_query_id() -> str:
    return secrets.token_hex(QUERY_ID_BYTES)


def check_query_id(value: Any, where: str = "query_id") -> str:
    if not isinstance(value, str) or len(value) != 2 * QUERY_ID_BYTES:
        raise FormatError(f"query id must be {QUERY_ID_BYTES} bytes of hex", where)
    try:
        bytes.fromhex(value)
    except ValueError:
        raise FormatError("query id is not hex", where) from None
    return value


def _open(msg: Any, kind: str, keys: tuple[str, ...]) -> dict:
    require_keys(msg, ("type",) + keys, "", optional=("meta",))
    if msg["type"] != kind:
        raise FormatError(f"expected message type {kind!r}, got {msg['type']!r}", "type")
    check_query_id(msg["query_id"])
    if "meta" in msg and not isinstance(msg["meta"], dict):
        raise FormatError("expected an object", "meta")
    return msg


def _with_meta(body: dict, meta: dict) -> dict:
    if meta:
        body["meta"] = dict(meta)
    return body


@dataclass(frozen=True)
class FirstRequest:
    query_id: str
    S: tuple[int, ...]
    tr: bb.G1
    meta: dict = field(default_factory=dict, compare=False)

    def to_wire(self) -> dict:
        return _with_meta(
            {"type": "search-first", "query_id": self.query_id, "S": list(self.S),
             "tr": hexval(bb.encode_g(self.tr))},
            self.meta,
        )

    @classmethod
    def from_wire(cls, msg: Any) -> FirstRequest:
        _open(msg, "search-first", ("query_id", "S", "tr"))
        return cls(msg["query_id"], tuple(index_list(msg["S"], "S")),
                   decode_field(bb.decode_g, msg["tr"], "tr"), msg.get("meta", {}))


@dataclass(frozen=True)
class MainHalf:
    """What the user sends C_main: the blinded trapdoor and r_main."""

    query_id: str
    S: tuple[int, ...]
    tr: bb.G1
    r_main: int
    meta: dict = field(default_factory=dict, compare=False)

    def to_wire(self) -> dict:
        return _with_meta(
            {"type": "main-half", "query_id": self.query_id, "S": list(self.S),
             "tr": hexval(bb.encode_g(self.tr)), "r_main": hexval(bb.encode_scalar(self.r_main))},
            self.meta,
        )

    @classmethod
    def from_wire(cls, msg: Any) -> MainHalf:
        _open(msg, "main-half", ("query_id", "S", "tr", "r_main"))
        return cls(
            msg["query_id"],
            tuple(index_list(msg["S"], "S")),
            decode_field(bb.decode_g, msg["tr"], "tr"),
            decode_field(bb.decode_scalar, msg["r_main"], "r_main"),
            msg.get("meta", {}),
        )


@dataclass(frozen=True)
class AidHalf:
    """What the user sends C_aid: only r_aid."""

    query_id: str
    S: tuple[int, ...]
    r_aid: int
    meta: dict = field(default_factory=dict, compare=False)

    def to_wire(self) -> dict:
        return _with_meta(
            {"type": "aid-half", "query_id": self.query_id, "S": list(self.S),
             "r_aid": hexval(bb.encode_scalar(self.r_aid))},
            self.meta,
        )

    @classmethod
    def from_wire(cls, msg: Any) -> AidHalf:
        _open(msg, "aid-half", ("query_id", "S", "r_aid"))
        return cls(
            msg["query_id"],
            tuple(index_list(msg["S"], "S")),
            decode_field(bb.decode_scalar, msg["r_aid"], "r_aid"),
            msg.get("meta", {}),
        )


@dataclass(frozen=True)
class AidShareBatch:
    query_id: str
    S: tuple[int, ...]
    shares: tuple[MainShareMsg, ...]

    def to_wire(self) -> dict:
        return {
            "type": "aid-batch",
            "query_id": self.query_id,
            "S": list(self.S),
            "shares": [
                {"doc": m.doc_index, "slot": m.slot, "pub_i": hexval(bb.encode_g(m.pub_i)),
                 "c2": hexval(bb.encode_gt(m.c2)), "c3": hexval(bb.encode_gt(m.c3))}
                for m in self.shares
            ],
        }

    @classmethod
    def from_wire(cls, msg: Any) -> AidShareBatch:
        _open(msg, "aid-batch", ("query_id", "S", "shares"))
        if not isinstance(msg["shares"], list):
            raise FormatError("expected a list", "shares")
        shares = []
        for k, entry in enumerate(msg["shares"]):
            where = f"shares[{k}]"
            require_keys(entry, ("doc", "slot", "pub_i", "c2", "c3"), where)
            if not all(isinstance(entry[f], int) and not isinstance(entry[f], bool) for f in ("doc", "slot")):
                raise FormatError("doc and slot must be ints", where)
            shares.append(MainShareMsg(
                entry["doc"], entry["slot"],
                decode_field(bb.decode_g, entry["pub_i"], f"{where}.pub_i"),
                decode_field(bb.decode_gt, entry["c2"], f"{where}.c2"),
                decode_field(bb.decode_gt, entry["c3"], f"{where}.c3"),
            ))
        return cls(msg["query_id"], tuple(index_list(msg["S"], "S")), tuple(shares))


@dataclass(frozen=True)
class SearchResponse:
    query_id: str
    docs: tuple[int, ...]

    def to_wire(self) -> dict:
        return {"type": "response", "query_id": self.query_id, "docs": list(self.docs)}

    @classmethod
    def from_wire(cls, msg: Any) -> SearchResponse:
        _open(msg, "response", ("query_id", "docs"))
        return cls(msg["query_id"], tuple(index_list(msg["docs"], "docs")))


def ack(query_id: str) -> dict:
    return {"type": "ack", "query_id": query_id}


_ERROR_CODES: dict[str, type[KaseError]] = {
    "timeout": AidTimeout,
    "scope": ScopeError,
    "protocol": ProtocolError,
    "parameter": ParameterError,
    "index": DocumentIndexError,
    "format": FormatError,
}


def error_message(exc: Exception, query_id: str | None = None) -> dict:
    code = "protocol"
    for name, cls in _ERROR_CODES.items():
        if isinstance(exc, cls):
            code = name
            break
    return {"type": "error", "code": code, "message": str(exc), "query_id": query_id}


def raise_for_error(msg: dict) -> dict:
    """Turn an error reply back into the matching exception."""
    if isinstance(msg, dict) and msg.get("type") == "error":
        cls = _ERROR_CODES.get(msg.get("code"), ProtocolError)
        raise cls(msg.get("message", "remote error"))
    return msg
