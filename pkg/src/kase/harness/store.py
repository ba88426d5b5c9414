"""Per-document ciphertext index held by each server."""

from __future__ import annotations

import hashlib
import json
import threading
from pathlib import Path
from typing import Iterable

from .. import backbone as bb
from ..codec import FORMAT, ciphertext_fields, ciphertext_from_fields, require_keys
from ..errors import DocumentIndexError, FormatError, ProtocolError
from ..scheme import EncryptedKeyword, PublicParams, check_doc_index


class IndexStore:
    """Append-only map from document index to its encrypted keywords.

    One writer (the owner's uploads) and any number of concurrent readers.
    The position of a ciphertext inside its document is its keyword slot.
    """

    def __init__(self, params: PublicParams, owner: str = "owner"):
        self.params = params
        self.owner = owner
        self._docs: dict[int, list[EncryptedKeyword]] = {}
        self._lock = threading.Lock()

    def upload(self, i: int, cts: Iterable[EncryptedKeyword]) -> IndexStore:
        check_doc_index(self.params, i)
        cts = list(cts)
        for c in cts:
            if c.doc_index != i:
                raise DocumentIndexError(f"ciphertext for document {c.doc_index} uploaded under {i}")
        with self._lock:
            self._docs.setdefault(i, []).extend(cts)
        return self

    def slots(self, i: int) -> tuple[EncryptedKeyword, ...]:
        with self._lock:
            return tuple(self._docs.get(i, ()))

    def doc_indexes(self) -> list[int]:
        with self._lock:
            return sorted(self._docs)

    def __len__(self) -> int:
        with self._lock:
            return sum(len(v) for v in self._docs.values())

    # snapshots: one header line, then one JSON line per ciphertext

    def header(self) -> dict:
        return {"format": FORMAT, "kind": "index-store", "curve": bb.CURVE_ID,
                "encoding": dict(bb.ENCODING), "n": self.params.n, "owner": self.owner}

    def snapshot_lines(self) -> list[str]:
        lines = [json.dumps(self.header())]
        with self._lock:
            for i in sorted(self._docs):
                lines.extend(json.dumps(ciphertext_fields(c)) for c in self._docs[i])
        return lines

    def digest(self) -> str:
        h = hashlib.sha256()
        for line in self.snapshot_lines():
            h.update(line.encode() + b"\n")
        return h.hexdigest()

    def save(self, path: str | Path) -> None:
        Path(path).write_text("\n".join(self.snapshot_lines()) + "\n")

    @classmethod
    def load(cls, path: str | Path, params: PublicParams) -> IndexStore:
        lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
        if not lines:
            raise FormatError(f"{path}: empty snapshot")
        try:
            header = json.loads(lines[0])
        except json.JSONDecodeError:
            raise FormatError("not JSON", "line 1") from None
        require_keys(header, ("format", "kind", "curve", "encoding", "n", "owner"), "line 1")
        if header["format"] != FORMAT or header["kind"] != "index-store":
            raise FormatError("not a kase/v1 index-store snapshot", "line 1")
        if header["encoding"] != bb.ENCODING or header["curve"] != bb.CURVE_ID:
            raise FormatError("curve or encoding mismatch", "line 1")
        if header["n"] != params.n:
            raise FormatError(f"snapshot is for n={header['n']}, params have n={params.n}", "line 1.n")
        store = cls(params, header["owner"])
        for lineno, line in enumerate(lines[1:], start=2):
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                raise FormatError("not JSON", f"line {lineno}") from None
            c = ciphertext_from_fields(obj, f"line {lineno}")
            store.upload(c.doc_index, [c])
        return store


def owner_upload(store: IndexStore, i: int, cts: Iterable[EncryptedKeyword]) -> IndexStore:
    return store.upload(i, cts)


def replicate(stores: Iterable[IndexStore], i: int, cts: Iterable[EncryptedKeyword]) -> str:
    """Upload the same ciphertexts to every store and confirm they stayed identical."""
    stores = list(stores)
    cts = list(cts)
    for store in stores:
        store.upload(i, cts)
    digests = {store.digest() for store in stores}
    if len(digests) != 1:
        raise ProtocolError("server stores diverged after replication")
    return digests.pop()
