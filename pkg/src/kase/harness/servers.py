"""Server roles. Each ``handle`` takes one decoded JSON message and returns the reply.

``FirstServer`` answers single-server searches. ``AidServer`` and
``MainServer`` run the two-server protocol: the aid server exponentiates its
share into a batch and pushes it to the main server; the main server waits
for that batch, recombines, and is the only party that sees results.
"""

from __future__ import annotations

import logging
import threading
from typing import Callable

from .. import first
from .. import main_scheme as ms
from ..errors import AidTimeout, KaseError, ProtocolError, ScopeError
from ..scheme import PublicParams, canonical_set, set_product
from .messages import (
    AidHalf,
    AidShareBatch,
    FirstRequest,
    MainHalf,
    SearchResponse,
    ack,
    error_message,
    raise_for_error,
)
from .store import IndexStore

log = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 5.0


def scoped_set(params: PublicParams, docs) -> tuple[int, ...]:
    """Canonical S, with out-of-range indexes reported as a scope error."""
    bad = [i for i in docs if not 1 <= i <= params.n]
    if bad:
        raise ScopeError(f"document indexes {bad} are outside [1, {params.n}]")
    return canonical_set(params, docs)


class _Server:
    role = "server"

    def __init__(self, params: PublicParams, store: IndexStore):
        self.params = params
        self.store = store

    def handle(self, msg: dict) -> dict:
        qid = msg.get("query_id") if isinstance(msg, dict) else None
        try:
            return self.dispatch(msg)
        except KaseError as exc:
            log.info("%s server rejected %s: %s", self.role, qid, exc)
            return error_message(exc, qid)

    def dispatch(self, msg: dict) -> dict:
        raise NotImplementedError


class FirstServer(_Server):
    role = "first"

    def dispatch(self, msg):
        if msg.get("type") != "search-first":
            raise ProtocolError(f"single server does not accept {msg.get('type')!r} messages")
        req = FirstRequest.from_wire(msg)
        return SearchResponse(req.query_id, self.search(req)).to_wire()

    def search(self, req: FirstRequest) -> tuple[int, ...]:
        s = scoped_set(self.params, req.S)
        pub = set_product(self.params, s)
        td = first.TrapdoorFirst(req.tr)
        hits = []
        for i in s:
            cts = self.store.slots(i)
            if not cts:
                continue
            tr_i = first.adjust(self.params, i, s, td)
            if any(first.test(self.params, tr_i, s, c, pub) for c in cts):
                hits.append(i)
        return tuple(hits)


class AidServer(_Server):
    """Holds r_aid for a query just long enough to build and push the batch."""

    role = "aid"

    def __init__(self, params, store, main: Callable[[dict], dict] | None = None):
        super().__init__(params, store)
        self.main = main

    def dispatch(self, msg):
        if msg.get("type") != "aid-half":
            raise ProtocolError(f"aid server does not accept {msg.get('type')!r} messages")
        half = AidHalf.from_wire(msg)
        batch = self.compute_batch(half)
        if self.main is None:
            raise ProtocolError("aid server has no route to the main server")
        raise_for_error(self.main(batch.to_wire()))
        return ack(half.query_id)

    def compute_batch(self, half: AidHalf) -> AidShareBatch:
        s = scoped_set(self.params, half.S)
        pub = set_product(self.params, s)
        shares = []
        for i in s:
            cts = self.store.slots(i)
            if not cts:
                continue
            pub_i_share = ms.adjust_share(self.params, i, s, half.r_aid)
            for slot, c in enumerate(cts):
                c2, c3 = ms.test_shares(self.params, s, c, half.r_aid, pub)
                shares.append(ms.MainShareMsg(i, slot, pub_i_share, c2, c3))
        return AidShareBatch(half.query_id, s, tuple(shares))


class MainServer(_Server):
    role = "main"

    def __init__(self, params, store, *, timeout: float = DEFAULT_TIMEOUT):
        super().__init__(params, store)
        self.timeout = timeout
        self._cond = threading.Condition()
        self._batches: dict[str, AidShareBatch] = {}
        self._responses: dict[str, dict] = {}
        self._query_locks: dict[str, threading.Lock] = {}

    def dispatch(self, msg):
        kind = msg.get("type")
        if kind == "aid-batch":
            batch = AidShareBatch.from_wire(msg)
            with self._cond:
                self._batches[batch.query_id] = batch
                self._cond.notify_all()
            return ack(batch.query_id)
        if kind == "main-half":
            return self._answer(MainHalf.from_wire(msg))
        raise ProtocolError(f"main server does not accept {kind!r} messages")

    def _answer(self, half: MainHalf) -> dict:
        with self._cond:
            lock = self._query_locks.setdefault(half.query_id, threading.Lock())
        with lock:
            # replays of a finished query get the same answer
            if half.query_id in self._responses:
                return self._responses[half.query_id]
            batch = self._wait_for_batch(half.query_id)
            docs = self.search(half, batch)
            reply = SearchResponse(half.query_id, docs).to_wire()
            with self._cond:
                self._responses[half.query_id] = reply
            return reply

    def _wait_for_batch(self, query_id: str) -> AidShareBatch:
        with self._cond:
            ok = self._cond.wait_for(lambda: query_id in self._batches, timeout=self.timeout)
            if not ok:
                raise AidTimeout(f"no aid share batch for query {query_id} within {self.timeout}s")
            return self._batches.pop(query_id)

    def search(self, half: MainHalf, batch: AidShareBatch) -> tuple[int, ...]:
        s = scoped_set(self.params, half.S)
        if scoped_set(self.params, batch.S) != s:
            raise ProtocolError("aid batch was computed for a different document set")
        by_slot = {(m.doc_index, m.slot): m for m in batch.shares}
        expected = {(i, k) for i in s for k in range(len(self.store.slots(i)))}
        if set(by_slot) != expected:
            raise ProtocolError("aid batch does not cover the main store's ciphertexts")

        pub = set_product(self.params, s)
        hits = []
        for i in s:
            cts = self.store.slots(i)
            if not cts:
                continue
            aid_pub_i = by_slot[(i, 0)].pub_i
            if any(by_slot[(i, k)].pub_i != aid_pub_i for k in range(len(cts))):
                raise ProtocolError(f"inconsistent adjust shares for document {i}")
            share_main = ms.adjust_share(self.params, i, s, half.r_main)
            tr_i = ms.adjust_main(self.params, i, s, half.tr, share_main, aid_pub_i)
            for k, c in enumerate(cts):
                entry = by_slot[(i, k)]
                mine = ms.test_shares(self.params, s, c, half.r_main, pub)
                if ms.test_main(self.params, tr_i, s, c, mine, (entry.c2, entry.c3)):
                    hits.append(i)
                    break
        return tuple(hits)
