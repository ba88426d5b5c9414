"""User-side protocol driver and a ready-made two-server deployment."""

from __future__ import annotations

from typing import Iterable

from .. import backbone as bb
from ..errors import ParameterError, ProtocolError
from ..first import TrapdoorFirst
from ..main_scheme import TrapdoorBundle
from ..scheme import PublicParams
from .messages import (
    AidHalf,
    FirstRequest,
    MainHalf,
    SearchResponse,
    new_query_id,
    raise_for_error,
)
from .servers import DEFAULT_TIMEOUT, AidServer, FirstServer, MainServer
from .store import IndexStore
from .transport import InProcessEndpoint, SocketEndpoint, SocketServer, Transcript

# Deliberate wiring mistakes, used to check that the transcript audit catches them.
MISCONFIGURATIONS = ("r_main_to_aid", "unsplit_r", "keyword_label", "r_aid_to_main")


def split_trapdoor(bundle: TrapdoorBundle, docs: Iterable[int], query_id: str | None = None) -> tuple[MainHalf, AidHalf]:
    s = tuple(sorted(set(docs)))
    query_id = query_id or new_query_id()
    return (
        MainHalf(query_id, s, bundle.tr, bundle.r_main),
        AidHalf(query_id, s, bundle.r_aid),
    )


def search_first(endpoint, td: TrapdoorFirst, docs: Iterable[int], query_id: str | None = None) -> SearchResponse:
    s = tuple(sorted(set(docs)))
    if not s:
        raise ParameterError("document set must be nonempty")
    req = FirstRequest(query_id or new_query_id(), s, td.tr)
    return SearchResponse.from_wire(raise_for_error(endpoint(req.to_wire())))


def search_main(main_endpoint, aid_endpoint, main_half: MainHalf, aid_half: AidHalf) -> SearchResponse:
    """Send the aid half first (it pushes its batch to C_main), then the main half."""
    if main_half.query_id != aid_half.query_id:
        raise ProtocolError("trapdoor halves carry different query ids")
    if main_half.S != aid_half.S:
        raise ProtocolError("trapdoor halves carry different document sets")
    if not main_half.S:
        raise ParameterError("document set must be nonempty")
    raise_for_error(aid_endpoint(aid_half.to_wire()))
    return SearchResponse.from_wire(raise_for_error(main_endpoint(main_half.to_wire())))


class Deployment:
    """C_main, C_aid and a single-server instance wired over one transport.

    ``transport`` is ``"inproc"`` or ``"socket"``. ``store_aid`` defaults to
    ``store_main``; pass a separate replica to model two machines.
    ``aid_tamper`` rewrites the aid's batch on its way to C_main.
    """

    def __init__(
        self,
        params: PublicParams,
        store_main: IndexStore,
        store_aid: IndexStore | None = None,
        *,
        transport: str = "inproc",
        timeout: float = DEFAULT_TIMEOUT,
        transcript: Transcript | None = None,
        aid_tamper=None,
    ):
        if transport not in ("inproc", "socket"):
            raise ParameterError(f"unknown transport {transport!r}")
        self.params = params
        self.transcript = transcript if transcript is not None else Transcript()
        self.main = MainServer(params, store_main, timeout=timeout)
        self.aid = AidServer(params, store_aid if store_aid is not None else store_main)
        self.single = FirstServer(params, store_main)
        self._sockets: list[SocketServer] = []

        if transport == "inproc":
            def connect(server, src, dst, tamper=None):
                return InProcessEndpoint(server, src, dst, self.transcript, tamper)
        else:
            def connect(server, src, dst, tamper=None):
                srv = SocketServer(server)
                self._sockets.append(srv)
                return SocketEndpoint(srv.address, src, dst, self.transcript, tamper)

        self.user_to_main = connect(self.main, "user", "main")
        self.aid.main = connect(self.main, "aid", "main", aid_tamper)
        self.user_to_aid = connect(self.aid, "user", "aid")
        self.user_to_first = connect(self.single, "user", "first")

    def search_first(self, td: TrapdoorFirst, docs: Iterable[int], query_id: str | None = None) -> list[int]:
        return list(search_first(self.user_to_first, td, docs, query_id).docs)

    def search_main(
        self,
        bundle: TrapdoorBundle,
        docs: Iterable[int],
        query_id: str | None = None,
        *,
        keyword: str | None = None,
        misconfig: str | None = None,
    ) -> list[int]:
        main_half, aid_half = split_trapdoor(bundle, docs, query_id)
        if misconfig is not None:
            main_half, aid_half = _miswire(misconfig, bundle, main_half, aid_half, keyword)
            if misconfig == "r_aid_to_main":
                # the aid half is also delivered to the wrong server
                self.user_to_main(aid_half.to_wire())
        return list(search_main(self.user_to_main, self.user_to_aid, main_half, aid_half).docs)

    def new_transcript(self) -> Transcript:
        """Start recording into a fresh transcript and return it."""
        self.transcript = Transcript()
        for ep in (self.user_to_main, self.user_to_aid, self.user_to_first, self.aid.main):
            ep.transcript = self.transcript
        return self.transcript

    def close(self) -> None:
        for srv in self._sockets:
            srv.close()
        self._sockets.clear()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _miswire(kind, bundle, main_half, aid_half, keyword):
    if kind == "r_main_to_aid":
        return main_half, AidHalf(aid_half.query_id, aid_half.S, bundle.r_main)
    if kind == "unsplit_r":
        r = (bundle.r_main + bundle.r_aid) % bb.ORDER
        return (MainHalf(main_half.query_id, main_half.S, main_half.tr, r),
                AidHalf(aid_half.query_id, aid_half.S, 0))
    if kind == "keyword_label":
        if keyword is None:
            raise ParameterError("keyword_label needs the keyword")
        return (MainHalf(main_half.query_id, main_half.S, main_half.tr, main_half.r_main,
                         {"label": keyword}), aid_half)
    if kind == "r_aid_to_main":
        return main_half, aid_half
    raise ParameterError(f"unknown misconfiguration {kind!r}")
