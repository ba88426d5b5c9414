"""Executable model of the two-server deployment (C_main / C_aid)."""

from .audit import AuditSecrets, LeakageReport, Violation, transcript_audit
from .messages import (
    AidHalf,
    AidShareBatch,
    FirstRequest,
    MainHalf,
    SearchResponse,
    new_query_id,
)
from .protocol import MISCONFIGURATIONS, Deployment, search_first, search_main, split_trapdoor
from .servers import AidServer, FirstServer, MainServer
from .store import IndexStore, owner_upload, replicate
from .transport import InProcessEndpoint, SocketEndpoint, SocketServer, Transcript

__all__ = [
    "AidHalf", "AidServer", "AidShareBatch", "AuditSecrets", "Deployment", "FirstRequest",
    "FirstServer", "InProcessEndpoint", "IndexStore", "LeakageReport", "MISCONFIGURATIONS",
    "MainHalf", "MainServer", "SearchResponse", "SocketEndpoint", "SocketServer", "Transcript",
    "Violation", "new_query_id", "owner_upload", "replicate", "search_first", "search_main",
    "split_trapdoor", "transcript_audit",
]
