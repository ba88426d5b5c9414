"""Leakage audit over a recorded message transcript.

The audit is given the secrets a run must protect and checks where each
one travelled:

* the full blinding scalar ``r`` never appears on any wire;
* ``r_main`` never reaches C_aid and ``r_aid`` never reaches C_main;
* ``r_aid`` never appears in anything C_main sends back to the user;
* plaintext keywords appear nowhere.

This is bookkeeping over the implemented message set, not a proof.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable

from .. import backbone as bb
from ..errors import AuditFailure
from .transport import Transcript, TranscriptEntry

# keywords shorter than this are not searched for inside binary fields,
# where short byte strings show up by chance
_MIN_BINARY_KEYWORD = 4


@dataclass
class AuditSecrets:
    construction: str = "main"
    r_main: int | None = None
    r_aid: int | None = None
    keywords: list[str] = field(default_factory=list)

    @property
    def r(self) -> int | None:
        if self.r_main is None or self.r_aid is None:
            return None
        return (self.r_main + self.r_aid) % bb.ORDER


@dataclass(frozen=True)
class Violation:
    message_id: int
    rule: str
    detail: str


@dataclass
class LeakageReport:
    messages_checked: int
    violations: list[Violation] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.violations

    def flagged_rules(self) -> set[str]:
        return {v.rule for v in self.violations}

    def raise_for_violations(self) -> None:
        if self.violations:
            v = self.violations[0]
            raise AuditFailure(f"message {v.message_id}: {v.rule} ({v.detail})", v.message_id)

    def to_json(self) -> dict:
        return {
            "clean": self.clean,
            "messages_checked": self.messages_checked,
            "violations": [v.__dict__ for v in self.violations],
            "notes": self.notes,
        }


# protocol vocabulary, not user data; scanning it would flag keywords like "ack"
_SKIP_FIELDS = frozenset({"type", "code"})


def _walk(value: Any) -> Iterable[Any]:
    """Leaf values of a message; field names and message tags are skipped."""
    if isinstance(value, dict):
        for k, v in value.items():
            if k not in _SKIP_FIELDS:
                yield from _walk(v)
    elif isinstance(value, list):
        for v in value:
            yield from _walk(v)
    else:
        yield value


def _is_hex(s: str) -> bool:
    if len(s) % 2:
        return False
    try:
        bytes.fromhex(s)
    except ValueError:
        return False
    return True


def _carries_scalar(entry: TranscriptEntry, x: int | None) -> bool:
    if not x:
        return False
    text = json.dumps(entry.payload).lower()
    if bb.encode_scalar(x % bb.ORDER).hex() in text:
        return True
    return any(isinstance(v, int) and not isinstance(v, bool) and v == x for v in _walk(entry.payload))


def _carries_keyword(entry: TranscriptEntry, w: str) -> bool:
    raw = bb.keyword_bytes(w)
    text = raw.decode()
    for v in _walk(entry.payload):
        if not isinstance(v, str):
            continue
        if _is_hex(v):
            if len(raw) >= _MIN_BINARY_KEYWORD and raw in bytes.fromhex(v):
                return True
        elif text in v:
            return True
    return False


def transcript_audit(transcript: Transcript | Iterable[TranscriptEntry], secrets: AuditSecrets) -> LeakageReport:
    entries = transcript.entries if isinstance(transcript, Transcript) else list(transcript)
    report = LeakageReport(messages_checked=len(entries))
    for e in entries:
        if _carries_scalar(e, secrets.r):
            report.violations.append(Violation(e.msg_id, "r-on-wire", f"{e.src}->{e.dst}"))
        if e.dst == "aid" and _carries_scalar(e, secrets.r_main):
            report.violations.append(Violation(e.msg_id, "r_main-to-aid", f"{e.src}->{e.dst}"))
        if e.dst == "main" and _carries_scalar(e, secrets.r_aid):
            report.violations.append(Violation(e.msg_id, "r_aid-to-main", f"{e.src}->{e.dst}"))
        if e.src == "main" and e.dst == "user" and _carries_scalar(e, secrets.r_aid):
            report.violations.append(Violation(e.msg_id, "r_aid-in-result", f"{e.src}->{e.dst}"))
        for w in secrets.keywords:
            if _carries_keyword(e, w):
                report.violations.append(Violation(e.msg_id, "plaintext-keyword", f"{e.src}->{e.dst}"))
                break
    if secrets.construction == "first":
        report.notes.append(
            "single-server trapdoors are a deterministic function of the keyword; "
            "repeated searches for one keyword are linkable"
        )
    return report
