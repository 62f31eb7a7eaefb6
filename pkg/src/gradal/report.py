"""Check reports: verdict aggregation and deterministic serialization."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

PASS = "pass"
FAIL = "fail"
UNVERIFIABLE = "unverifiable"
INFO = "info"

_STATUSES = (PASS, FAIL, UNVERIFIABLE, INFO)


@dataclass(frozen=True)
class Entry:
    check: str
    status: str
    location: str = ""
    message: str = ""
    offending: str = ""
    reason: str = ""

    def __post_init__(self):
        if self.status not in _STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        if self.status == FAIL and not self.location:
            raise ValueError("a failing entry must name its location")

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "status": self.status,
            "location": self.location,
            "message": self.message,
            "offending": self.offending,
            "reason": self.reason,
        }


@dataclass
class Report:
    """Ordered list of check entries.

    The verdict is ``fail`` if any entry failed, otherwise ``unverifiable``
    if any entry could not be decided, otherwise ``pass``.  ``info``
    entries never affect the verdict.
    """

    subject: str = ""
    entries: list[Entry] = field(default_factory=list)

    def add(self, check, status, location="", message="", offending="", reason="") -> Entry:
        entry = Entry(check, status, location, message, offending, reason)
        self.entries.append(entry)
        return entry

    def extend(self, other: Report) -> Report:
        self.entries.extend(other.entries)
        return self

    @property
    def verdict(self) -> str:
        statuses = {e.status for e in self.entries}
        if FAIL in statuses:
            return FAIL
        if UNVERIFIABLE in statuses:
            return UNVERIFIABLE
        return PASS

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    @property
    def ok(self) -> bool:
        """True unless some entry failed."""
        return self.verdict != FAIL

    def failures(self) -> list[Entry]:
        return [e for e in self.entries if e.status == FAIL]

    def __bool__(self):
        return self.passed

    def to_dict(self, meta: dict | None = None) -> dict:
        from . import __version__

        return {
            "verdict": self.verdict,
            "subject": self.subject,
            "tool": {"name": "gradal", "version": __version__},
            "meta": dict(meta or {}),
            "entries": [e.to_dict() for e in self.entries],
        }

    def to_json(self, meta: dict | None = None) -> str:
        return json.dumps(self.to_dict(meta), separators=(",", ":"), ensure_ascii=False) + "\n"

    def to_text(self, meta: dict | None = None) -> str:
        lines = [f"verdict: {self.verdict}"]
        if self.subject:
            lines.append(f"subject: {self.subject}")
        for key, value in (meta or {}).items():
            lines.append(f"{key}: {value}")
        for e in self.entries:
            line = f"  [{e.status}] {e.check}"
            if e.location:
                line += f" @ {e.location}"
            if e.message:
                line += f": {e.message}"
            if e.reason:
                line += f" [{e.reason}]"
            lines.append(line)
            if e.offending:
                lines.append(f"      offending: {e.offending}")
        return "\n".join(lines) + "\n"
