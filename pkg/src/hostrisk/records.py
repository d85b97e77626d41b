"""Raw record types: SIEM alert rows and analyst investigation notes."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone


@dataclass(frozen=True)
class EventRecord:
    """One alert/log row: host, event code, UTC timestamp, severity 1-10."""

    host_id: str
    event_id: str
    time: datetime
    severity: int

    def __post_init__(self):
        if not 1 <= self.severity <= 10:
            raise ValueError(f"severity {self.severity} outside 1-10")
        if self.time.tzinfo is None:
            object.__setattr__(
                self, "time", self.time.replace(tzinfo=timezone.utc)
            )


@dataclass(frozen=True)
class AnalystNote:
    """Free-text investigation note attached to a host."""

    host_id: str
    time: datetime
    text: str

    def __post_init__(self):
        if not self.host_id:
            raise ValueError("note host_id must be nonempty")
        if self.time.tzinfo is None:
            object.__setattr__(
                self, "time", self.time.replace(tzinfo=timezone.utc)
            )
