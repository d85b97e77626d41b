"""Per-host feature extraction over security event streams.

Four descriptor categories feed the model: statistical summaries over time
windows, binary indicators (weekend activity), temporal statistics (arrival
rate, inter-arrival gaps), and a relational column from weighted PageRank on
the host-event graph.  All windows and the weekend rule use UTC.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timedelta

import numpy as np

from .graph import HostEventGraph, build_host_event_graph, weighted_pagerank
from .records import EventRecord

__all__ = [
    "FeatureDescriptor",
    "FeatureSchema",
    "FeatureMatrix",
    "default_schema",
    "summary_features",
    "indicator_features",
    "temporal_features",
    "relational_features",
    "assemble_feature_matrix",
]

CATEGORIES = ("summary", "indicator", "temporal", "relational")

# Category each descriptor kind belongs to.
KIND_CATEGORY = {
    "event_count": "summary",
    "total_count": "summary",
    "severity_count": "summary",
    "weekend_indicator": "indicator",
    "arrival_rate": "temporal",
    "mean_gap": "temporal",
    "pagerank": "relational",
}

DEFAULT_EVENT_VOCABULARY = (
    "SYS0206",   # Malware Not Remediated
    "AV0012",    # Malware Remediated
    "IDS0103",   # Suspicious Outbound Connection
    "DNS0310",   # DNS Query to Newly Registered Domain
    "AUTH0042",  # Repeated Authentication Failure
    "FW0007",    # Firewall Policy Violation
    "VPN0005",   # VPN Login
    "SCAN0001",  # Vulnerability Scan Finding
)


@dataclass(frozen=True)
class FeatureDescriptor:
    name: str
    kind: str
    params: tuple = ()  # sorted (key, value) pairs, hashable

    def __post_init__(self):
        if self.kind not in KIND_CATEGORY:
            raise ValueError(f"unknown descriptor kind {self.kind!r}")
        object.__setattr__(self, "params", tuple(sorted(self.params)))

    @property
    def category(self) -> str:
        return KIND_CATEGORY[self.kind]

    def param(self, key, default=None):
        return dict(self.params).get(key, default)


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered, uniquely named descriptor list with a stable content hash."""

    descriptors: tuple[FeatureDescriptor, ...]

    def __post_init__(self):
        names = [d.name for d in self.descriptors]
        if len(set(names)) != len(names):
            raise ValueError("feature names must be unique")

    def __len__(self) -> int:
        return len(self.descriptors)

    @property
    def names(self) -> list[str]:
        return [d.name for d in self.descriptors]

    @property
    def schema_id(self) -> str:
        payload = json.dumps(
            [[d.name, d.kind, list(map(list, d.params))] for d in self.descriptors],
            separators=(",", ":"),
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def by_category(self, category: str) -> list[FeatureDescriptor]:
        return [d for d in self.descriptors if d.category == category]

    def to_json(self) -> str:
        return json.dumps(
            {
                "features": [
                    {"name": d.name, "category": d.category, "kind": d.kind,
                     "params": dict(d.params)}
                    for d in self.descriptors
                ]
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "FeatureSchema":
        doc = json.loads(text)
        descriptors = tuple(
            FeatureDescriptor(
                entry["name"], entry["kind"],
                tuple(entry.get("params", {}).items()),
            )
            for entry in doc["features"]
        )
        return cls(descriptors)


def default_schema(
    vocabulary: tuple[str, ...] = DEFAULT_EVENT_VOCABULARY,
) -> FeatureSchema:
    """The shipped 40-descriptor schema across all four categories."""
    d = []
    for code in vocabulary:
        d.append(FeatureDescriptor(
            f"count_{code}_24h", "event_count",
            (("event_id", code), ("window_hours", 24))))
    for code in vocabulary:
        d.append(FeatureDescriptor(
            f"count_{code}_7d", "event_count",
            (("event_id", code), ("window_hours", 168))))
    for hours, tag in ((24, "24h"), (72, "3d"), (168, "7d"), (336, "14d")):
        d.append(FeatureDescriptor(
            f"count_total_{tag}", "total_count", (("window_hours", hours),)))
    for thr, hours, tag in ((7, 24, "24h"), (5, 24, "24h"), (7, 168, "7d"),
                            (5, 168, "7d"), (7, 336, "14d"), (5, 336, "14d")):
        d.append(FeatureDescriptor(
            f"count_sev_gt{thr}_{tag}", "severity_count",
            (("threshold", thr), ("window_hours", hours))))
    for code in vocabulary:
        d.append(FeatureDescriptor(
            f"weekend_{code}_7d", "weekend_indicator",
            (("event_id", code), ("window_hours", 168))))
    d.append(FeatureDescriptor(
        "weekend_any_7d", "weekend_indicator", (("window_hours", 168),)))
    for hours, tag in ((24, "24h"), (168, "7d")):
        d.append(FeatureDescriptor(
            f"arrival_rate_{tag}", "arrival_rate", (("window_hours", hours),)))
        d.append(FeatureDescriptor(
            f"mean_gap_{tag}", "mean_gap", (("window_hours", hours),)))
    d.append(FeatureDescriptor("pagerank", "pagerank"))
    return FeatureSchema(tuple(d))


@dataclass(frozen=True)
class FeatureMatrix:
    """Host-aligned feature rows plus the observation window they cover."""

    host_ids: tuple[str, ...]
    values: np.ndarray
    schema: FeatureSchema
    window_start: datetime
    window_end: datetime
    labels: np.ndarray | None = None  # 1/0/nan once attached

    def __post_init__(self):
        if self.values.shape != (len(self.host_ids), len(self.schema)):
            raise ValueError("matrix shape does not match hosts x schema")
        if np.isnan(self.values).any():
            raise ValueError("feature values must not contain NaN")


def _check_sorted(events: list[EventRecord]):
    for prev, cur in zip(events, events[1:]):
        if cur.time < prev.time:
            raise ValueError("events must be sorted by time ascending")


def _in_window(e: EventRecord, as_of: datetime, hours: float) -> bool:
    return as_of - timedelta(hours=hours) < e.time <= as_of


def summary_features(
    events: list[EventRecord],
    host: str,
    entries: list[FeatureDescriptor],
    as_of: datetime,
) -> list[float]:
    """Windowed counts: per event code, total, and high-severity."""
    _check_sorted(events)
    mine = [e for e in events if e.host_id == host]
    out = []
    for d in entries:
        hours = d.param("window_hours")
        windowed = [e for e in mine if _in_window(e, as_of, hours)]
        if d.kind == "event_count":
            out.append(float(sum(e.event_id == d.param("event_id")
                                 for e in windowed)))
        elif d.kind == "total_count":
            out.append(float(len(windowed)))
        elif d.kind == "severity_count":
            thr = d.param("threshold")
            out.append(float(sum(e.severity > thr for e in windowed)))
        else:
            raise ValueError(f"{d.kind} is not a summary descriptor")
    return out


def indicator_features(
    events: list[EventRecord],
    host: str,
    entries: list[FeatureDescriptor],
    as_of: datetime,
) -> list[float]:
    """1 iff the configured code occurs on a UTC Saturday/Sunday in window."""
    _check_sorted(events)
    mine = [e for e in events if e.host_id == host]
    out = []
    for d in entries:
        if d.kind != "weekend_indicator":
            raise ValueError(f"{d.kind} is not an indicator descriptor")
        code = d.param("event_id")
        hours = d.param("window_hours")
        hit = any(
            _in_window(e, as_of, hours)
            and e.time.weekday() >= 5
            and (code is None or e.event_id == code)
            for e in mine
        )
        out.append(1.0 if hit else 0.0)
    return out


def temporal_features(
    events: list[EventRecord],
    host: str,
    entries: list[FeatureDescriptor],
    as_of: datetime,
) -> list[float]:
    """Arrival rate (events/hour) and mean inter-arrival gap (hours).

    The gap statistic is the harmonic mean of consecutive gaps, so bursts of
    closely spaced events pull it down even when the overall span is wide
    (the arithmetic mean would just be the reciprocal of the rate).  Both
    are 0 when fewer than two events fall inside the window.
    """
    _check_sorted(events)
    mine = [e for e in events if e.host_id == host]
    out = []
    for d in entries:
        hours = d.param("window_hours")
        times = [e.time for e in mine if _in_window(e, as_of, hours)]
        if len(times) < 2 or times[-1] == times[0]:
            out.append(0.0)
            continue
        span_hours = (times[-1] - times[0]).total_seconds() / 3600.0
        if d.kind == "arrival_rate":
            out.append((len(times) - 1) / span_hours)
        elif d.kind == "mean_gap":
            gaps = [(b - a).total_seconds() / 3600.0
                    for a, b in zip(times, times[1:])]
            if any(g == 0.0 for g in gaps):
                out.append(0.0)  # harmonic-mean limit for coincident events
            else:
                out.append(len(gaps) / sum(1.0 / g for g in gaps))
        else:
            raise ValueError(f"{d.kind} is not a temporal descriptor")
    return out


def relational_features(
    pagerank_scores: dict,
    host: str,
    entries: list[FeatureDescriptor],
) -> list[float]:
    """PageRank score of the host; 0 when the host is absent from the graph."""
    out = []
    for d in entries:
        if d.kind != "pagerank":
            raise ValueError(f"{d.kind} is not a relational descriptor")
        out.append(float(pagerank_scores.get(host, 0.0)))
    return out


def assemble_feature_matrix(
    events: list[EventRecord],
    hosts: list[str],
    schema: FeatureSchema,
    as_of: datetime,
) -> FeatureMatrix:
    """Run every extractor for every host and return the schema-aligned matrix.

    Hosts with no events get all-zero rows except for the PageRank teleport
    share (they are included in the graph as isolated nodes).  Rows are
    ordered by host id.
    """
    if len(set(hosts)) != len(hosts):
        raise ValueError("duplicate host ids")
    events = sorted(events, key=lambda e: e.time)
    hosts = sorted(hosts)

    max_hours = max(
        (d.param("window_hours", 0) for d in schema.descriptors), default=0
    )
    windowed = [e for e in events if _in_window(e, as_of, max_hours)]
    g = build_host_event_graph(windowed)
    for h in hosts:
        g.add_node(h)
    scores = weighted_pagerank(g) if g.n_nodes else {}

    by_host: dict[str, list[EventRecord]] = {h: [] for h in hosts}
    for e in events:
        if e.host_id in by_host:
            by_host[e.host_id].append(e)

    rows = np.zeros((len(hosts), len(schema)))
    for r, host in enumerate(hosts):
        mine = by_host[host]
        values = _extract_row(mine, host, schema, as_of, scores)
        rows[r] = values
    return FeatureMatrix(
        tuple(hosts), rows, schema,
        as_of - timedelta(hours=max_hours), as_of,
    )


def _extract_row(
    host_events: list[EventRecord],
    host: str,
    schema: FeatureSchema,
    as_of: datetime,
    pagerank_scores: dict,
) -> list[float]:
    row = []
    for d in schema.descriptors:
        if d.category == "summary":
            row.extend(summary_features(host_events, host, [d], as_of))
        elif d.category == "indicator":
            row.extend(indicator_features(host_events, host, [d], as_of))
        elif d.category == "temporal":
            row.extend(temporal_features(host_events, host, [d], as_of))
        else:
            row.extend(relational_features(pagerank_scores, host, [d]))
    return row
