"""Synthetic event/note generation for the desk-scale benchmark.

Risky hosts emit more events, more high-severity events, extra malware-style
codes, weekend activity, and burstier arrival patterns, so every feature
category carries signal.  Notes are synthesized from ground truth so that
lexicon labeling recovers it exactly on the labeled subset.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

import numpy as np

from .records import AnalystNote, EventRecord

__all__ = ["SynthConfig", "generate_synthetic", "DEFAULT_AS_OF"]

# Monday, so the trailing 14-day window contains two full weekends.
DEFAULT_AS_OF = datetime(2024, 1, 15, 0, 0, 0, tzinfo=timezone.utc)

# (code, weight when normal, weight when risky)
DEFAULT_VOCABULARY = (
    ("SYS0206", 0.02, 0.12),   # Malware Not Remediated
    ("AV0012", 0.10, 0.12),    # Malware Remediated
    ("IDS0103", 0.04, 0.14),   # Suspicious Outbound Connection
    ("DNS0310", 0.06, 0.12),   # DNS Query to Newly Registered Domain
    ("AUTH0042", 0.08, 0.12),  # Repeated Authentication Failure
    ("FW0007", 0.20, 0.14),    # Firewall Policy Violation
    ("VPN0005", 0.27, 0.12),   # VPN Login
    ("SCAN0001", 0.23, 0.12),  # Vulnerability Scan Finding
)

RISKY_NOTE_TEMPLATES = (
    "Host made connections with malicious domains.",
    "Advanced malware infection detected on this host.",
    "Alert escalated to incident response after review.",
    "SYS0206 malware not remediated after repeated cleaning attempts.",
)
NORMAL_NOTE_TEMPLATES = (
    "Unable to gather supporting evidence for this alert.",
    "Investigated and determined to be a false positive.",
    "Activity confirmed as non-malicious maintenance work.",
    "No evidence of compromise found in surrounding logs.",
)


@dataclass(frozen=True)
class SynthConfig:
    n_hosts: int = 4000
    risky_fraction: float = 0.02
    days: int = 14
    seed: int = 0
    as_of: datetime = DEFAULT_AS_OF
    vocabulary: tuple = DEFAULT_VOCABULARY
    normal_rate_per_day: float = 3.0
    risky_rate_per_day: float = 4.5
    normal_high_sev_prob: float = 0.06
    risky_high_sev_prob: float = 0.16
    normal_weekend_prob: float = 0.30
    note_coverage: float = 0.95  # chance an alerted normal host gets a note

    def __post_init__(self):
        if not 0.0 < self.risky_fraction < 1.0:
            raise ValueError("risky_fraction must be in (0, 1)")
        if int(self.n_hosts * self.risky_fraction) < 1:
            raise ValueError("configuration yields zero risky hosts")
        if self.days < 1 or self.n_hosts < 2:
            raise ValueError("need at least 2 hosts and 1 day")


def _severities(rng, n, high_prob) -> np.ndarray:
    """Severity 1-10; with probability high_prob draw from {8, 9, 10}."""
    high = rng.random(n) < high_prob
    sev = rng.integers(1, 8, size=n)
    sev[high] = rng.integers(8, 11, size=int(high.sum()))
    return sev


def generate_synthetic(cfg: SynthConfig):
    """Returns (events sorted by time, notes, ground-truth label dict)."""
    rng = np.random.default_rng(cfg.seed)
    width = len(str(cfg.n_hosts - 1))
    hosts = [f"host-{i:0{width}d}" for i in range(cfg.n_hosts)]
    n_risky = int(cfg.n_hosts * cfg.risky_fraction)
    risky_set = set(rng.choice(cfg.n_hosts, size=n_risky, replace=False))
    truth = {h: int(i in risky_set) for i, h in enumerate(hosts)}

    codes = [v[0] for v in cfg.vocabulary]
    w_normal = np.array([v[1] for v in cfg.vocabulary], dtype=float)
    w_normal /= w_normal.sum()
    w_risky = np.array([v[2] for v in cfg.vocabulary], dtype=float)
    w_risky /= w_risky.sum()

    start = cfg.as_of - timedelta(days=cfg.days)
    events: list[EventRecord] = []
    alerted: dict[str, bool] = {}

    weekend_day = np.array([
        (start + timedelta(days=d)).weekday() >= 5 for d in range(cfg.days)
    ])
    for i, host in enumerate(hosts):
        risky = i in risky_set
        rate = cfg.risky_rate_per_day if risky else cfg.normal_rate_per_day
        weights = w_risky if risky else w_normal
        high_prob = cfg.risky_high_sev_prob if risky else cfg.normal_high_sev_prob

        counts = rng.poisson(rate, size=cfg.days)
        if not risky:
            # normal hosts are mostly quiet on weekends
            skip = weekend_day & (rng.random(cfg.days) > cfg.normal_weekend_prob)
            counts[skip] = 0
        n_total = int(counts.sum())
        if n_total == 0:
            alerted[host] = False
            continue
        day_idx = np.repeat(np.arange(cfg.days), counts)
        if risky:
            # bursts: one cluster anchor per day, short gaps around it
            anchors = rng.random(cfg.days) * 20.0
            offsets = anchors[day_idx] + rng.exponential(0.15, size=n_total)
        else:
            offsets = rng.random(n_total) * 24.0
        offsets = np.clip(offsets, 0.0, 23.999)
        idx = rng.choice(len(codes), size=n_total, p=weights)
        sev = _severities(rng, n_total, high_prob)
        for d, off, ci, s in zip(day_idx, offsets, idx, sev):
            events.append(EventRecord(
                host, codes[ci],
                start + timedelta(days=int(d), hours=float(off)), int(s),
            ))
        alerted[host] = bool((sev >= 7).any()) or (
            "SYS0206" in codes and bool((idx == codes.index("SYS0206")).any())
        )

    events.sort(key=lambda e: (e.time, e.host_id))

    # note timestamp: shortly after the host's first event, as if the analyst
    # wrote it up at triage time (hosts without events fall back to as_of)
    first_seen: dict[str, datetime] = {}
    for e in events:
        first_seen.setdefault(e.host_id, e.time)
    notes: list[AnalystNote] = []
    for host in hosts:
        when = min(first_seen.get(host, cfg.as_of) + timedelta(hours=1),
                   cfg.as_of)
        if truth[host]:
            text = RISKY_NOTE_TEMPLATES[rng.integers(len(RISKY_NOTE_TEMPLATES))]
            notes.append(AnalystNote(host, when, text))
        elif alerted[host] and rng.random() < cfg.note_coverage:
            text = NORMAL_NOTE_TEMPLATES[rng.integers(len(NORMAL_NOTE_TEMPLATES))]
            notes.append(AnalystNote(host, when, text))
    return events, notes, truth
