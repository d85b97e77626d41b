"""Host labels mined from analyst notes with a keyword lexicon.

A note matching any risky phrase marks the host risky; risky wins over normal
when notes conflict.  Hosts with no matching notes stay unlabeled.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .features import FeatureMatrix
from .records import AnalystNote

__all__ = ["LabelLexicon", "classify_note", "attach_labels", "default_lexicon",
           "RISKY", "NORMAL", "UNLABELED"]

RISKY = "risky"
NORMAL = "normal"
UNLABELED = "unlabeled"

DEFAULT_RISKY_PHRASES = (
    "malicious domains",
    "advanced malware infection",
    "malware not remediated",
    "escalated",
    "confirmed compromise",
    "command and control",
    "verified true positive",
)
DEFAULT_NORMAL_PHRASES = (
    "unable to gather supporting evidence",
    "false positive",
    "non-malicious",
    "no evidence of compromise",
    "benign activity",
    "remediated and closed",
)


def _normalize(text: str) -> str:
    return re.sub(r"\s+", " ", text.strip().lower())


@dataclass(frozen=True)
class LabelLexicon:
    risky_phrases: tuple[str, ...]
    normal_phrases: tuple[str, ...]

    def __post_init__(self):
        risky = tuple(_normalize(p) for p in self.risky_phrases)
        normal = tuple(_normalize(p) for p in self.normal_phrases)
        if not risky or not normal:
            raise ValueError("lexicon phrase lists must be nonempty")
        if set(risky) & set(normal):
            raise ValueError("risky and normal phrase lists overlap")
        object.__setattr__(self, "risky_phrases", risky)
        object.__setattr__(self, "normal_phrases", normal)

    @classmethod
    def from_text(cls, text: str) -> "LabelLexicon":
        """Parse the lexicon file format: [risky] / [normal] sections, one
        phrase per line, # comments ignored."""
        section = None
        risky, normal = [], []
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.lower() == "[risky]":
                section = risky
            elif line.lower() == "[normal]":
                section = normal
            elif section is None:
                raise ValueError(f"phrase before any section header: {line!r}")
            else:
                section.append(line)
        return cls(tuple(risky), tuple(normal))

    def to_text(self) -> str:
        lines = ["[risky]", *self.risky_phrases, "", "[normal]",
                 *self.normal_phrases, ""]
        return "\n".join(lines)


def default_lexicon() -> LabelLexicon:
    return LabelLexicon(DEFAULT_RISKY_PHRASES, DEFAULT_NORMAL_PHRASES)


def classify_note(note: AnalystNote, lex: LabelLexicon) -> str:
    """Case-insensitive substring match; risky dominates normal on conflict."""
    text = _normalize(note.text)
    if any(p in text for p in lex.risky_phrases):
        return RISKY
    if any(p in text for p in lex.normal_phrases):
        return NORMAL
    return UNLABELED


def attach_labels(
    fm: FeatureMatrix,
    notes: list[AnalystNote],
    lex: LabelLexicon,
) -> tuple[FeatureMatrix, int]:
    """Aggregate per-host note verdicts into a 1/0/NaN label column.

    Any risky note makes the host risky (1); otherwise any normal note makes
    it normal (0); hosts without matching notes stay NaN.  Returns the
    labeled matrix and the count of notes for unknown hosts (ignored).
    """
    known = set(fm.host_ids)
    verdicts: dict[str, set] = {h: set() for h in fm.host_ids}
    unknown = 0
    for note in notes:
        if note.host_id not in known:
            unknown += 1
            continue
        verdicts[note.host_id].add(classify_note(note, lex))
    labels = np.full(len(fm.host_ids), np.nan)
    for i, host in enumerate(fm.host_ids):
        v = verdicts[host]
        if RISKY in v:
            labels[i] = 1.0
        elif NORMAL in v:
            labels[i] = 0.0
    labeled = FeatureMatrix(
        fm.host_ids, fm.values, fm.schema,
        fm.window_start, fm.window_end, labels,
    )
    return labeled, unknown
