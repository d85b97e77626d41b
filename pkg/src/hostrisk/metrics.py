"""Ranking-quality metrics: ROC/AUC, detection rate, and lift.

Detection rate and lift follow the top-p% convention: sort by score
descending (host id breaks ties), select floor(N*p/100) hosts with a minimum
of one, and compare captured positives against the population.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["ScoredHost", "EvalCurves", "roc_points", "auc",
           "detection_rate", "lift", "evaluate", "DEFAULT_TOP_PERCENTS"]

DEFAULT_TOP_PERCENTS = (5.0, 10.0, 15.0, 20.0)


@dataclass(frozen=True)
class ScoredHost:
    host_id: str
    score: float
    label: int

    def __post_init__(self):
        if not math.isfinite(self.score):
            raise ValueError("score must be finite")
        if self.label not in (0, 1):
            raise ValueError("label must be 0 or 1")


@dataclass(frozen=True)
class EvalCurves:
    roc: tuple[tuple[float, float], ...]
    auc: float
    detection_rates: dict
    lifts: dict


def roc_points(scored: list[ScoredHost]) -> list[tuple[float, float]]:
    """(FPR, TPR) points from a descending threshold sweep.

    Tied scores collapse into a single threshold step; the curve is anchored
    at (0, 0) and (1, 1).
    """
    pos = sum(s.label for s in scored)
    neg = len(scored) - pos
    if pos == 0 or neg == 0:
        raise ValueError("undefined ROC: need at least one of each class")
    ordered = sorted(scored, key=lambda s: -s.score)
    points = [(0.0, 0.0)]
    tp = fp = 0
    i = 0
    while i < len(ordered):
        j = i
        while j < len(ordered) and ordered[j].score == ordered[i].score:
            tp += ordered[j].label
            fp += 1 - ordered[j].label
            j += 1
        points.append((fp / neg, tp / pos))
        i = j
    if points[-1] != (1.0, 1.0):
        points.append((1.0, 1.0))
    return points


def auc(roc: list[tuple[float, float]]) -> float:
    """Trapezoidal area under the ROC points."""
    xs = [p[0] for p in roc]
    if any(b < a for a, b in zip(xs, xs[1:])):
        raise ValueError("ROC x coordinates must be non-decreasing")
    total = 0.0
    for (x0, y0), (x1, y1) in zip(roc, roc[1:]):
        total += (y1 + y0) / 2.0 * (x1 - x0)
    return total


def _select_top(scored: list[ScoredHost], top_percent: float):
    if not 0.0 < top_percent <= 100.0:
        raise ValueError("top_percent must be in (0, 100]")
    total_pos = sum(s.label for s in scored)
    if total_pos == 0:
        raise ValueError("no positive labels")
    ordered = sorted(scored, key=lambda s: (-s.score, s.host_id))
    n_selected = max(1, math.floor(len(scored) * top_percent / 100.0))
    captured = sum(s.label for s in ordered[:n_selected])
    return captured, n_selected, total_pos, len(scored)


def detection_rate(scored: list[ScoredHost], top_percent: float) -> float:
    """Fraction of all risky hosts captured in the top p% of predictions."""
    captured, _, total_pos, _ = _select_top(scored, top_percent)
    return captured / total_pos


def lift(scored: list[ScoredHost], top_percent: float) -> float:
    """Risky concentration in the top p% relative to overall prevalence."""
    captured, n_selected, total_pos, n = _select_top(scored, top_percent)
    return (captured / n_selected) / (total_pos / n)


def evaluate(
    scored: list[ScoredHost],
    top_percents: tuple[float, ...] = DEFAULT_TOP_PERCENTS,
) -> EvalCurves:
    """ROC, AUC, and detection/lift at every requested prediction fraction."""
    roc = roc_points(scored)
    return EvalCurves(
        roc=tuple(roc),
        auc=auc(roc),
        detection_rates={p: detection_rate(scored, p) for p in top_percents},
        lifts={p: lift(scored, p) for p in top_percents},
    )


def auc_from_scores(scores: np.ndarray, labels: np.ndarray) -> float:
    """Convenience AUC over parallel arrays (hosts named by index)."""
    scored = [ScoredHost(str(i), float(s), int(l))
              for i, (s, l) in enumerate(zip(scores, labels))]
    return auc(roc_points(scored))
