"""Comparison of classifier output against listener judgments.

Listener responses aggregate to one label per clip with a two-best
confidence: the winning label's percentage over 100 plus the runner-up's
percentage, which stays in [0, 1] and rewards clear majorities. Classifier
confidence applies the same two-best idea to posterior probabilities. The
clip-level label sequences are then compared with a Pearson correlation and
its t statistic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .dataio import LISTENER_LABELS, ListenerResponse
from .errors import DataAnomalyError, MissingDataError, NumericError, ValidationError

STYLE_LABELS = ("H", "C", "T")
LABEL_ENCODING = {"H": 1.0, "C": 0.0, "T": -1.0}
T_CRITICAL_5PCT = 1.96


@dataclass(frozen=True)
class LabeledConfidence:
    """A categorical style label with a confidence in [0, 1]."""

    clip_id: str
    label: str
    confidence: float
    source: str  # "Listeners" or "Classifier"

    def __post_init__(self):
        if self.label not in STYLE_LABELS:
            raise ValidationError(f"label must be one of {STYLE_LABELS}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValidationError(f"confidence {self.confidence} outside [0, 1]")


def aggregate_listeners(
    responses: list[ListenerResponse], clip_id: str
) -> LabeledConfidence:
    """Majority label and two-best confidence for one clip.

    Confidence is p1 / (100 + p2) over the top-two response percentages, so
    unanimity scores 1.0. The majority must land on H, C or T; a Not-X or
    Not-Sure majority means the data violates the method's assumption and is
    reported as an anomaly rather than silently relabeled. Ties between top
    labels go to the alphabetically first of the tied.
    """
    picked = [r for r in responses if r.clip_id == clip_id]
    if not picked:
        raise MissingDataError(f"no listener responses for clip {clip_id!r}")
    counts = {label: 0 for label in LISTENER_LABELS}
    for r in picked:
        counts[r.label] += 1
    percents = {label: 100.0 * c / len(picked) for label, c in counts.items()}
    p1 = max(percents.values())
    winner = min(label for label, p in percents.items() if p == p1)
    if winner not in STYLE_LABELS:
        raise DataAnomalyError(
            f"clip {clip_id!r}: majority listener label is {winner!r}, "
            "not a style label"
        )
    p2 = max(p for label, p in percents.items() if label != winner)
    return LabeledConfidence(
        clip_id=clip_id,
        label=winner,
        confidence=p1 / (100.0 + p2),
        source="Listeners",
    )


def classifier_confidence(posteriors) -> float:
    """Two-best confidence of a posterior distribution: P1 / (1 + P2)."""
    p = np.asarray(posteriors, dtype=np.float64)
    if p.shape != (3,) or np.any(p < -1e-12):
        raise ValueError("posteriors must be 3 non-negative probabilities")
    if abs(float(p.sum()) - 1.0) > 1e-9:
        raise ValueError(f"posteriors sum to {p.sum():.12f}, not 1")
    top_two = np.sort(p)[::-1][:2]
    return float(top_two[0] / (1.0 + top_two[1]))


class CorrelationResult(NamedTuple):
    r: float
    t: float
    n: int
    significant: bool


def t_statistic(r: float, n: int) -> float:
    """t value of a Pearson correlation r over n pairs."""
    if abs(r) >= 1.0:
        return math.inf if r > 0 else -math.inf
    return r * math.sqrt(n - 2) / math.sqrt(1.0 - r * r)


def label_correlation(
    a: list[LabeledConfidence], b: list[LabeledConfidence]
) -> CorrelationResult:
    """Pearson correlation between two label sequences over the same clips.

    Labels are encoded H=1, C=0, T=-1 and paired by clip id. Significance is
    judged against the two-sided 5% critical value 1.96.
    """
    by_id_a = {lc.clip_id: lc for lc in a}
    by_id_b = {lc.clip_id: lc for lc in b}
    missing_a = sorted(set(by_id_b) - set(by_id_a))
    missing_b = sorted(set(by_id_a) - set(by_id_b))
    if missing_a or missing_b:
        raise ValidationError(
            "clip sets differ: "
            + (f"missing from first: {missing_a} " if missing_a else "")
            + (f"missing from second: {missing_b}" if missing_b else "")
        )
    ids = sorted(by_id_a)
    xs = np.array([LABEL_ENCODING[by_id_a[i].label] for i in ids])
    ys = np.array([LABEL_ENCODING[by_id_b[i].label] for i in ids])
    if np.std(xs) == 0 or np.std(ys) == 0:
        raise NumericError("correlation undefined: a label sequence is constant")
    r = float(np.corrcoef(xs, ys)[0, 1])
    t = t_statistic(r, len(ids))
    return CorrelationResult(r=r, t=t, n=len(ids), significant=abs(t) > T_CRITICAL_5PCT)


def category_counts(responses: list[ListenerResponse]) -> dict[str, int]:
    """Responses per listener training category, in canonical order."""
    from .dataio import LISTENER_CATEGORIES

    counts = {c: 0 for c in LISTENER_CATEGORIES}
    for r in responses:
        counts[r.category] += 1
    return counts


def write_agreement_report(
    listeners: list[LabeledConfidence],
    classifier: list[LabeledConfidence],
    result: CorrelationResult,
    path: str,
    counts: dict[str, int] | None = None,
) -> None:
    """Per-clip two-source labels plus the correlation summary block.

    Listener-category tallies, when given, are appended as plain counts; no
    per-category modelling happens here.
    """
    by_id = {lc.clip_id: lc for lc in classifier}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("clip_id,listener_label,listener_conf,classifier_label,classifier_conf\n")
        for lc in listeners:
            cc = by_id[lc.clip_id]
            fh.write(
                f"{lc.clip_id},{lc.label},{lc.confidence:.6f},"
                f"{cc.label},{cc.confidence:.6f}\n"
            )
        fh.write("\n")
        fh.write(f"r,{result.r:.6f}\n")
        t_text = "inf (perfect agreement)" if math.isinf(result.t) else f"{result.t:.6f}"
        fh.write(f"t,{t_text}\n")
        fh.write(f"n,{result.n}\n")
        fh.write(f"significant_at_5pct,{'yes' if result.significant else 'no'}\n")
        for category, count in (counts or {}).items():
            fh.write(f"responses_{category},{count}\n")
