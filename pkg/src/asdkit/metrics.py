"""Average-precision metrics over framewise detections.

Every (track, frame) pair on a ground-truth face track is one detection, so
no box matching is needed: a detection is a score plus a ground-truth flag.
Detections sharing a score form one threshold group, which makes both APs
independent of input order.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .datamodel import FrameScoreStream, SpeakingLabel
from .exceptions import LengthMismatch, MissingLabels, NoPositives

__all__ = [
    "Detection",
    "PRCurve",
    "EvalReport",
    "pr_curve",
    "voc2012_ap",
    "binary_ap",
    "metric_function",
    "pool_detections",
    "evaluate",
]


@dataclass(frozen=True)
class Detection:
    score: float
    is_positive: bool


@dataclass(frozen=True)
class PRCurve:
    thresholds: np.ndarray
    precision: np.ndarray
    recall: np.ndarray

    def to_dict(self) -> dict:
        return {
            "thresholds": self.thresholds.tolist(),
            "precision": self.precision.tolist(),
            "recall": self.recall.tolist(),
        }


def _as_arrays(scores, labels=None) -> tuple[np.ndarray, np.ndarray]:
    if labels is None:
        dets = list(scores)
        scores = [d.score for d in dets]
        labels = [d.is_positive for d in dets]
    s = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(labels).astype(bool).ravel()
    if s.shape != y.shape:
        raise LengthMismatch(f"{s.size} scores but {y.size} labels")
    if not np.all(np.isfinite(s)):
        raise ValueError("detection scores must be finite")
    return s, y


def pr_curve(scores, labels=None, n_positives: int | None = None) -> PRCurve:
    """Grouped precision/recall at every distinct score, highest first.

    ``scores`` may also be a sequence of :class:`Detection` with ``labels``
    omitted. ``n_positives`` defaults to the number of positive detections.
    """
    s, y = _as_arrays(scores, labels)
    n_pos_det = int(y.sum())
    if n_positives is None:
        n_positives = n_pos_det
    if n_positives < n_pos_det:
        raise ValueError(f"n_positives={n_positives} is below the {n_pos_det} positive detections")
    if n_positives < 1:
        raise NoPositives("average precision is undefined without positives")
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    tp = np.cumsum(y)
    fp = np.cumsum(~y)
    # last index of each tie group
    ends = np.flatnonzero(np.r_[s[1:] != s[:-1], True])
    tp, fp = tp[ends], fp[ends]
    return PRCurve(
        thresholds=s[ends],
        precision=tp / (tp + fp),
        recall=tp / n_positives,
    )


def binary_ap(scores, labels=None, n_positives: int | None = None) -> float:
    """Step-sum AP: sum over thresholds of (R_n - R_{n-1}) * P_n, no interpolation."""
    c = pr_curve(scores, labels, n_positives)
    return float(np.sum(np.diff(c.recall, prepend=0.0) * c.precision))


def voc2012_ap(scores, labels=None, n_positives: int | None = None) -> float:
    """VOC2012 AP: area under the monotone (right-maximum) precision envelope."""
    c = pr_curve(scores, labels, n_positives)
    envelope = np.maximum.accumulate(c.precision[::-1])[::-1]
    return float(np.sum(np.diff(c.recall, prepend=0.0) * envelope))


def metric_function(kind: str):
    if kind == "map":
        return voc2012_ap
    if kind == "ap":
        return binary_ap
    raise ValueError(f"unknown metric {kind!r}; expected 'map' or 'ap'")


def _label_index(labels) -> dict:
    if isinstance(labels, Mapping):
        return dict(labels)
    return {lab.key: lab for lab in labels}


def pool_detections(
    streams: Iterable[FrameScoreStream], labels: Iterable[SpeakingLabel] | Mapping
) -> tuple[np.ndarray, np.ndarray]:
    """Concatenate (score, label) pairs in (clip_id, track_id, frame) order."""
    index = _label_index(labels)
    streams = sorted(streams, key=lambda st: st.key)
    score_parts, label_parts = [], []
    for st in streams:
        lab = index.get(st.key)
        if lab is None:
            raise MissingLabels(f"no labels for track {st.clip_id}/{st.track_id}")
        if len(lab.active) != len(st.scores):
            raise LengthMismatch(
                f"{st.clip_id}/{st.track_id}: {len(st.scores)} scores vs {len(lab.active)} labels"
            )
        score_parts.append(st.scores)
        label_parts.append(lab.active)
    if not score_parts:
        return np.zeros(0), np.zeros(0, dtype=bool)
    return np.concatenate(score_parts), np.concatenate(label_parts)


@dataclass
class EvalReport:
    model: str
    ensemble: bool
    alpha: float | None
    map: float
    binary_ap: float
    n_detections: int
    n_positives: int
    metric: str = "map"
    pr: dict = field(default_factory=dict)

    @property
    def map_pct(self) -> float:
        return 100.0 * self.map

    @property
    def score(self) -> float:
        """The value named by ``metric``."""
        return self.map if self.metric == "map" else self.binary_ap

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: Mapping) -> "EvalReport":
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        return cls.from_dict(json.loads(text))


def evaluate(
    streams: Sequence[FrameScoreStream],
    labels,
    *,
    model: str = "model",
    ensemble: bool = False,
    alpha: float | None = None,
    metric: str = "map",
    with_curve: bool = True,
) -> EvalReport:
    """Pool every track-frame into the single 'speaking' class and score it."""
    metric_function(metric)
    s, y = pool_detections(streams, labels)
    curve = pr_curve(s, y)
    return EvalReport(
        model=model,
        ensemble=ensemble,
        alpha=alpha,
        map=voc2012_ap(s, y),
        binary_ap=binary_ap(s, y),
        n_detections=int(s.size),
        n_positives=int(y.sum()),
        metric=metric,
        pr=curve.to_dict() if with_curve else {},
    )
