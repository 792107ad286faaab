"""Framewise weighted-mean late fusion and the empirical alpha sweep."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .datamodel import FrameScoreStream
from .exceptions import LengthMismatch, TrackMismatch
from .metrics import metric_function, pool_detections
from ._validation import check_alpha, check_probability_pair

__all__ = [
    "FusionConfig",
    "DEFAULT_GRID",
    "fuse_arrays",
    "fuse",
    "fuse_streams",
    "SweepResult",
    "sweep_alpha",
    "WeightedMeanFusion",
]

DEFAULT_GRID = tuple(round(0.05 * i, 2) for i in range(21))


@dataclass(frozen=True)
class FusionConfig:
    alpha: float = 0.5

    def __post_init__(self):
        check_alpha(self.alpha)


def fuse_arrays(p_sync: np.ndarray, p_assoc: np.ndarray, alpha: float) -> np.ndarray:
    """alpha * p_sync + (1 - alpha) * p_assoc, elementwise."""
    s = np.asarray(p_sync, dtype=np.float64)
    a = np.asarray(p_assoc, dtype=np.float64)
    if s.shape != a.shape:
        raise LengthMismatch(f"stream shapes differ: {s.shape} vs {a.shape}")
    out = alpha * s + (1.0 - alpha) * a
    # the two products can round one ulp outside the pair; clip back into it
    return np.clip(out, np.minimum(s, a), np.maximum(s, a))


def fuse(p_sync: FrameScoreStream, p_assoc: FrameScoreStream, cfg: FusionConfig | float) -> FrameScoreStream:
    alpha = cfg.alpha if isinstance(cfg, FusionConfig) else check_alpha(cfg)
    if p_sync.key != p_assoc.key:
        raise TrackMismatch(f"cannot fuse {p_sync.key} with {p_assoc.key}")
    if len(p_sync.scores) != len(p_assoc.scores):
        raise LengthMismatch(
            f"{p_sync.clip_id}/{p_sync.track_id}: {len(p_sync.scores)} sync vs "
            f"{len(p_assoc.scores)} assoc frames"
        )
    return FrameScoreStream(
        p_sync.clip_id, p_sync.track_id, fuse_arrays(p_sync.scores, p_assoc.scores, alpha), source="ens"
    )


def _align_assoc(sync_streams, assoc_streams) -> list[FrameScoreStream]:
    # tracks never diarised get an all-zero association stream
    index = assoc_streams if isinstance(assoc_streams, Mapping) else {a.key: a for a in assoc_streams}
    out = []
    for s in sync_streams:
        a = index.get(s.key)
        if a is None:
            a = FrameScoreStream(s.clip_id, s.track_id, np.zeros(len(s.scores)), source="assoc")
        out.append(a)
    return out


def fuse_streams(
    sync_streams: Sequence[FrameScoreStream], assoc_streams, cfg: FusionConfig | float
) -> list[FrameScoreStream]:
    """Fuse every sync stream with its association counterpart."""
    return [fuse(s, a, cfg) for s, a in zip(sync_streams, _align_assoc(sync_streams, assoc_streams))]


@dataclass(frozen=True)
class SweepResult:
    table: tuple[tuple[float, float], ...]
    best_alpha: float
    best_score: float
    metric: str


def _best(table) -> tuple[float, float]:
    best_a, best_s = None, -np.inf
    for a, s in sorted(table):
        if s > best_s:
            best_a, best_s = a, s
    return best_a, best_s


def sweep_alpha(
    labels,
    sync_streams: Sequence[FrameScoreStream],
    assoc_streams,
    grid: Sequence[float] = DEFAULT_GRID,
    metric: str = "map",
) -> SweepResult:
    """Score the fused streams at each alpha in ``grid``.

    Ties in the argmax go to the smaller alpha. ``labels`` is a sequence of
    SpeakingLabel or a mapping keyed by (clip_id, track_id).
    """
    grid = [check_alpha(a) for a in grid]
    if not grid:
        raise ValueError("alpha grid must be non-empty")
    fn = metric_function(metric)
    sync_streams = list(sync_streams)
    assoc = _align_assoc(sync_streams, assoc_streams)
    s, y = pool_detections(sync_streams, labels)
    a, _ = pool_detections(assoc, labels)
    table = tuple((alpha, fn(fuse_arrays(s, a, alpha), y)) for alpha in sorted(set(grid)))
    best_a, best_s = _best(table)
    return SweepResult(table=table, best_alpha=best_a, best_score=best_s, metric=metric)


class WeightedMeanFusion(TransformerMixin, BaseEstimator):
    """Late fusion of two probability columns by a weighted mean.

    ``X`` has two columns, the synchronisation score and the association
    score of each track-frame. With ``alpha="auto"``, ``fit`` picks the
    alpha in ``grid`` that maximises ``metric`` against ``y``.
    """

    def __init__(self, alpha="auto", grid=DEFAULT_GRID, metric="map"):
        self.alpha = alpha
        self.grid = grid
        self.metric = metric

    def fit(self, X, y=None):
        X = check_probability_pair(X)
        if self.alpha == "auto":
            if y is None:
                raise ValueError("alpha='auto' needs ground-truth labels y")
            y = np.asarray(y).astype(bool)
            if y.shape[0] != X.shape[0]:
                raise LengthMismatch(f"{X.shape[0]} rows but {y.shape[0]} labels")
            fn = metric_function(self.metric)
            grid = sorted({check_alpha(a) for a in self.grid})
            if not grid:
                raise ValueError("alpha grid must be non-empty")
            self.sweep_table_ = tuple((a, fn(fuse_arrays(X[:, 0], X[:, 1], a), y)) for a in grid)
            self.alpha_, self.best_score_ = _best(self.sweep_table_)
        else:
            self.alpha_ = check_alpha(self.alpha)
        self.n_features_in_ = 2
        return self

    def transform(self, X):
        check_is_fitted(self, "alpha_")
        X = check_probability_pair(X)
        return fuse_arrays(X[:, 0], X[:, 1], self.alpha_)

    def score(self, X, y):
        return metric_function(self.metric)(self.transform(X), y)
