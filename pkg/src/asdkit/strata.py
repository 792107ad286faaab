"""Stratified evaluation by track face quality and by utterance masking."""
from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ._parallel import map_ordered
from .align import FrameSpan, project_assoc, utterance_to_span
from .datamodel import Bundle, FaceTrack, FrameScoreStream
from .exceptions import EmptySpan, InvalidConfig, MissingQuality, TooFewTracks
from .fusion import fuse_streams
from .metrics import binary_ap, metric_function, pool_detections
from .simgen import degrade_sync

__all__ = [
    "QualityStratum",
    "MaskingTrial",
    "track_quality",
    "stratify_by_quality",
    "evaluate_strata",
    "masked_track_spans",
    "masking_experiment",
    "summarize_masking",
]


@dataclass(frozen=True)
class QualityStratum:
    bin_index: int
    track_keys: tuple
    quality_range: tuple[float, float]
    ap: dict = field(default_factory=dict)


@dataclass(frozen=True)
class MaskingTrial:
    p_mask: float
    rng_seed: int
    trial_index: int
    masked_utt_ids: tuple
    ap: dict = field(default_factory=dict)


def track_quality(track: FaceTrack) -> float:
    if track.quality is None:
        raise MissingQuality(f"track {track.clip_id}/{track.track_id} has no per-frame quality")
    return float(np.mean(track.quality))


def stratify_by_quality(tracks: Sequence[FaceTrack], n_bins: int = 8) -> list[QualityStratum]:
    """Equal-count bins over tracks sorted by (mean quality, track key).

    When the count does not divide evenly, the lowest-quality bins take one
    extra track each.
    """
    tracks = list(tracks)
    if n_bins < 1:
        raise InvalidConfig("n_bins must be >= 1")
    if n_bins > len(tracks):
        raise TooFewTracks(f"{len(tracks)} tracks cannot fill {n_bins} bins")
    ranked = sorted(((track_quality(t), t.key) for t in tracks))
    base, extra = divmod(len(ranked), n_bins)
    out, pos = [], 0
    for b in range(n_bins):
        size = base + (1 if b < extra else 0)
        members = ranked[pos : pos + size]
        pos += size
        out.append(
            QualityStratum(
                bin_index=b,
                track_keys=tuple(k for _, k in members),
                quality_range=(members[0][0], members[-1][0]),
            )
        )
    return out


def evaluate_strata(
    strata: Sequence[QualityStratum],
    method_streams: Mapping[str, Sequence[FrameScoreStream]],
    labels,
    metric: str = "ap",
) -> list[QualityStratum]:
    """Score every method separately inside each stratum."""
    fn = metric_function(metric)
    indexed = {m: {s.key: s for s in streams} for m, streams in method_streams.items()}
    out = []
    for st in strata:
        ap = {}
        for method, index in indexed.items():
            chosen = [index[k] for k in st.track_keys if k in index]
            s, y = pool_detections(chosen, labels)
            ap[method] = fn(s, y)
        out.append(QualityStratum(st.bin_index, st.track_keys, st.quality_range, ap))
    return out


def masked_track_spans(bundle: Bundle, utt_ids) -> dict[tuple[str, str], list[FrameSpan]]:
    """Track-local frame spans covered by the given utterances, per track."""
    out: dict[tuple[str, str], list[FrameSpan]] = {}
    for uid in utt_ids:
        u = bundle.utterance(uid)
        try:
            span = utterance_to_span(u, bundle.clip(u.clip_id).video_fps)
        except EmptySpan:
            continue
        for t in bundle.tracks_of(u.clip_id):
            hit = span.intersect(t.start_frame, t.end_frame)
            if hit is not None:
                out.setdefault(t.key, []).append(
                    FrameSpan(hit.start_frame - t.start_frame, hit.end_frame - t.start_frame)
                )
    return out


def masking_experiment(
    bundle: Bundle,
    sync_streams: Sequence[FrameScoreStream],
    matches: Sequence[tuple[str, str, float]],
    p_mask_grid: Sequence[float],
    trials_per_point: int,
    seed: int,
    alpha: float = 0.5,
    mode: str = "silence",
    strength: float = 0.5,
    threads: int = 1,
) -> list[MaskingTrial]:
    """Randomly delete utterances and re-evaluate sync, FVA and ensemble.

    Trial ``i`` draws one uniform number per utterance from a generator seeded
    by ``(seed, i)``; an utterance is masked when its draw is below
    ``p_mask``, so masks are nested across the grid. A masked utterance is
    dropped from the association scores (its match rows disappear, which is
    what re-scoring without it gives since rows are independent) and every
    track's sync scores are degraded over its frames.
    """
    grid = [float(p) for p in p_mask_grid]
    if any(not 0.0 <= p <= 1.0 for p in grid):
        raise InvalidConfig("p_mask values must lie in [0, 1]")
    if trials_per_point < 1:
        raise InvalidConfig("trials_per_point must be >= 1")
    sync_streams = list(sync_streams)
    utt_ids = [u.utt_id for u in bundle.utterances]
    fps = {c.clip_id: c.video_fps for c in bundle.clips}
    labels = {lab.key: lab for lab in bundle.labels}
    draws = [np.random.default_rng([seed, i]).uniform(size=len(utt_ids)) for i in range(trials_per_point)]

    def run(job):
        p, i = job
        masked = tuple(uid for uid, r in zip(utt_ids, draws[i]) if r < p)
        masked_set = set(masked)
        kept = [m for m in matches if m[0] not in masked_set]
        assoc = project_assoc(kept, bundle.utterances, bundle.tracks, fps)
        noise_rng = np.random.default_rng([seed, i, 1]) if mode == "noise" else None
        sync = degrade_sync(sync_streams, masked_track_spans(bundle, masked), mode, strength, noise_rng)
        ens = fuse_streams(sync, assoc, alpha)
        ap = {}
        for name, streams in (("sync", sync), ("fva", assoc), ("ensemble", ens)):
            s, y = pool_detections(streams, labels)
            ap[name] = binary_ap(s, y)
        return MaskingTrial(p, seed, i, masked, ap)

    jobs = [(p, i) for p in grid for i in range(trials_per_point)]
    return map_ordered(run, jobs, threads)


def summarize_masking(trials: Sequence[MaskingTrial]) -> list[tuple[float, str, float, float]]:
    """(p_mask, method, mean AP, population std AP) rows in grid order."""
    grouped: dict[float, dict[str, list[float]]] = {}
    for tr in trials:
        per = grouped.setdefault(tr.p_mask, {})
        for method, v in tr.ap.items():
            per.setdefault(method, []).append(v)
    rows = []
    for p, per in grouped.items():
        for method, vals in per.items():
            # statistics works in exact rationals, so identical trials give std 0.0
            rows.append((p, method, statistics.fmean(vals), statistics.pstdev(vals)))
    return rows
