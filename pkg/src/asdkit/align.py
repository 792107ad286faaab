"""Time/frame conversion and projection of utterance matches onto face tracks."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .datamodel import FaceTrack, FrameScoreStream, Utterance
from .exceptions import DanglingReference, EmptySpan

__all__ = ["FrameSpan", "frame_midpoint", "utterance_to_span", "seconds_to_span", "project_assoc"]


@dataclass(frozen=True)
class FrameSpan:
    start_frame: int
    end_frame: int

    def __post_init__(self):
        if not self.start_frame < self.end_frame:
            raise EmptySpan(f"empty frame span [{self.start_frame}, {self.end_frame})")

    def __len__(self):
        return self.end_frame - self.start_frame

    def intersect(self, start: int, end: int) -> "FrameSpan | None":
        lo, hi = max(self.start_frame, start), min(self.end_frame, end)
        return FrameSpan(lo, hi) if lo < hi else None


def frame_midpoint(frame: int, fps: float) -> float:
    return (frame + 0.5) / fps


def _first_frame_at_or_after(t: float, fps: float) -> int:
    # smallest f with midpoint(f) >= t; the ceil guess is corrected against
    # the exact predicate so float rounding never moves a boundary
    f = max(0, math.ceil(t * fps - 0.5))
    while f > 0 and frame_midpoint(f - 1, fps) >= t:
        f -= 1
    while frame_midpoint(f, fps) < t:
        f += 1
    return f


def seconds_to_span(start_s: float, end_s: float, fps: float) -> FrameSpan:
    """Frames whose midpoint lies in ``[start_s, end_s)``."""
    if not fps > 0:
        raise ValueError("fps must be > 0")
    lo = _first_frame_at_or_after(start_s, fps)
    hi = _first_frame_at_or_after(end_s, fps)
    if hi <= lo:
        raise EmptySpan(f"[{start_s}, {end_s}) contains no frame midpoint at {fps} fps")
    return FrameSpan(lo, hi)


def utterance_to_span(u: Utterance, fps: float) -> FrameSpan:
    return seconds_to_span(u.start_s, u.end_s, fps)


def _fps_for(fps, clip_id: str) -> float:
    if isinstance(fps, Mapping):
        try:
            return float(fps[clip_id])
        except KeyError:
            raise DanglingReference(f"no frame rate for clip {clip_id!r}") from None
    return float(fps)


def project_assoc(
    matches: Iterable[tuple[str, str, float]],
    utterances: Iterable[Utterance],
    tracks: Iterable[FaceTrack],
    fps: float | Mapping[str, float],
) -> list[FrameScoreStream]:
    """Spread utterance-level match probabilities over overlapping track frames.

    Every track gets a stream. A frame covered by several utterances takes the
    maximum probability; uncovered frames are 0. Projections are clipped to
    the track's own frame range. ``fps`` is a single rate or a per-clip map.
    """
    tracks = list(tracks)
    utt_index = {u.utt_id: u for u in utterances}
    by_person: dict[tuple[str, str], list[FaceTrack]] = {}
    buffers: dict[tuple[str, str], np.ndarray] = {}
    for t in tracks:
        by_person.setdefault((t.clip_id, t.person_id), []).append(t)
        buffers[t.key] = np.zeros(t.frame_count)

    for utt_id, person_id, prob in matches:
        u = utt_index.get(utt_id)
        if u is None:
            raise DanglingReference(f"match references unknown utterance {utt_id!r}")
        person_tracks = by_person.get((u.clip_id, person_id))
        if person_tracks is None:
            raise DanglingReference(f"person {person_id!r} has no track in clip {u.clip_id!r}")
        if not 0.0 <= prob <= 1.0:
            raise ValueError(f"match probability {prob} outside [0, 1]")
        try:
            span = utterance_to_span(u, _fps_for(fps, u.clip_id))
        except EmptySpan:
            continue
        for t in person_tracks:
            hit = span.intersect(t.start_frame, t.end_frame)
            if hit is None:
                continue
            buf = buffers[t.key]
            seg = slice(hit.start_frame - t.start_frame, hit.end_frame - t.start_frame)
            np.maximum(buf[seg], prob, out=buf[seg])

    return [FrameScoreStream(t.clip_id, t.track_id, buffers[t.key], source="assoc") for t in tracks]
