"""Seeded synthetic bundles emulating egocentric conversation.

Each clip gets 2..k visible people. Talk spurts come from an alternating
on/off renewal process with geometric frame-count durations; each spurt is
assigned to one person and, with probability ``overlap_rate``, a second
person starts talking part-way through it. Face quality follows an AR(1)
trajectory per track, face embeddings get noise that grows as quality
drops, and the synthetic synchronisation model collapses to chance at zero
quality.

A person's voice and face vectors are two fixed linear views of one latent
identity, so a learned head can transfer across clips. The views are set by
``world_seed``; bundles meant to be trained on and evaluated against each
other must share it.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from ._parallel import map_ordered
from .align import FrameSpan
from .datamodel import (
    Bundle,
    ClipMeta,
    FaceEmbeddingTrack,
    FaceTrack,
    FrameScoreStream,
    SpeakingLabel,
    Utterance,
    UtteranceEmbedding,
)
from .exceptions import InvalidConfig, SpanOutOfRange

__all__ = [
    "SimConfig",
    "acceptance_config",
    "generate_bundle",
    "synth_sync_scores",
    "degrade_sync",
    "logistic",
]

_SYNC_STREAM = 1
_WORLD_STREAM = 2
_DECIMALS = 6


@dataclass(frozen=True)
class SimConfig:
    n_clips: int = 10
    min_identities: int = 2
    max_identities: int = 4
    duration_s: float = 60.0
    fps: float = 30.0
    audio_sample_rate: int = 16000
    spurt_on_mean_s: float = 2.0
    spurt_off_mean_s: float = 1.0
    overlap_rate: float = 0.15
    min_track_coverage: float = 0.6
    d_speaker: int = 32
    d_face: int = 32
    d_latent: int = 16
    face_emb_stride: int = 10
    q_lo: float = 0.05
    q_hi: float = 1.0
    quality_rho: float = 0.95
    quality_sigma: float = 0.05
    sigma_audio: float = 0.05
    overlap_penalty: float = 2.0
    sigma_face: float = 0.5
    sync_gain: float = 4.0
    sync_sigma: float = 1.0
    seed: int = 0
    world_seed: int = 0

    def __post_init__(self):
        def need(cond, msg):
            if not cond:
                raise InvalidConfig(msg)

        for name in ("n_clips", "min_identities", "d_speaker", "d_face", "d_latent", "face_emb_stride"):
            v = getattr(self, name)
            need(isinstance(v, (int, np.integer)) and v >= 1, f"{name} must be an integer >= 1")
        need(self.max_identities >= self.min_identities, "max_identities < min_identities")
        for name in ("duration_s", "fps", "audio_sample_rate", "spurt_on_mean_s", "spurt_off_mean_s"):
            need(getattr(self, name) > 0, f"{name} must be > 0")
        for name in ("overlap_rate", "q_lo", "q_hi", "quality_rho"):
            need(0.0 <= getattr(self, name) <= 1.0, f"{name} must lie in [0, 1]")
        need(0.0 < self.min_track_coverage <= 1.0, "min_track_coverage must lie in (0, 1]")
        need(self.q_lo <= self.q_hi, "q_lo > q_hi")
        for name in ("quality_sigma", "sigma_audio", "overlap_penalty", "sigma_face", "sync_sigma"):
            need(getattr(self, name) >= 0, f"{name} must be >= 0")
        need(self.spurt_on_mean_s * self.fps >= 1, "spurt_on_mean_s shorter than one frame")
        need(self.spurt_off_mean_s * self.fps >= 1, "spurt_off_mean_s shorter than one frame")
        need(int(self.duration_s * self.fps) >= 2, "clip shorter than two frames")

    @property
    def n_frames(self) -> int:
        return int(np.floor(self.duration_s * self.fps))

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_mapping(cls, values: Mapping) -> "SimConfig":
        fields = {f.name: f for f in dataclasses.fields(cls)}
        unknown = sorted(set(values) - set(fields))
        if unknown:
            raise InvalidConfig(f"unknown SimConfig keys {unknown}")
        kw = {}
        for k, v in values.items():
            default = fields[k].default
            if isinstance(default, bool) or not isinstance(v, (int, float)) or isinstance(v, bool):
                raise InvalidConfig(f"{k} must be numeric, got {v!r}")
            kw[k] = int(v) if isinstance(default, int) and float(v).is_integer() else float(v)
            if isinstance(default, int) and not float(v).is_integer():
                raise InvalidConfig(f"{k} must be an integer, got {v!r}")
        return cls(**kw)

    @classmethod
    def from_toml(cls, path: str | Path) -> "SimConfig":
        import tomli

        with Path(path).open("rb") as fh:
            return cls.from_mapping(tomli.load(fh))

    def to_mapping(self) -> dict:
        return dataclasses.asdict(self)


def acceptance_config(seed: int = 7) -> SimConfig:
    """Fixed desk-scale scenario used by the acceptance suite (40 clips)."""
    return SimConfig(n_clips=40, seed=seed)


def logistic(x):
    return 1.0 / (1.0 + np.exp(-np.asarray(x, dtype=np.float64)))


def _unit(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    v = rng.normal(size=(n, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _world(cfg: SimConfig) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng([cfg.world_seed, _WORLD_STREAM])
    voice_map = rng.normal(size=(cfg.d_latent, cfg.d_speaker))
    face_map = rng.normal(size=(cfg.d_latent, cfg.d_face))
    return voice_map, face_map


def _activity(cfg: SimConfig, rng: np.random.Generator, n_ids: int) -> np.ndarray:
    n = cfg.n_frames
    on_p = 1.0 / (cfg.spurt_on_mean_s * cfg.fps)
    off_p = 1.0 / (cfg.spurt_off_mean_s * cfg.fps)
    active = np.zeros((n_ids, n), dtype=bool)
    t = 0
    while True:
        t += int(rng.geometric(off_p))
        if t >= n:
            break
        length = int(rng.geometric(on_p))
        speaker = int(rng.integers(n_ids))
        active[speaker, t : t + length] = True
        if n_ids > 1 and rng.random() < cfg.overlap_rate:
            other = int((speaker + rng.integers(1, n_ids)) % n_ids)
            start = t + int(rng.integers(length))
            active[other, start : start + int(rng.geometric(on_p))] = True
        t += length
    return active


def _runs(row: np.ndarray) -> list[tuple[int, int]]:
    edges = np.flatnonzero(np.diff(np.r_[0, row.astype(np.int8), 0]))
    return list(zip(edges[::2].tolist(), edges[1::2].tolist()))


def _quality(cfg: SimConfig, rng: np.random.Generator, n: int) -> np.ndarray:
    base = rng.uniform(cfg.q_lo, cfg.q_hi)
    eta = rng.normal(0.0, cfg.quality_sigma, size=n)
    q = np.empty(n)
    prev = base
    for i in range(n):
        prev = min(1.0, max(0.0, cfg.quality_rho * prev + (1 - cfg.quality_rho) * base + eta[i]))
        q[i] = prev
    return np.round(q, _DECIMALS)


def _clip(cfg: SimConfig, index: int, world) -> dict:
    rng = np.random.default_rng([cfg.seed, index])
    voice_map, face_map = world
    clip_id = f"sim{cfg.seed}_c{index:03d}"
    n = cfg.n_frames
    n_ids = int(rng.integers(cfg.min_identities, cfg.max_identities + 1))
    latent = _unit(rng, n_ids, cfg.d_latent)
    voice = latent @ voice_map
    voice /= np.linalg.norm(voice, axis=1, keepdims=True)
    face = latent @ face_map
    face /= np.linalg.norm(face, axis=1, keepdims=True)
    active = _activity(cfg, rng, n_ids)
    persons = [f"{clip_id}_p{k}" for k in range(n_ids)]

    tracks, labels, faces = [], [], []
    for k, pid in enumerate(persons):
        length = max(1, int(round(rng.uniform(cfg.min_track_coverage, 1.0) * n)))
        start = int(rng.integers(0, n - length + 1))
        q = _quality(cfg, rng, length)
        tid = f"{pid}_t0"
        tracks.append(FaceTrack(clip_id, tid, pid, start, length, q))
        labels.append(SpeakingLabel(clip_id, tid, active[k, start : start + length]))
        sample = np.arange(0, length, cfg.face_emb_stride)
        noise = rng.normal(size=(sample.size, cfg.d_face)) * (cfg.sigma_face * (1.0 - q[sample]))[:, None]
        faces.append(FaceEmbeddingTrack(clip_id, pid, np.round(face[k] + noise, _DECIMALS)))

    spurts = sorted((s, e, k) for k in range(n_ids) for s, e in _runs(active[k]))
    others = active.sum(0)
    utts, embs = [], []
    for i, (s, e, k) in enumerate(spurts):
        uid = f"{clip_id}_u{i:03d}"
        overlap = float(np.mean(others[s:e] > 1))
        scale = cfg.sigma_audio * (1.0 + cfg.overlap_penalty * overlap)
        vec = voice[k] + rng.normal(0.0, scale, size=cfg.d_speaker)
        utts.append(Utterance(clip_id, uid, s / cfg.fps, e / cfg.fps, speaker_hint=persons[k]))
        embs.append(UtteranceEmbedding(uid, np.round(vec, _DECIMALS)))

    clip = ClipMeta(clip_id, float(cfg.duration_s), float(cfg.fps), int(cfg.audio_sample_rate))
    return {"clip": clip, "tracks": tracks, "labels": labels, "utts": utts, "embs": embs, "faces": faces}


def generate_bundle(cfg: SimConfig, threads: int = 1) -> Bundle:
    """Generate ``cfg.n_clips`` clips; output is independent of ``threads``."""
    world = _world(cfg)
    parts = map_ordered(lambda i: _clip(cfg, i, world), range(cfg.n_clips), threads)
    return Bundle(
        clips=[p["clip"] for p in parts],
        tracks=[t for p in parts for t in p["tracks"]],
        labels=[lab for p in parts for lab in p["labels"]],
        utterances=[u for p in parts for u in p["utts"]],
        utt_embeddings=[e for p in parts for e in p["embs"]],
        face_embeddings=[f for p in parts for f in p["faces"]],
    )


def synth_sync_scores(cfg: SimConfig, bundle: Bundle) -> list[FrameScoreStream]:
    """Synthetic sync-model probabilities: logistic(g * (2y - 1) * q + noise)."""
    out = []
    for index, clip_id in enumerate(bundle.clip_ids):
        rng = np.random.default_rng([cfg.seed, index, _SYNC_STREAM])
        for t in bundle.tracks_of(clip_id):
            if t.quality is None:
                raise InvalidConfig(f"track {t.clip_id}/{t.track_id} has no quality trajectory")
            y = bundle.label(t.clip_id, t.track_id).active
            eps = rng.normal(0.0, cfg.sync_sigma, size=t.frame_count)
            z = cfg.sync_gain * np.where(y, 1.0, -1.0) * t.quality + eps
            out.append(FrameScoreStream(t.clip_id, t.track_id, logistic(z), source="sync"))
    return out


def degrade_sync(
    streams: Sequence[FrameScoreStream],
    masked_spans: Mapping[tuple[str, str], Sequence[FrameSpan]],
    mode: str = "silence",
    strength: float = 0.5,
    rng: np.random.Generator | None = None,
) -> list[FrameScoreStream]:
    """Pull masked frames toward an uninformative score.

    ``masked_spans`` maps (clip_id, track_id) to track-local frame spans.
    ``silence`` moves scores toward 0.5; ``noise`` toward a uniform draw
    and needs ``rng``. Unmasked frames are returned untouched.
    """
    if not 0.0 <= strength <= 1.0:
        raise InvalidConfig(f"strength={strength} outside [0, 1]")
    if mode not in ("silence", "noise"):
        raise InvalidConfig(f"unknown degradation mode {mode!r}")
    if mode == "noise" and rng is None:
        raise InvalidConfig("noise mode needs an rng")
    out = []
    for st in streams:
        spans = masked_spans.get(st.key, ())
        if not spans:
            out.append(st)
            continue
        mask = np.zeros(len(st.scores), dtype=bool)
        for sp in spans:
            if sp.start_frame < 0 or sp.end_frame > len(st.scores):
                raise SpanOutOfRange(
                    f"span [{sp.start_frame}, {sp.end_frame}) outside {st.clip_id}/{st.track_id} "
                    f"of length {len(st.scores)}"
                )
            mask[sp.start_frame : sp.end_frame] = True
        target = 0.5 if mode == "silence" else rng.uniform(size=int(mask.sum()))
        scores = st.scores.copy()
        scores[mask] = (1.0 - strength) * scores[mask] + strength * target
        out.append(FrameScoreStream(st.clip_id, st.track_id, scores, source=st.source))
    return out
