"""Domain types, JSONL manifest IO and bundle validation.

Every record type maps one-to-one onto a line of a JSONL manifest. Frame
indices are 0-based and half-open everywhere.
"""
from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .exceptions import DanglingReference, ParseError, ValidationError

__all__ = [
    "ClipMeta",
    "FaceTrack",
    "SpeakingLabel",
    "Utterance",
    "UtteranceEmbedding",
    "FaceEmbeddingTrack",
    "FrameScoreStream",
    "Bundle",
    "Finding",
    "MANIFEST_KINDS",
    "BUNDLE_FILES",
    "load_manifest",
    "write_manifest",
    "dumps_record",
    "load_bundle",
    "write_bundle",
    "validate_bundle",
    "write_embedding_sidecar",
    "read_embedding_sidecar",
]


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _floats(arr: np.ndarray) -> list:
    return [float(x) for x in np.asarray(arr).ravel()]


class _Record:
    """Structural equality via the canonical record form."""

    def to_record(self) -> dict:
        raise NotImplementedError

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self.to_record() == other.to_record()

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ClipMeta(_Record):
    clip_id: str
    duration_s: float
    video_fps: float = 30.0
    audio_sample_rate: int = 16000
    n_audio_samples: int | None = None

    def __post_init__(self):
        if self.n_audio_samples is None:
            object.__setattr__(
                self, "n_audio_samples", int(round(self.duration_s * self.audio_sample_rate))
            )
        if not self.duration_s > 0:
            raise ValidationError(self.clip_id, "duration_s must be > 0")
        if not self.video_fps > 0:
            raise ValidationError(self.clip_id, "video_fps must be > 0")
        if not self.audio_sample_rate > 0:
            raise ValidationError(self.clip_id, "audio_sample_rate must be > 0")
        expected = round(self.duration_s * self.audio_sample_rate)
        if abs(self.n_audio_samples - expected) > 1:
            raise ValidationError(
                self.clip_id,
                f"n_audio_samples={self.n_audio_samples} but duration implies {expected}",
            )

    @property
    def n_frames(self) -> int:
        """Upper bound on frame indices: floor(duration * fps) + 1."""
        return int(math.floor(self.duration_s * self.video_fps)) + 1

    def to_record(self) -> dict:
        return {
            "clip_id": self.clip_id,
            "duration_s": float(self.duration_s),
            "video_fps": float(self.video_fps),
            "audio_sample_rate": int(self.audio_sample_rate),
            "n_audio_samples": int(self.n_audio_samples),
        }


@dataclass(frozen=True, eq=False)
class FaceTrack(_Record):
    clip_id: str
    track_id: str
    person_id: str
    start_frame: int
    frame_count: int
    quality: np.ndarray | None = None

    def __post_init__(self):
        rid = f"{self.clip_id}/{self.track_id}"
        if self.start_frame < 0:
            raise ValidationError(rid, "start_frame must be >= 0")
        if self.frame_count < 1:
            raise ValidationError(rid, "frame_count must be >= 1")
        if self.quality is not None:
            q = _frozen_array(self.quality, np.float64)
            if q.ndim != 1 or len(q) != self.frame_count:
                raise ValidationError(
                    rid, f"frame_count={self.frame_count} but {q.size} quality values"
                )
            if not np.all(np.isfinite(q)) or np.any(q < 0) or np.any(q > 1):
                raise ValidationError(rid, "quality values must lie in [0, 1]")
            object.__setattr__(self, "quality", q)

    @property
    def key(self) -> tuple[str, str]:
        return (self.clip_id, self.track_id)

    @property
    def end_frame(self) -> int:
        return self.start_frame + self.frame_count

    def to_record(self) -> dict:
        rec = {
            "clip_id": self.clip_id,
            "track_id": self.track_id,
            "person_id": self.person_id,
            "start_frame": int(self.start_frame),
            "frame_count": int(self.frame_count),
        }
        if self.quality is not None:
            rec["quality"] = _floats(self.quality)
        return rec


@dataclass(frozen=True, eq=False)
class SpeakingLabel(_Record):
    clip_id: str
    track_id: str
    active: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.active)
        if a.ndim != 1:
            raise ValidationError(f"{self.clip_id}/{self.track_id}", "active must be 1-D")
        if a.dtype != bool:
            if a.size and not np.all((a == 0) | (a == 1)):
                raise ValidationError(
                    f"{self.clip_id}/{self.track_id}", "active entries must be 0 or 1"
                )
        object.__setattr__(self, "active", _frozen_array(a, bool))

    @property
    def key(self) -> tuple[str, str]:
        return (self.clip_id, self.track_id)

    def to_record(self) -> dict:
        return {
            "clip_id": self.clip_id,
            "track_id": self.track_id,
            "active": [int(x) for x in self.active],
        }


@dataclass(frozen=True, eq=False)
class Utterance(_Record):
    clip_id: str
    utt_id: str
    start_s: float
    end_s: float
    speaker_hint: str | None = None

    def __post_init__(self):
        if not (0 <= self.start_s < self.end_s):
            raise ValidationError(self.utt_id, "need 0 <= start_s < end_s")

    def to_record(self) -> dict:
        rec = {
            "clip_id": self.clip_id,
            "utt_id": self.utt_id,
            "start_s": float(self.start_s),
            "end_s": float(self.end_s),
        }
        if self.speaker_hint is not None:
            rec["speaker_hint"] = self.speaker_hint
        return rec


@dataclass(frozen=True, eq=False)
class UtteranceEmbedding(_Record):
    utt_id: str
    vector: np.ndarray

    def __post_init__(self):
        v = _frozen_array(self.vector, np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ValidationError(self.utt_id, "vector must be a non-empty 1-D array")
        if not np.all(np.isfinite(v)):
            raise ValidationError(self.utt_id, "vector contains non-finite values")
        object.__setattr__(self, "vector", v)

    @property
    def dim(self) -> int:
        return self.vector.shape[0]

    def to_record(self) -> dict:
        return {"utt_id": self.utt_id, "vector": _floats(self.vector)}


@dataclass(frozen=True, eq=False)
class FaceEmbeddingTrack(_Record):
    clip_id: str
    person_id: str
    frames: np.ndarray

    def __post_init__(self):
        rid = f"{self.clip_id}/{self.person_id}"
        try:
            f = _frozen_array(self.frames, np.float64)
        except ValueError as exc:
            raise ValidationError(rid, f"frames must be a rectangular matrix ({exc})") from None
        if f.ndim != 2 or f.shape[0] < 1 or f.shape[1] < 1:
            raise ValidationError(rid, "frames must be a T x d_F matrix with T >= 1")
        if not np.all(np.isfinite(f)):
            raise ValidationError(rid, "frames contain non-finite values")
        object.__setattr__(self, "frames", f)

    @property
    def key(self) -> tuple[str, str]:
        return (self.clip_id, self.person_id)

    @property
    def dim(self) -> int:
        return self.frames.shape[1]

    def to_record(self) -> dict:
        return {
            "clip_id": self.clip_id,
            "person_id": self.person_id,
            "frames": [[float(x) for x in row] for row in self.frames],
        }


@dataclass(frozen=True, eq=False)
class FrameScoreStream(_Record):
    clip_id: str
    track_id: str
    scores: np.ndarray
    source: str | None = None

    def __post_init__(self):
        s = _frozen_array(self.scores, np.float64)
        rid = f"{self.clip_id}/{self.track_id}"
        if s.ndim != 1:
            raise ValidationError(rid, "scores must be 1-D")
        if not np.all(np.isfinite(s)) or np.any(s < 0) or np.any(s > 1):
            raise ValidationError(rid, "scores must lie in [0, 1]")
        object.__setattr__(self, "scores", s)

    @property
    def key(self) -> tuple[str, str]:
        return (self.clip_id, self.track_id)

    def to_record(self) -> dict:
        rec = {"clip_id": self.clip_id, "track_id": self.track_id, "scores": _floats(self.scores)}
        if self.source is not None:
            rec["source"] = self.source
        return rec


# --------------------------------------------------------------------------
# JSONL IO

_SCHEMAS: dict[str, tuple[type, tuple[str, ...], tuple[str, ...]]] = {
    # kind: (type, required keys, optional keys)
    "clips": (ClipMeta, ("clip_id", "duration_s", "video_fps", "audio_sample_rate", "n_audio_samples"), ()),
    "tracks": (FaceTrack, ("clip_id", "track_id", "person_id", "start_frame", "frame_count"), ("quality",)),
    "labels": (SpeakingLabel, ("clip_id", "track_id", "active"), ()),
    "utterances": (Utterance, ("clip_id", "utt_id", "start_s", "end_s"), ("speaker_hint",)),
    "utt_emb": (UtteranceEmbedding, ("utt_id", "vector"), ()),
    "face_emb": (FaceEmbeddingTrack, ("clip_id", "person_id", "frames"), ()),
    "scores": (FrameScoreStream, ("clip_id", "track_id", "scores"), ("source",)),
}

MANIFEST_KINDS = tuple(_SCHEMAS)
BUNDLE_FILES = {
    "clips": "clips.jsonl",
    "tracks": "tracks.jsonl",
    "labels": "labels.jsonl",
    "utterances": "utterances.jsonl",
    "utt_emb": "utt_emb.jsonl",
    "face_emb": "face_emb.jsonl",
}

_STRING_KEYS = {"clip_id", "track_id", "person_id", "utt_id", "speaker_hint", "source"}
_INT_KEYS = {"start_frame", "frame_count", "n_audio_samples", "audio_sample_rate"}
_FLOAT_KEYS = {"duration_s", "video_fps", "start_s", "end_s"}


def _record_id(obj: Mapping) -> str:
    parts = [str(obj[k]) for k in ("clip_id", "track_id", "person_id", "utt_id") if k in obj]
    return "/".join(parts) or "<record>"


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _coerce(kind: str, obj: dict, strict: bool) -> dict:
    cls, required, optional = _SCHEMAS[kind]
    rid = _record_id(obj)
    missing = [k for k in required if k not in obj]
    if missing:
        raise ValidationError(rid, f"missing keys {missing}")
    allowed = set(required) | set(optional)
    unknown = sorted(set(obj) - allowed)
    if unknown and strict:
        raise ValidationError(rid, f"unknown keys {unknown}")
    kwargs = {}
    for k in allowed:
        if k not in obj:
            continue
        v = obj[k]
        if k in _STRING_KEYS:
            if not isinstance(v, str):
                raise ValidationError(rid, f"{k} must be a string")
        elif k in _INT_KEYS:
            if not _is_number(v) or float(v) != int(v):
                raise ValidationError(rid, f"{k} must be an integer")
            v = int(v)
        elif k in _FLOAT_KEYS:
            if not _is_number(v):
                raise ValidationError(rid, f"{k} must be a number")
            v = float(v)
        else:
            v = _numeric_array(rid, k, v)
        kwargs[k] = v
    return kwargs


def _numeric_array(rid: str, key: str, value) -> Any:
    if not isinstance(value, list):
        raise ValidationError(rid, f"{key} must be a list")

    def check(x):
        if isinstance(x, list):
            for y in x:
                check(y)
        elif isinstance(x, bool):
            if key != "active":
                raise ValidationError(rid, f"{key} must contain numbers")
        elif not _is_number(x):
            raise ValidationError(rid, f"{key} must contain numbers")

    check(value)
    return value


def _build(kind: str, kwargs: dict):
    cls = _SCHEMAS[kind][0]
    return cls(**kwargs)


def load_manifest(
    path: str | Path,
    kind: str,
    *,
    strict: bool = True,
    clips: Iterable[ClipMeta] | None = None,
    tracks: Iterable[FaceTrack] | None = None,
) -> list:
    """Load one JSONL manifest into a list of validated records.

    When ``clips`` (or ``tracks``) are supplied, clip (or track) references
    are resolved and ``DanglingReference`` is raised for unknown ids.
    """
    if kind not in _SCHEMAS:
        raise ValueError(f"unknown manifest kind {kind!r}; expected one of {MANIFEST_KINDS}")
    path = Path(path)
    clip_index = {c.clip_id: c for c in clips} if clips is not None else None
    track_index = {t.key: t for t in tracks} if tracks is not None else None
    out = []
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(path, line_no, f"invalid JSON: {exc.msg}") from None
            if not isinstance(obj, dict):
                raise ParseError(path, line_no, "record must be a JSON object")
            rec = _build(kind, _coerce(kind, obj, strict))
            cid = getattr(rec, "clip_id", None)
            if clip_index is not None and cid is not None:
                clip = clip_index.get(cid)
                if clip is None:
                    raise DanglingReference(f"{path}:{line_no}: unknown clip_id {cid!r}")
                _check_against_clip(rec, clip)
            if track_index is not None and kind in ("labels", "scores"):
                track = track_index.get(rec.key)
                if track is None:
                    raise DanglingReference(
                        f"{path}:{line_no}: unknown track {rec.clip_id}/{rec.track_id}"
                    )
                n = len(rec.active) if kind == "labels" else len(rec.scores)
                if n != track.frame_count:
                    raise ValidationError(
                        _record_id(obj), f"length {n} != track frame_count {track.frame_count}"
                    )
            out.append(rec)
    return out


def _check_against_clip(rec, clip: ClipMeta) -> None:
    if isinstance(rec, FaceTrack) and rec.end_frame > clip.n_frames:
        raise ValidationError(
            f"{rec.clip_id}/{rec.track_id}",
            f"track ends at frame {rec.end_frame} beyond clip limit {clip.n_frames}",
        )
    if isinstance(rec, Utterance) and rec.end_s > clip.duration_s:
        raise ValidationError(rec.utt_id, f"end_s={rec.end_s} exceeds clip duration {clip.duration_s}")


def dumps_record(rec) -> str:
    return json.dumps(rec.to_record(), separators=(",", ":"), ensure_ascii=False, allow_nan=False)


def write_manifest(path: str | Path, records: Iterable) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(dumps_record(rec))
            fh.write("\n")


# --------------------------------------------------------------------------
# binary embedding sidecar: per record u32 key length, utf-8 key, u32 rows,
# u32 cols, rows*cols little-endian float32

def write_embedding_sidecar(path: str | Path, items: Iterable[tuple[str, np.ndarray]]) -> None:
    with Path(path).open("wb") as fh:
        for key, mat in items:
            m = np.atleast_2d(np.asarray(mat, dtype="<f4"))
            kb = key.encode("utf-8")
            fh.write(struct.pack("<I", len(kb)))
            fh.write(kb)
            fh.write(struct.pack("<II", *m.shape))
            fh.write(np.ascontiguousarray(m).tobytes())


def read_embedding_sidecar(path: str | Path) -> list[tuple[str, np.ndarray]]:
    data = Path(path).read_bytes()
    out = []
    pos = 0
    while pos < len(data):
        try:
            (klen,) = struct.unpack_from("<I", data, pos)
            pos += 4
            key = data[pos : pos + klen].decode("utf-8")
            pos += klen
            rows, cols = struct.unpack_from("<II", data, pos)
            pos += 8
            nbytes = rows * cols * 4
            if pos + nbytes > len(data):
                raise struct.error("truncated matrix")
        except (struct.error, UnicodeDecodeError) as exc:
            raise ParseError(path, 0, f"corrupt sidecar at byte {pos}: {exc}") from None
        mat = np.frombuffer(data, dtype="<f4", count=rows * cols, offset=pos).reshape(rows, cols)
        pos += nbytes
        out.append((key, mat.astype(np.float64)))
    return out


# --------------------------------------------------------------------------
# bundles

@dataclass(frozen=True)
class Bundle:
    """All manifests of one dataset, with lookup helpers."""

    clips: tuple = ()
    tracks: tuple = ()
    labels: tuple = ()
    utterances: tuple = ()
    utt_embeddings: tuple = ()
    face_embeddings: tuple = ()
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        for name in ("clips", "tracks", "labels", "utterances", "utt_embeddings", "face_embeddings"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        idx = self._index
        idx["clip"] = {c.clip_id: c for c in self.clips}
        idx["track"] = {t.key: t for t in self.tracks}
        idx["label"] = {lab.key: lab for lab in self.labels}
        idx["utt"] = {u.utt_id: u for u in self.utterances}
        idx["uemb"] = {e.utt_id: e for e in self.utt_embeddings}
        idx["femb"] = {f.key: f for f in self.face_embeddings}
        by_clip: dict[str, dict[str, list]] = {}
        for c in self.clips:
            by_clip[c.clip_id] = {"tracks": [], "utts": [], "faces": []}
        for t in self.tracks:
            by_clip.setdefault(t.clip_id, {"tracks": [], "utts": [], "faces": []})["tracks"].append(t)
        for u in self.utterances:
            by_clip.setdefault(u.clip_id, {"tracks": [], "utts": [], "faces": []})["utts"].append(u)
        for f in self.face_embeddings:
            by_clip.setdefault(f.clip_id, {"tracks": [], "utts": [], "faces": []})["faces"].append(f)
        idx["by_clip"] = by_clip

    def clip(self, clip_id: str) -> ClipMeta:
        return self._index["clip"][clip_id]

    def track(self, clip_id: str, track_id: str) -> FaceTrack:
        return self._index["track"][(clip_id, track_id)]

    def label(self, clip_id: str, track_id: str) -> SpeakingLabel:
        return self._index["label"][(clip_id, track_id)]

    def utterance(self, utt_id: str) -> Utterance:
        return self._index["utt"][utt_id]

    def utt_embedding(self, utt_id: str) -> UtteranceEmbedding:
        return self._index["uemb"][utt_id]

    def face_embedding(self, clip_id: str, person_id: str) -> FaceEmbeddingTrack:
        return self._index["femb"][(clip_id, person_id)]

    def tracks_of(self, clip_id: str) -> list[FaceTrack]:
        return list(self._index["by_clip"].get(clip_id, {}).get("tracks", []))

    def utterances_of(self, clip_id: str) -> list[Utterance]:
        return list(self._index["by_clip"].get(clip_id, {}).get("utts", []))

    def faces_of(self, clip_id: str) -> list[FaceEmbeddingTrack]:
        return list(self._index["by_clip"].get(clip_id, {}).get("faces", []))

    @property
    def clip_ids(self) -> list[str]:
        return [c.clip_id for c in self.clips]

    def replace(self, **changes) -> "Bundle":
        kw = {
            name: getattr(self, name)
            for name in ("clips", "tracks", "labels", "utterances", "utt_embeddings", "face_embeddings")
        }
        kw.update(changes)
        return Bundle(**kw)


_BUNDLE_ATTR = {
    "clips": "clips",
    "tracks": "tracks",
    "labels": "labels",
    "utterances": "utterances",
    "utt_emb": "utt_embeddings",
    "face_emb": "face_embeddings",
}


def load_bundle(directory: str | Path, *, strict: bool = True) -> Bundle:
    """Load every manifest present in ``directory``; missing files are empty."""
    directory = Path(directory)
    parts = {}
    for kind, fname in BUNDLE_FILES.items():
        p = directory / fname
        parts[_BUNDLE_ATTR[kind]] = load_manifest(p, kind, strict=strict) if p.exists() else []
    return Bundle(**parts)


def write_bundle(directory: str | Path, bundle: Bundle) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for kind, fname in BUNDLE_FILES.items():
        write_manifest(directory / fname, getattr(bundle, _BUNDLE_ATTR[kind]))


@dataclass(frozen=True)
class Finding:
    kind: str
    record_id: str
    message: str

    def __str__(self):
        return f"{self.kind} {self.record_id}: {self.message}"


def _dupes(keys: Iterable) -> list:
    seen, dup = set(), []
    for k in keys:
        if k in seen:
            dup.append(k)
        seen.add(k)
    return dup


def validate_bundle(
    clips: Sequence[ClipMeta],
    tracks: Sequence[FaceTrack],
    labels: Sequence[SpeakingLabel],
    utterances: Sequence[Utterance],
    embeddings: Sequence[UtteranceEmbedding],
    face_embeddings: Sequence[FaceEmbeddingTrack] = (),
    scores: Sequence[FrameScoreStream] = (),
) -> list[Finding]:
    """Cross-check individually valid collections.

    Returns one finding per problem; an empty list means the bundle can be
    scored and evaluated.
    """
    findings: list[Finding] = []

    def add(kind, rid, msg):
        findings.append(Finding(kind, str(rid), msg))

    for k in _dupes(c.clip_id for c in clips):
        add("duplicate", k, "duplicate clip_id")
    for k in _dupes(t.key for t in tracks):
        add("duplicate", "/".join(k), "duplicate track")
    for k in _dupes(lab.key for lab in labels):
        add("duplicate", "/".join(k), "duplicate label")
    for k in _dupes(u.utt_id for u in utterances):
        add("duplicate", k, "duplicate utt_id")
    for k in _dupes(e.utt_id for e in embeddings):
        add("duplicate", k, "duplicate utterance embedding")
    for k in _dupes(f.key for f in face_embeddings):
        add("duplicate", "/".join(k), "person appears more than once in face embeddings")
    for k in _dupes(s.key for s in scores):
        add("duplicate", "/".join(k), "duplicate score stream")

    clip_index = {c.clip_id: c for c in clips}
    track_index = {t.key: t for t in tracks}
    persons = {(t.clip_id, t.person_id) for t in tracks}
    utt_ids = {u.utt_id for u in utterances}

    for t in tracks:
        rid = f"{t.clip_id}/{t.track_id}"
        clip = clip_index.get(t.clip_id)
        if clip is None:
            add("dangling", rid, f"unknown clip_id {t.clip_id!r}")
        elif t.end_frame > clip.n_frames:
            add("range", rid, f"track ends at frame {t.end_frame} beyond clip limit {clip.n_frames}")

    labelled = set()
    for lab in labels:
        rid = f"{lab.clip_id}/{lab.track_id}"
        labelled.add(lab.key)
        t = track_index.get(lab.key)
        if t is None:
            add("dangling", rid, "label references unknown track")
        elif len(lab.active) != t.frame_count:
            add("length", rid, f"LengthMismatch: {len(lab.active)} labels for {t.frame_count} frames")
    for t in tracks:
        if t.key not in labelled:
            add("missing", f"{t.clip_id}/{t.track_id}", "track has no label")

    for u in utterances:
        clip = clip_index.get(u.clip_id)
        if clip is None:
            add("dangling", u.utt_id, f"unknown clip_id {u.clip_id!r}")
        elif u.end_s > clip.duration_s:
            add("range", u.utt_id, f"end_s={u.end_s} exceeds clip duration {clip.duration_s}")

    dims = {e.dim for e in embeddings}
    if len(dims) > 1:
        add("dimension", "utt_emb", f"inconsistent speaker embedding dimensions {sorted(dims)}")
    embedded = set()
    for e in embeddings:
        embedded.add(e.utt_id)
        if e.utt_id not in utt_ids:
            add("dangling", e.utt_id, "embedding references unknown utterance")
    if embeddings or face_embeddings:
        for u in utterances:
            if u.utt_id not in embedded:
                add("missing", u.utt_id, "utterance has no embedding")

    fdims = {f.dim for f in face_embeddings}
    if len(fdims) > 1:
        add("dimension", "face_emb", f"inconsistent face embedding dimensions {sorted(fdims)}")
    for f in face_embeddings:
        if f.key not in persons:
            add("dangling", f"{f.clip_id}/{f.person_id}", "face embeddings for a person with no track")
    if face_embeddings:
        have = {f.key for f in face_embeddings}
        for key in sorted(persons - have):
            add("missing", "/".join(key), "visible person has no face embeddings")

    for s in scores:
        rid = f"{s.clip_id}/{s.track_id}"
        t = track_index.get(s.key)
        if t is None:
            add("dangling", rid, "score stream references unknown track")
        elif len(s.scores) != t.frame_count:
            add("length", rid, f"LengthMismatch: {len(s.scores)} scores for {t.frame_count} frames")
    return findings
