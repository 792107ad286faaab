"""Face-voice association scoring head.

Speaker and face embeddings are projected to a shared width ``d``. Each
visible identity's frame sequence passes through one pre-norm transformer
encoder layer (multi-head self-attention + GELU feed-forward, no positional
encoding) and is mean-pooled to a single vector. Utterances are matched to
identities by scaled dot-product cross-attention, giving one probability
distribution over visible identities per utterance.

Everything runs in float64 numpy with hand-written backward passes so the
training loss can be checked against finite differences.
"""
from __future__ import annotations

import io
import logging
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .datamodel import Bundle
from .exceptions import (
    DanglingReference,
    DimensionMismatch,
    InvalidConfig,
    MissingLabel,
    NoVisibleIdentity,
    ParseError,
)
from ._validation import check_positive_int

__all__ = [
    "HeadParams",
    "MatchBatch",
    "TrainConfig",
    "init_params",
    "aggregate_faces",
    "match_probs",
    "loss_and_grads",
    "training_batches",
    "train_head",
    "score_clip",
    "clip_batch",
    "FaceVoiceAssociator",
]

log = logging.getLogger(__name__)

LN_EPS = 1e-5
_GELU_K = math.sqrt(2.0 / math.pi)
_MAGIC = b"FVAH"
_FORMAT_VERSION = 1

PROJECTION_PARAMS = ("audio_proj.W", "audio_proj.b", "face_proj.W", "face_proj.b")
ENCODER_FFN_PARAMS = ("enc.ffn.W1", "enc.ffn.b1", "enc.ffn.W2")


@dataclass
class HeadParams:
    d_speaker: int
    d_face: int
    d: int = 64
    n_heads: int = 4
    xattn_heads: int = 4
    d_ff: int | None = None
    tensors: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.d_ff is None:
            self.d_ff = 4 * self.d
        for name, val in (("n_heads", self.n_heads), ("xattn_heads", self.xattn_heads)):
            check_positive_int(val, name)
            if self.d % val:
                raise InvalidConfig(f"{name}={val} does not divide d={self.d}")
        for name, arr in self.tensors.items():
            if not np.all(np.isfinite(arr)):
                raise InvalidConfig(f"parameter {name} has non-finite entries")

    def shapes(self) -> dict:
        # no key bias and no bias after the second feed-forward matrix: both
        # shift every softmax input equally and never reach the output
        d, dff = self.d, self.d_ff
        return {
            "audio_proj.W": (self.d_speaker, d),
            "audio_proj.b": (d,),
            "face_proj.W": (self.d_face, d),
            "face_proj.b": (d,),
            "enc.ln1.g": (d,),
            "enc.ln1.b": (d,),
            "enc.attn.Wq": (d, d),
            "enc.attn.bq": (d,),
            "enc.attn.Wk": (d, d),
            "enc.attn.Wv": (d, d),
            "enc.attn.bv": (d,),
            "enc.attn.Wo": (d, d),
            "enc.attn.bo": (d,),
            "enc.ln2.g": (d,),
            "enc.ln2.b": (d,),
            "enc.ffn.W1": (d, dff),
            "enc.ffn.b1": (dff,),
            "enc.ffn.W2": (dff, d),
            "xattn.Wq": (d, d),
            "xattn.Wk": (d, d),
        }

    def __getitem__(self, name) -> np.ndarray:
        return self.tensors[name]

    def copy(self) -> "HeadParams":
        return HeadParams(
            self.d_speaker, self.d_face, self.d, self.n_heads, self.xattn_heads, self.d_ff,
            {k: v.copy() for k, v in self.tensors.items()},
        )

    # binary format: b"FVAH", u16 version, u32 x 6 dimension header, u32 tensor
    # count, then per tensor u16 name length, name, u8 ndim, u32 dims, f64 data
    def to_bytes(self) -> bytes:
        buf = io.BytesIO()
        buf.write(_MAGIC)
        buf.write(struct.pack("<H", _FORMAT_VERSION))
        buf.write(struct.pack("<6I", self.d_speaker, self.d_face, self.d, self.n_heads, self.xattn_heads, self.d_ff))
        buf.write(struct.pack("<I", len(self.tensors)))
        for name in self.shapes():
            arr = np.ascontiguousarray(self.tensors[name], dtype="<f8")
            nb = name.encode("ascii")
            buf.write(struct.pack("<H", len(nb)))
            buf.write(nb)
            buf.write(struct.pack("<B", arr.ndim))
            buf.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            buf.write(arr.tobytes())
        return buf.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes, source: str = "<bytes>") -> "HeadParams":
        try:
            if data[:4] != _MAGIC:
                raise ValueError("bad magic bytes")
            (version,) = struct.unpack_from("<H", data, 4)
            if version != _FORMAT_VERSION:
                raise ValueError(f"unsupported version {version}")
            dims = struct.unpack_from("<6I", data, 6)
            (count,) = struct.unpack_from("<I", data, 30)
            pos = 34
            tensors = {}
            for _ in range(count):
                (nlen,) = struct.unpack_from("<H", data, pos)
                pos += 2
                name = data[pos : pos + nlen].decode("ascii")
                pos += nlen
                (ndim,) = struct.unpack_from("<B", data, pos)
                pos += 1
                shape = struct.unpack_from(f"<{ndim}I", data, pos)
                pos += 4 * ndim
                n = int(np.prod(shape)) if shape else 1
                if pos + 8 * n > len(data):
                    raise ValueError(f"truncated tensor {name}")
                tensors[name] = np.frombuffer(data, dtype="<f8", count=n, offset=pos).reshape(shape).copy()
                pos += 8 * n
        except (struct.error, ValueError, UnicodeDecodeError) as exc:
            raise ParseError(source, 0, f"invalid FVAH file: {exc}") from None
        params = cls(*dims, tensors=tensors)
        expected = params.shapes()
        if set(tensors) != set(expected) or any(tensors[k].shape != s for k, s in expected.items()):
            raise ParseError(source, 0, "tensor set does not match the header dimensions")
        return params

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> "HeadParams":
        return cls.from_bytes(Path(path).read_bytes(), str(path))


def init_params(
    d_speaker: int,
    d_face: int,
    d: int = 64,
    n_heads: int = 4,
    xattn_heads: int = 4,
    rng: np.random.Generator | int | None = 0,
) -> HeadParams:
    rng = np.random.default_rng(rng)
    p = HeadParams(d_speaker, d_face, d, n_heads, xattn_heads)
    for name, shape in p.shapes().items():
        if name.endswith(".g"):
            p.tensors[name] = np.ones(shape)
        elif len(shape) == 1:
            p.tensors[name] = np.zeros(shape)
        else:
            p.tensors[name] = rng.normal(0.0, 1.0 / math.sqrt(shape[0]), size=shape)
    return p


@dataclass(frozen=True)
class MatchBatch:
    """Utterance embeddings of one clip against all of its visible identities."""

    clip_id: str
    audio: np.ndarray
    faces: tuple
    person_ids: tuple = ()
    utt_ids: tuple = ()

    def __post_init__(self):
        audio = np.atleast_2d(np.asarray(self.audio, dtype=np.float64))
        object.__setattr__(self, "audio", audio)
        object.__setattr__(self, "faces", tuple(np.asarray(f, dtype=np.float64) for f in self.faces))
        if audio.shape[0] < 1:
            raise ValueError("a match batch needs at least one utterance")
        if not self.faces:
            raise NoVisibleIdentity(f"clip {self.clip_id!r} has no visible identity")
        if not self.person_ids:
            object.__setattr__(self, "person_ids", tuple(str(i) for i in range(len(self.faces))))
        if len(self.person_ids) != len(self.faces):
            raise ValueError("person_ids and faces differ in length")


# --------------------------------------------------------------------------
# primitives

def _ln_fwd(x, g, b):
    mu = x.mean(-1, keepdims=True)
    xc = x - mu
    inv = 1.0 / np.sqrt((xc * xc).mean(-1, keepdims=True) + LN_EPS)
    xhat = xc * inv
    return xhat * g + b, (xhat, inv, g)


def _ln_bwd(dy, cache):
    xhat, inv, g = cache
    dg = (dy * xhat).sum(0)
    db = dy.sum(0)
    dxhat = dy * g
    dx = inv * (dxhat - dxhat.mean(-1, keepdims=True) - xhat * (dxhat * xhat).mean(-1, keepdims=True))
    return dx, dg, db


def _gelu(x):
    t = np.tanh(_GELU_K * (x + 0.044715 * x * x * x))
    return 0.5 * x * (1.0 + t), t


def _gelu_grad(x, t):
    return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * _GELU_K * (1.0 + 3 * 0.044715 * x * x)


def _softmax_lastaxis(z, order_free=False):
    e = np.exp(z - z.max(-1, keepdims=True))
    if order_free:
        # summing sorted exponentials makes the normaliser independent of the
        # order of entries, so permuted inputs give bitwise-permuted outputs
        return e / np.sort(e, axis=-1).sum(-1, keepdims=True)
    return e / e.sum(-1, keepdims=True)


def _canonical_frames(frames: np.ndarray, max_frames: int | None) -> np.ndarray:
    """Lexicographic row order, then even subsampling down to ``max_frames``."""
    order = np.lexsort(frames.T[::-1])
    frames = frames[order]
    if max_frames is not None and frames.shape[0] > max_frames:
        idx = np.linspace(0, frames.shape[0] - 1, max_frames).round().astype(int)
        frames = frames[idx]
    return frames


# --------------------------------------------------------------------------
# forward / backward

def _encode_identity(p: HeadParams, frames: np.ndarray):
    t = p.tensors
    H, dh = p.n_heads, p.d // p.n_heads
    T = frames.shape[0]
    z0 = frames @ t["face_proj.W"] + t["face_proj.b"]
    a, ln1 = _ln_fwd(z0, t["enc.ln1.g"], t["enc.ln1.b"])
    q = (a @ t["enc.attn.Wq"] + t["enc.attn.bq"]).reshape(T, H, dh).transpose(1, 0, 2)
    k = (a @ t["enc.attn.Wk"]).reshape(T, H, dh).transpose(1, 0, 2)
    v = (a @ t["enc.attn.Wv"] + t["enc.attn.bv"]).reshape(T, H, dh).transpose(1, 0, 2)
    att = _softmax_lastaxis(q @ k.transpose(0, 2, 1) / math.sqrt(dh))
    o = (att @ v).transpose(1, 0, 2).reshape(T, p.d)
    z1 = z0 + o @ t["enc.attn.Wo"] + t["enc.attn.bo"]
    bn, ln2 = _ln_fwd(z1, t["enc.ln2.g"], t["enc.ln2.b"])
    f1 = bn @ t["enc.ffn.W1"] + t["enc.ffn.b1"]
    g, tanh_t = _gelu(f1)
    z2 = z1 + g @ t["enc.ffn.W2"]
    pooled = z2.mean(0)
    cache = (frames, a, ln1, q, k, v, att, o, bn, ln2, f1, g, tanh_t)
    return pooled, cache


def _encode_identity_bwd(p: HeadParams, dpooled: np.ndarray, cache, grads: dict) -> None:
    t = p.tensors
    frames, a, ln1, q, k, v, att, o, bn, ln2, f1, g, tanh_t = cache
    H, dh = p.n_heads, p.d // p.n_heads
    T = frames.shape[0]
    # mean pooling sends the same gradient row to every frame
    drow = dpooled / T
    grads["enc.ffn.W2"] += np.outer(g.sum(0), drow)
    df1 = (drow @ t["enc.ffn.W2"].T) * _gelu_grad(f1, tanh_t)
    grads["enc.ffn.W1"] += bn.T @ df1
    grads["enc.ffn.b1"] += df1.sum(0)
    dbn = df1 @ t["enc.ffn.W1"].T
    dx, dg_, db_ = _ln_bwd(dbn, ln2)
    grads["enc.ln2.g"] += dg_
    grads["enc.ln2.b"] += db_
    dz1 = drow + dx

    grads["enc.attn.Wo"] += o.T @ dz1
    grads["enc.attn.bo"] += dz1.sum(0)
    do = (dz1 @ t["enc.attn.Wo"].T).reshape(T, H, dh).transpose(1, 0, 2)
    datt = do @ v.transpose(0, 2, 1)
    dv = att.transpose(0, 2, 1) @ do
    ds = att * (datt - (datt * att).sum(-1, keepdims=True)) / math.sqrt(dh)
    dq = ds @ k
    dk = ds.transpose(0, 2, 1) @ q

    def merge(x):
        return x.transpose(1, 0, 2).reshape(T, p.d)

    dq, dk, dv = merge(dq), merge(dk), merge(dv)
    grads["enc.attn.Wq"] += a.T @ dq
    grads["enc.attn.bq"] += dq.sum(0)
    grads["enc.attn.Wk"] += a.T @ dk
    grads["enc.attn.Wv"] += a.T @ dv
    grads["enc.attn.bv"] += dv.sum(0)
    da = dq @ t["enc.attn.Wq"].T + dk @ t["enc.attn.Wk"].T + dv @ t["enc.attn.Wv"].T
    dx, dg_, db_ = _ln_bwd(da, ln1)
    grads["enc.ln1.g"] += dg_
    grads["enc.ln1.b"] += db_
    dz0 = dz1 + dx

    grads["face_proj.W"] += frames.T @ dz0
    grads["face_proj.b"] += dz0.sum(0)


def _check_batch_dims(p: HeadParams, audio: np.ndarray, faces: Sequence[np.ndarray]) -> None:
    if audio.ndim != 2 or audio.shape[1] != p.d_speaker:
        raise DimensionMismatch(f"speaker embeddings have shape {audio.shape}, expected (*, {p.d_speaker})")
    for f in faces:
        if f.ndim != 2 or f.shape[0] < 1 or f.shape[1] != p.d_face:
            raise DimensionMismatch(f"face frames have shape {f.shape}, expected (>=1, {p.d_face})")


def aggregate_faces(p: HeadParams, video: Sequence, max_frames: int | None = None) -> np.ndarray:
    """Pool each identity's frames into one d-vector; returns |identities| x d.

    ``video`` holds one T x d_F matrix (or FaceEmbeddingTrack) per identity.
    Frames are put in a canonical order first, which leaves the result
    unchanged mathematically and makes frame-permutation invariance exact.
    """
    mats = [np.asarray(getattr(v, "frames", v), dtype=np.float64) for v in video]
    if not mats:
        raise NoVisibleIdentity("no identities to aggregate")
    _check_batch_dims(p, np.zeros((1, p.d_speaker)), mats)
    return np.stack([_encode_identity(p, _canonical_frames(m, max_frames))[0] for m in mats])


def _xattn_scale(p: HeadParams) -> float:
    # head logits q_h.k_h / sqrt(d_h), averaged over heads
    return 1.0 / (p.xattn_heads * math.sqrt(p.d // p.xattn_heads))


def _logits(p: HeadParams, audio: np.ndarray, pooled: np.ndarray):
    t = p.tensors
    u = audio @ t["audio_proj.W"] + t["audio_proj.b"]
    qx = u @ t["xattn.Wq"]
    kx = pooled @ t["xattn.Wk"]
    # per-pair elementwise products keep each logit independent of identity order
    logits = (qx[:, None, :] * kx[None, :, :]).sum(-1) * _xattn_scale(p)
    return logits, (u, qx, kx)


def match_probs(p: HeadParams, batch: MatchBatch, max_frames: int | None = None) -> np.ndarray:
    """N_u x |identities| matrix; each row is a distribution over identities."""
    _check_batch_dims(p, batch.audio, batch.faces)
    pooled = aggregate_faces(p, batch.faces, max_frames)
    logits, _ = _logits(p, batch.audio, pooled)
    return _softmax_lastaxis(logits, order_free=True)


def loss_and_grads(
    p: HeadParams, batch: MatchBatch, targets: Sequence[int], max_frames: int | None = None
) -> tuple[float, dict]:
    """Mean cross-entropy of the match rows against target identity indices."""
    t = p.tensors
    _check_batch_dims(p, batch.audio, batch.faces)
    targets = np.asarray(targets, dtype=int)
    n = batch.audio.shape[0]
    if targets.shape != (n,):
        raise ValueError(f"need one target per utterance ({n}), got {targets.shape}")
    caches, pooled = [], []
    for f in batch.faces:
        v, c = _encode_identity(p, _canonical_frames(f, max_frames))
        pooled.append(v)
        caches.append(c)
    pooled = np.stack(pooled)
    logits, (u, qx, kx) = _logits(p, batch.audio, pooled)
    z = logits - logits.max(-1, keepdims=True)
    logz = np.log(np.exp(z).sum(-1))
    loss = float(np.mean(logz - z[np.arange(n), targets]))

    grads = {k: np.zeros_like(v) for k, v in t.items()}
    dlog = _softmax_lastaxis(logits, order_free=True)
    dlog[np.arange(n), targets] -= 1.0
    dlog /= n
    scale = _xattn_scale(p)
    dqx = scale * dlog @ kx
    dkx = scale * dlog.T @ qx
    grads["xattn.Wq"] += u.T @ dqx
    grads["xattn.Wk"] += pooled.T @ dkx
    du = dqx @ t["xattn.Wq"].T
    grads["audio_proj.W"] += batch.audio.T @ du
    grads["audio_proj.b"] += du.sum(0)
    dpooled = dkx @ t["xattn.Wk"].T
    for i, c in enumerate(caches):
        _encode_identity_bwd(p, dpooled[i], c, grads)
    return loss, grads


# --------------------------------------------------------------------------
# training

@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-5
    decay_factor: float = 0.2
    decay_every: int = 5
    epochs: int = 10
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    freeze_projections: bool = True
    train_encoder_ffn: bool = True
    max_frames: int | None = 128
    seed: int = 0

    def __post_init__(self):
        if not self.lr > 0:
            raise InvalidConfig("lr must be > 0")
        if not 0 < self.decay_factor <= 1:
            raise InvalidConfig("decay_factor must lie in (0, 1]")
        check_positive_int(self.decay_every, "decay_every")
        check_positive_int(self.epochs, "epochs", minimum=0)
        if self.max_frames is not None:
            check_positive_int(self.max_frames, "max_frames")

    def lr_at(self, epoch: int) -> float:
        return self.lr * self.decay_factor ** (epoch // self.decay_every)

    def frozen(self) -> set:
        out = set()
        if self.freeze_projections:
            out.update(PROJECTION_PARAMS)
        if not self.train_encoder_ffn:
            out.update(ENCODER_FFN_PARAMS)
        return out


def clip_batch(bundle: Bundle, clip_id: str, utt_ids: Sequence[str] | None = None) -> MatchBatch:
    """Batch of ``utt_ids`` (default: every utterance) against all faces of a clip."""
    faces = sorted(bundle.faces_of(clip_id), key=lambda f: f.person_id)
    if not faces:
        raise NoVisibleIdentity(f"clip {clip_id!r} has no face embeddings")
    if utt_ids is None:
        utt_ids = [u.utt_id for u in bundle.utterances_of(clip_id)]
    vectors = []
    for uid in utt_ids:
        try:
            vectors.append(bundle.utt_embedding(uid).vector)
        except KeyError:
            raise DanglingReference(f"utterance {uid!r} has no speaker embedding") from None
    return MatchBatch(
        clip_id=clip_id,
        audio=np.stack(vectors),
        faces=tuple(f.frames for f in faces),
        person_ids=tuple(f.person_id for f in faces),
        utt_ids=tuple(utt_ids),
    )


def training_batches(bundle: Bundle) -> list[tuple[MatchBatch, np.ndarray]]:
    """One batch per (clip, speaking identity): all that identity's utterances."""
    out = []
    for clip_id in bundle.clip_ids:
        utts = bundle.utterances_of(clip_id)
        if not utts:
            continue
        by_speaker: dict[str, list[str]] = {}
        for u in utts:
            if u.speaker_hint is None:
                raise MissingLabel(f"utterance {u.utt_id!r} has no speaker_hint")
            by_speaker.setdefault(u.speaker_hint, []).append(u.utt_id)
        persons = sorted(f.person_id for f in bundle.faces_of(clip_id))
        if not persons:
            raise NoVisibleIdentity(f"clip {clip_id!r} has utterances but no visible identity")
        for speaker in sorted(by_speaker):
            if speaker not in persons:
                raise NoVisibleIdentity(
                    f"speaker {speaker!r} of clip {clip_id!r} is not among the visible identities"
                )
            batch = clip_batch(bundle, clip_id, by_speaker[speaker])
            out.append((batch, np.full(len(by_speaker[speaker]), persons.index(speaker))))
    return out


def train_head(p: HeadParams, bundle: Bundle, config: TrainConfig = TrainConfig()) -> tuple[HeadParams, list[float]]:
    """Adam with step decay on the cross-entropy loss; returns (params, per-epoch mean loss).

    The input params are not modified.
    """
    p = p.copy()
    batches = training_batches(bundle)
    if config.epochs == 0 or not batches:
        return p, []
    frozen = config.frozen()
    m = {k: np.zeros_like(v) for k, v in p.tensors.items()}
    v = {k: np.zeros_like(v) for k, v in p.tensors.items()}
    rng = np.random.default_rng(config.seed)
    step = 0
    trace = []
    for epoch in range(config.epochs):
        lr = config.lr_at(epoch)
        losses = []
        for i in rng.permutation(len(batches)):
            batch, targets = batches[i]
            loss, grads = loss_and_grads(p, batch, targets, config.max_frames)
            losses.append(loss)
            step += 1
            c1 = 1.0 - config.beta1**step
            c2 = 1.0 - config.beta2**step
            for name, g in grads.items():
                if name in frozen:
                    continue
                m[name] = config.beta1 * m[name] + (1 - config.beta1) * g
                v[name] = config.beta2 * v[name] + (1 - config.beta2) * g * g
                p.tensors[name] -= lr * (m[name] / c1) / (np.sqrt(v[name] / c2) + config.eps)
        trace.append(float(np.mean(losses)))
        if not np.isfinite(trace[-1]):
            raise FloatingPointError(f"training loss diverged at epoch {epoch}")
        log.debug("epoch %d lr %.3g loss %.5f", epoch, lr, trace[-1])
    return p, trace


def score_clip(p: HeadParams, bundle: Bundle, clip_id: str, max_frames: int | None = 128) -> list[tuple[str, str, float]]:
    """(utt_id, person_id, probability) for every utterance x visible identity."""
    if not bundle.utterances_of(clip_id):
        return []
    batch = clip_batch(bundle, clip_id)
    probs = match_probs(p, batch, max_frames)
    return [
        (uid, pid, float(probs[i, j]))
        for i, uid in enumerate(batch.utt_ids)
        for j, pid in enumerate(batch.person_ids)
    ]


class FaceVoiceAssociator(BaseEstimator):
    """Estimator wrapper around the association head.

    ``fit`` takes a :class:`Bundle` whose utterances carry ``speaker_hint``;
    ``predict_proba`` takes a :class:`MatchBatch`.
    """

    def __init__(
        self,
        d=64,
        n_heads=4,
        xattn_heads=4,
        lr=1e-5,
        decay_factor=0.2,
        decay_every=5,
        epochs=10,
        freeze_projections=True,
        train_encoder_ffn=True,
        max_frames=128,
        random_state=0,
    ):
        self.d = d
        self.n_heads = n_heads
        self.xattn_heads = xattn_heads
        self.lr = lr
        self.decay_factor = decay_factor
        self.decay_every = decay_every
        self.epochs = epochs
        self.freeze_projections = freeze_projections
        self.train_encoder_ffn = train_encoder_ffn
        self.max_frames = max_frames
        self.random_state = random_state

    def _config(self) -> TrainConfig:
        return TrainConfig(
            lr=self.lr,
            decay_factor=self.decay_factor,
            decay_every=self.decay_every,
            epochs=self.epochs,
            freeze_projections=self.freeze_projections,
            train_encoder_ffn=self.train_encoder_ffn,
            max_frames=self.max_frames,
            seed=self.random_state,
        )

    def fit(self, X: Bundle, y=None):
        if not X.utt_embeddings or not X.face_embeddings:
            raise ValueError("bundle needs utterance and face embeddings to fit")
        init = init_params(
            X.utt_embeddings[0].dim, X.face_embeddings[0].dim, self.d, self.n_heads, self.xattn_heads,
            rng=self.random_state,
        )
        self.params_, self.loss_curve_ = train_head(init, X, self._config())
        return self

    @classmethod
    def from_params(cls, params: HeadParams, **kwargs) -> "FaceVoiceAssociator":
        est = cls(d=params.d, n_heads=params.n_heads, xattn_heads=params.xattn_heads, **kwargs)
        est.params_ = params
        est.loss_curve_ = []
        return est

    def predict_proba(self, batch: MatchBatch) -> np.ndarray:
        check_is_fitted(self, "params_")
        return match_probs(self.params_, batch, self.max_frames)

    def predict(self, batch: MatchBatch) -> list[str]:
        probs = self.predict_proba(batch)
        return [batch.person_ids[j] for j in probs.argmax(1)]

    def score_clip(self, bundle: Bundle, clip_id: str) -> list[tuple[str, str, float]]:
        check_is_fitted(self, "params_")
        return score_clip(self.params_, bundle, clip_id, self.max_frames)

    def score_bundle(self, bundle: Bundle) -> list[tuple[str, str, float]]:
        out = []
        for clip_id in bundle.clip_ids:
            if bundle.faces_of(clip_id):
                out.extend(self.score_clip(bundle, clip_id))
        return out

    def accuracy(self, bundle: Bundle) -> float:
        """Fraction of hinted utterances whose argmax identity is the hinted one."""
        check_is_fitted(self, "params_")
        hits = total = 0
        for clip_id in bundle.clip_ids:
            if not bundle.faces_of(clip_id) or not bundle.utterances_of(clip_id):
                continue
            batch = clip_batch(bundle, clip_id)
            pred = self.predict(batch)
            for uid, pid in zip(batch.utt_ids, pred):
                hint = bundle.utterance(uid).speaker_hint
                if hint is not None:
                    total += 1
                    hits += hint == pid
        return hits / total if total else float("nan")
