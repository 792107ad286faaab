"""Ensemble active speaker detection: face-voice association scoring,
frame projection, weighted late fusion and AP-based evaluation."""

__version__ = "0.1.0"

from .align import FrameSpan, project_assoc, utterance_to_span
from .datamodel import (
    Bundle,
    ClipMeta,
    FaceEmbeddingTrack,
    FaceTrack,
    FrameScoreStream,
    SpeakingLabel,
    Utterance,
    UtteranceEmbedding,
    load_bundle,
    load_manifest,
    validate_bundle,
    write_bundle,
    write_manifest,
)
from .fusion import FusionConfig, WeightedMeanFusion, fuse, fuse_streams, sweep_alpha
from .fva import FaceVoiceAssociator, HeadParams, MatchBatch, TrainConfig, match_probs, score_clip, train_head
from .metrics import binary_ap, evaluate, voc2012_ap
from .pipeline import run_trend_experiments
from .simgen import SimConfig, degrade_sync, generate_bundle, synth_sync_scores
from .strata import masking_experiment, stratify_by_quality, track_quality

__all__ = [
    "Bundle", "ClipMeta", "FaceEmbeddingTrack", "FaceTrack", "FrameScoreStream", "SpeakingLabel",
    "Utterance", "UtteranceEmbedding", "load_bundle", "load_manifest", "validate_bundle",
    "write_bundle", "write_manifest", "FrameSpan", "project_assoc", "utterance_to_span",
    "FusionConfig", "WeightedMeanFusion", "fuse", "fuse_streams", "sweep_alpha",
    "FaceVoiceAssociator", "HeadParams", "MatchBatch", "TrainConfig", "match_probs", "score_clip",
    "train_head", "binary_ap", "evaluate", "voc2012_ap", "SimConfig", "degrade_sync",
    "generate_bundle", "synth_sync_scores", "masking_experiment", "stratify_by_quality",
    "track_quality", "run_trend_experiments",
]
