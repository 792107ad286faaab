import json

import numpy as np
import pytest

from asdkit.datamodel import (
    BUNDLE_FILES,
    ClipMeta,
    FaceTrack,
    FrameScoreStream,
    SpeakingLabel,
    Utterance,
    UtteranceEmbedding,
    load_bundle,
    load_manifest,
    read_embedding_sidecar,
    validate_bundle,
    write_bundle,
    write_embedding_sidecar,
    write_manifest,
)
from asdkit.exceptions import DanglingReference, ParseError, ValidationError


def test_empty_file_gives_empty_collection(tmp_path):
    p = tmp_path / "tracks.jsonl"
    p.write_text("")
    assert load_manifest(p, "tracks") == []


def test_quality_length_mismatch_names_track():
    with pytest.raises(ValidationError) as err:
        FaceTrack("c1", "t7", "p0", 0, 10, quality=np.full(9, 0.5))
    assert "c1/t7" in str(err.value)


def test_quality_mismatch_from_file(tmp_path):
    p = tmp_path / "tracks.jsonl"
    rec = {"clip_id": "c", "track_id": "t", "person_id": "p", "start_frame": 0,
           "frame_count": 10, "quality": [0.5] * 9}
    p.write_text(json.dumps(rec) + "\n")
    with pytest.raises(ValidationError, match="c/t"):
        load_manifest(p, "tracks")


def test_bad_json_reports_line(tmp_path):
    p = tmp_path / "clips.jsonl"
    p.write_text('{"clip_id":"a","duration_s":1,"video_fps":30,"audio_sample_rate":16000,"n_audio_samples":16000}\n{oops\n')
    with pytest.raises(ParseError) as err:
        load_manifest(p, "clips")
    assert err.value.line_no == 2


def test_strict_rejects_unknown_keys(tmp_path):
    p = tmp_path / "utterances.jsonl"
    p.write_text('{"clip_id":"c","utt_id":"u","start_s":0.0,"end_s":1.0,"extra":1}\n')
    with pytest.raises(ValidationError):
        load_manifest(p, "utterances")
    (u,) = load_manifest(p, "utterances", strict=False)
    assert u.utt_id == "u"


def test_dangling_clip_reference(tmp_path):
    p = tmp_path / "utterances.jsonl"
    p.write_text('{"clip_id":"nope","utt_id":"u","start_s":0.0,"end_s":1.0}\n')
    with pytest.raises(DanglingReference):
        load_manifest(p, "utterances", clips=[ClipMeta("c", 5.0)])


def test_scores_outside_unit_interval_rejected():
    with pytest.raises(ValidationError):
        FrameScoreStream("c", "t", [0.2, 1.5])


@pytest.mark.parametrize("kind", list(BUNDLE_FILES))
def test_roundtrip_is_byte_identical(tmp_path, small_bundle, kind):
    write_bundle(tmp_path / "a", small_bundle)
    first = tmp_path / "a" / BUNDLE_FILES[kind]
    recs = load_manifest(first, kind)
    write_manifest(tmp_path / "b.jsonl", recs)
    assert (tmp_path / "b.jsonl").read_bytes() == first.read_bytes()


def test_bundle_roundtrip_structurally_equal(tmp_path, small_bundle):
    write_bundle(tmp_path, small_bundle)
    again = load_bundle(tmp_path)
    assert again.tracks == small_bundle.tracks
    assert again.face_embeddings == small_bundle.face_embeddings
    for t in again.tracks:
        assert np.all((t.quality >= 0) & (t.quality <= 1))


def test_simulated_bundle_validates_clean(small_bundle, small_sync):
    b = small_bundle
    findings = validate_bundle(b.clips, b.tracks, b.labels, b.utterances, b.utt_embeddings,
                               b.face_embeddings, small_sync)
    assert findings == []


def test_label_for_missing_track_is_one_finding(small_bundle):
    b = small_bundle
    stray = SpeakingLabel(b.clips[0].clip_id, "ghost", np.zeros(5, bool))
    findings = validate_bundle(b.clips, b.tracks, list(b.labels) + [stray], b.utterances, b.utt_embeddings)
    assert len(findings) == 1
    assert findings[0].kind == "dangling"


def test_duplicate_utterance_embedding(small_bundle):
    b = small_bundle
    dup = UtteranceEmbedding(b.utt_embeddings[0].utt_id, b.utt_embeddings[0].vector)
    findings = validate_bundle(b.clips, b.tracks, b.labels, b.utterances, list(b.utt_embeddings) + [dup])
    assert [f.kind for f in findings] == ["duplicate"]


def test_length_mismatch_finding():
    clip = ClipMeta("c", 2.0)
    track = FaceTrack("c", "t", "p", 0, 10)
    lab = SpeakingLabel("c", "t", np.zeros(10, bool))
    short = FrameScoreStream("c", "t", np.zeros(9))
    findings = validate_bundle([clip], [track], [lab], [], [], scores=[short])
    assert len(findings) == 1 and "LengthMismatch" in str(findings[0])


def test_utterance_beyond_clip_is_range_finding():
    findings = validate_bundle([ClipMeta("c", 2.0)], [], [], [Utterance("c", "u", 1.0, 3.0)], [])
    assert [f.kind for f in findings] == ["range"]


def test_sidecar_roundtrip(tmp_path, rng):
    items = [("u1", rng.normal(size=(1, 8))), ("c/p0", rng.normal(size=(5, 8)))]
    write_embedding_sidecar(tmp_path / "e.bin", items)
    back = read_embedding_sidecar(tmp_path / "e.bin")
    assert [k for k, _ in back] == ["u1", "c/p0"]
    for (_, a), (_, b) in zip(items, back):
        np.testing.assert_array_equal(b, a.astype(np.float32))


def test_records_are_read_only():
    s = FrameScoreStream("c", "t", [0.1, 0.2])
    with pytest.raises(ValueError):
        s.scores[0] = 0.5
