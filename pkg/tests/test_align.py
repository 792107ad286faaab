import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import frames_bruteforce

from asdkit.align import FrameSpan, project_assoc, seconds_to_span, utterance_to_span
from asdkit.datamodel import FaceTrack, Utterance
from asdkit.exceptions import EmptySpan


def test_one_second_at_30fps():
    span = utterance_to_span(Utterance("c", "u", 1.0, 2.0), 30.0)
    assert (span.start_frame, span.end_frame) == (30, 60)


def test_span_before_first_midpoint_is_empty():
    with pytest.raises(EmptySpan):
        seconds_to_span(0.0, 0.01, 30.0)


@settings(max_examples=300, deadline=None)
@given(
    start=st.floats(0, 30, allow_nan=False),
    length=st.floats(1e-4, 5, allow_nan=False),
    fps=st.sampled_from([24.0, 25.0, 29.97, 30.0, 60.0]),
)
def test_span_matches_midpoint_bruteforce(start, length, fps):
    end = start + length
    expected = frames_bruteforce(start, end, fps, n=int(end * fps) + 3)
    if not expected:
        with pytest.raises(EmptySpan):
            seconds_to_span(start, end, fps)
    else:
        span = seconds_to_span(start, end, fps)
        assert list(range(span.start_frame, span.end_frame)) == expected


def _track(n=150, start=0):
    return FaceTrack("c", "t", "p", start, n)


def test_projection_example():
    (s,) = project_assoc([("u", "p", 0.7)], [Utterance("c", "u", 1.0, 2.0)], [_track()], 30.0)
    expected = np.zeros(150)
    expected[30:60] = 0.7
    np.testing.assert_array_equal(s.scores, expected)
    assert s.source == "assoc"


def test_overlap_takes_max():
    utts = [Utterance("c", "a", 1.0, 2.0), Utterance("c", "b", 1.5, 3.0)]
    (s,) = project_assoc([("a", "p", 0.4), ("b", "p", 0.9)], utts, [_track()], 30.0)
    assert np.all(s.scores[45:60] == 0.9)
    assert np.all(s.scores[30:45] == 0.4)


def test_no_utterances_gives_zero_stream():
    (s,) = project_assoc([], [], [_track()], 30.0)
    assert not s.scores.any() and len(s.scores) == 150


def test_projection_is_track_local():
    # track starts at frame 40: utterance frames [30, 60) land on local [0, 20)
    (s,) = project_assoc([("u", "p", 0.5)], [Utterance("c", "u", 1.0, 2.0)], [_track(50, 40)], 30.0)
    assert np.all(s.scores[:20] == 0.5) and not s.scores[20:].any()


def test_other_person_gets_nothing():
    tracks = [FaceTrack("c", "t0", "p0", 0, 90), FaceTrack("c", "t1", "p1", 0, 90)]
    out = project_assoc([("u", "p0", 0.8), ("u", "p1", 0.2)], [Utterance("c", "u", 0.0, 1.0)], tracks, 30.0)
    assert out[0].scores[:30].tolist() == [0.8] * 30
    assert out[1].scores[:30].tolist() == [0.2] * 30


def _random_case(rng, n_utt=6):
    utts, matches = [], []
    for i in range(n_utt):
        a = rng.uniform(0, 9)
        utts.append(Utterance("c", f"u{i}", a, a + rng.uniform(0.1, 2)))
        matches.append((f"u{i}", "p", float(rng.uniform())))
    return utts, matches


def test_uniformity_and_support(rng):
    fps = 30.0
    track = _track(330)
    for _ in range(30):
        utts, matches = _random_case(rng)
        (s,) = project_assoc(matches, utts, [track], fps)
        cover = np.zeros(330, int)
        for u in utts:
            span = utterance_to_span(u, fps)
            cover[span.start_frame:min(span.end_frame, 330)] += 1
        assert not s.scores[cover == 0].any()
        for u, (_, _, prob) in zip(utts, matches):
            span = utterance_to_span(u, fps)
            alone = np.zeros(330, bool)
            alone[span.start_frame:min(span.end_frame, 330)] = True
            alone &= cover == 1
            assert np.all(s.scores[alone] == prob)


def test_monotone_in_match_probability(rng):
    track = _track(330)
    for _ in range(30):
        utts, matches = _random_case(rng)
        (before,) = project_assoc(matches, utts, [track], 30.0)
        k = rng.integers(len(matches))
        uid, pid, prob = matches[k]
        raised = list(matches)
        raised[k] = (uid, pid, prob + (1 - prob) * rng.uniform())
        (after,) = project_assoc(raised, utts, [track], 30.0)
        assert np.all(after.scores >= before.scores)


def test_framespan_rejects_empty():
    with pytest.raises(EmptySpan):
        FrameSpan(5, 5)
