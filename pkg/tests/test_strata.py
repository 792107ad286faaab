import numpy as np
import pytest

from asdkit.align import project_assoc
from asdkit.datamodel import FaceTrack
from asdkit.exceptions import InvalidConfig, MissingQuality, TooFewTracks
from asdkit.fusion import fuse_streams
from asdkit.metrics import binary_ap, pool_detections
from asdkit.strata import evaluate_strata, masking_experiment, stratify_by_quality, summarize_masking, track_quality


def _tracks(qualities):
    return [FaceTrack("c", f"t{i}", f"p{i}", 0, 1, [q]) for i, q in enumerate(qualities)]


def test_track_quality():
    assert track_quality(FaceTrack("c", "t", "p", 0, 3, [0.2, 0.4, 0.6])) == pytest.approx(0.4)
    assert track_quality(FaceTrack("c", "t", "p", 0, 4, [0.3] * 4)) == pytest.approx(0.3)
    with pytest.raises(MissingQuality):
        track_quality(FaceTrack("c", "t", "p", 0, 3))


def test_track_quality_matches_sum_over_len(rng):
    for _ in range(50):
        q = rng.random(int(rng.integers(1, 300)))
        t = FaceTrack("c", "t", "p", 0, len(q), q)
        assert track_quality(t) == pytest.approx(sum(q.tolist()) / len(q), abs=1e-12)


@pytest.mark.parametrize("n, sizes", [(6, [2, 2, 2]), (7, [3, 2, 2]), (8, [3, 3, 2])])
def test_bin_sizes(n, sizes):
    strata = stratify_by_quality(_tracks(np.linspace(0, 1, n)), 3)
    assert [len(s.track_keys) for s in strata] == sizes


def test_bins_ordered_by_quality(rng):
    strata = stratify_by_quality(_tracks(rng.random(20)), 4)
    for lo, hi in zip(strata, strata[1:]):
        assert lo.quality_range[1] <= hi.quality_range[0]


def test_too_few_tracks():
    with pytest.raises(TooFewTracks):
        stratify_by_quality(_tracks([0.1, 0.2]), 3)
    with pytest.raises(InvalidConfig):
        stratify_by_quality(_tracks([0.1]), 0)


def test_partition_on_simulated_bundle(small_bundle):
    strata = stratify_by_quality(small_bundle.tracks, 3)
    keys = [k for s in strata for k in s.track_keys]
    assert len(keys) == len(set(keys))
    assert set(keys) == {t.key for t in small_bundle.tracks}
    sizes = [len(s.track_keys) for s in strata]
    assert max(sizes) - min(sizes) <= 1


def test_evaluate_strata_uses_members_only(small_bundle, small_sync):
    strata = evaluate_strata(stratify_by_quality(small_bundle.tracks, 2), {"sync": small_sync},
                             small_bundle.labels)
    for st in strata:
        chosen = [s for s in small_sync if s.key in st.track_keys]
        assert st.ap["sync"] == binary_ap(*pool_detections(chosen, small_bundle.labels))


def _oracle_matches(bundle):
    # speaker gets 0.8, everyone else shares the rest
    out = []
    for u in bundle.utterances:
        persons = sorted({t.person_id for t in bundle.tracks_of(u.clip_id)})
        for pid in persons:
            prob = 0.8 if pid == u.speaker_hint else 0.2 / max(1, len(persons) - 1)
            out.append((u.utt_id, pid, prob))
    return out


def test_masking_extremes(small_bundle, small_sync):
    b = small_bundle
    matches = _oracle_matches(b)
    trials = masking_experiment(b, small_sync, matches, [0.0, 1.0], 2, seed=4, alpha=0.5)
    fps = {c.clip_id: c.video_fps for c in b.clips}
    assoc = project_assoc(matches, b.utterances, b.tracks, fps)
    unmasked = {
        "sync": binary_ap(*pool_detections(small_sync, b.labels)),
        "fva": binary_ap(*pool_detections(assoc, b.labels)),
        "ensemble": binary_ap(*pool_detections(fuse_streams(small_sync, assoc, 0.5), b.labels)),
    }
    s, y = pool_detections(small_sync, b.labels)
    for tr in trials:
        if tr.p_mask == 0.0:
            assert tr.masked_utt_ids == ()
            assert tr.ap == unmasked
        else:
            assert len(tr.masked_utt_ids) == len(b.utterances)
            # all-zero association scores: AP falls to the prevalence floor
            assert tr.ap["fva"] == pytest.approx(y.mean())


def test_masks_are_nested(small_bundle, small_sync):
    trials = masking_experiment(small_bundle, small_sync, _oracle_matches(small_bundle),
                                [0.2, 0.5, 0.8], 3, seed=1)
    by_trial = {}
    for tr in trials:
        by_trial.setdefault(tr.trial_index, []).append(set(tr.masked_utt_ids))
    for sets in by_trial.values():
        assert sets[0] <= sets[1] <= sets[2]


def test_masking_is_deterministic_across_threads(small_bundle, small_sync):
    args = (small_bundle, small_sync, _oracle_matches(small_bundle), [0.0, 0.5, 1.0], 3, 9)
    one = masking_experiment(*args, threads=1)
    four = masking_experiment(*args, threads=4)
    assert one == four
    rows = summarize_masking(one)
    assert [(p, m) for p, m, _, _ in rows][:3] == [(0.0, "sync"), (0.0, "fva"), (0.0, "ensemble")]


def test_masking_rejects_bad_grid(small_bundle, small_sync):
    with pytest.raises(InvalidConfig):
        masking_experiment(small_bundle, small_sync, [], [1.5], 1, 0)
    with pytest.raises(InvalidConfig):
        masking_experiment(small_bundle, small_sync, [], [0.5], 0, 0)
