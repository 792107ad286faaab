"""Independent brute-force references used by the tests."""
import numpy as np


def ap_bruteforce(scores, labels, interpolate):
    """O(n^2) AP: enumerate every distinct threshold and count directly."""
    s = np.asarray(scores, float)
    y = np.asarray(labels, bool)
    n_pos = int(y.sum())
    thresholds = sorted(set(s.tolist()), reverse=True)
    points = []
    for t in thresholds:
        tp = sum(1 for si, yi in zip(s, y) if si >= t and yi)
        fp = sum(1 for si, yi in zip(s, y) if si >= t and not yi)
        points.append((tp / n_pos, tp / (tp + fp)))
    total, prev_r = 0.0, 0.0
    for i, (r, p) in enumerate(points):
        if interpolate:
            p = max(pp for _, pp in points[i:])
        total += (r - prev_r) * p
        prev_r = r
    return total


def frames_bruteforce(start_s, end_s, fps, n=100000):
    """Frames whose midpoint lies in [start_s, end_s), by scanning."""
    return [f for f in range(n) if start_s <= (f + 0.5) / fps < end_s]
