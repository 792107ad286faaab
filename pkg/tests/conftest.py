import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from asdkit.simgen import SimConfig, generate_bundle, synth_sync_scores  # noqa: E402


@pytest.fixture(scope="session")
def small_cfg():
    return SimConfig(n_clips=4, duration_s=20.0, seed=3)


@pytest.fixture(scope="session")
def small_bundle(small_cfg):
    return generate_bundle(small_cfg)


@pytest.fixture(scope="session")
def small_sync(small_cfg, small_bundle):
    return synth_sync_scores(small_cfg, small_bundle)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def trained_head():
    """Head trained on an independent seed of the acceptance configuration."""
    from asdkit.fva import init_params, train_head
    from asdkit.pipeline import DESK_TRAIN
    from asdkit.simgen import acceptance_config

    cfg = acceptance_config()
    train = generate_bundle(cfg.replace(seed=cfg.seed + 1000))
    params, trace = train_head(init_params(cfg.d_speaker, cfg.d_face, rng=0), train, DESK_TRAIN)
    return params, trace


@pytest.fixture(scope="session")
def acceptance_bundle():
    from asdkit.simgen import acceptance_config

    return generate_bundle(acceptance_config())


_CRITERIA: dict = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when not in ("setup", "call"):
        return
    n = marker.args[0]
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    if rep.failed or rep.when == "call":
        _CRITERIA[n] = ("PASS" if rep.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        verdict, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {verdict}  {detail}".rstrip())
