import numpy as np
import pytest

from anpr.classify import KnnGlyphClassifier, RandomForestGlyphClassifier
from anpr.dataset import build_split, calibrate_thresholds, load_atlas


@pytest.fixture(scope="session")
def atlas():
    return load_atlas()


@pytest.fixture(scope="session")
def small_split(atlas):
    return build_split(atlas, (60, 20, 10), seed=7, specials=30)


@pytest.fixture(scope="session")
def small_forest(small_split):
    X, y = small_split.arrays("train")
    model = RandomForestGlyphClassifier(n_trees=40, seed=11).fit(X, y)
    Xv, yv = small_split.arrays("validation")
    th, _ = calibrate_thresholds(model, Xv, yv)
    return model.set_params(thresholds=th)


@pytest.fixture(scope="session")
def small_knn(small_split):
    X, y = small_split.arrays("train")
    model = KnnGlyphClassifier().fit(X, y)
    Xv, yv = small_split.arrays("validation")
    th, _ = calibrate_thresholds(model, Xv, yv)
    return model.set_params(thresholds=th)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


_ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture(scope="session")
def acceptance_log(request):
    """Criterion number -> (passed, summary line), shown after the run."""
    return request.config.stash.setdefault(_ACCEPTANCE, {})


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(_ACCEPTANCE, None)
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(log):
        passed, line = log[number]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number}. {line}")
