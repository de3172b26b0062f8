import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from impulsegame import GameParameters  # noqa: E402

_CRITERIA = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(cid, text): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _CRITERIA.append((mark.args[0], mark.args[1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for cid, text, outcome in _CRITERIA:
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{status} criterion {cid}: {text}")


def make_params(**kw):
    base = dict(A=0.5, B=1.0, Q=1.0, w1=1.0, R1=-1.0, q1=1.25, s1=1.0, w2=1.0, P2=-1.0,
                C=-0.125, s2=0.0, T=1.0, x0=0.0)
    base.update(kw)
    return GameParameters(**base)


@pytest.fixture
def shared():
    """The one-impulse instance used across modules (q1 = 1.25 keeps the OLNE interior)."""
    return make_params()


@pytest.fixture
def fne_worked():
    return make_params(q1=1.0)


@pytest.fixture
def two_impulse():
    return make_params(A=0.0, s2=-0.55, T=2.0)


def random_params(rng, **fixed):
    vals = dict(
        A=float(rng.choice([0.0, rng.uniform(-1.5, 1.5)], p=[0.15, 0.85])),
        B=float(rng.choice([-1, 1]) * rng.uniform(0.3, 2.0)),
        Q=float(rng.choice([-1, 1]) * rng.uniform(0.3, 2.0)),
        w1=float(rng.uniform(-2, 2)), R1=float(-rng.uniform(0.3, 3.0)),
        q1=float(rng.uniform(-2, 2)), s1=float(rng.uniform(-2, 2)),
        w2=float(rng.uniform(-2, 2)), P2=float(-rng.uniform(0.3, 3.0)),
        C=float(-rng.uniform(0.01, 1.0)), s2=float(rng.uniform(-2, 2)),
        T=float(rng.uniform(0.5, 3.0)), x0=float(rng.uniform(-2, 2)))
    vals.update(fixed)
    return GameParameters(**vals)
