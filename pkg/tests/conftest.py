import numpy as np
import pytest


def random_directions(rng, n):
    d = rng.normal(size=(n, 3))
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def random_bloch(rng, n, radius=1.0):
    return random_directions(rng, n) * radius * rng.uniform(size=(n, 1)) ** (1 / 3)


def random_omegas(rng, n, lo=1e-3, hi=1e3):
    return np.exp(rng.uniform(np.log(lo), np.log(hi), size=n))


def perpendicular(rng, n):
    """A random unit vector orthogonal to n."""
    x = rng.normal(size=3)
    x -= (x @ n) * n
    return x / np.linalg.norm(x)


@pytest.fixture
def rng():
    return np.random.default_rng(20090730)


_CRITERIA = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _CRITERIA.append((report.nodeid.split("::")[-1], report.outcome))
    elif report.when == "setup" and report.outcome != "passed" and "test_acceptance.py" in report.nodeid:
        _CRITERIA.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _CRITERIA:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
