import numpy as np
import pytest

_RESULTS_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_RESULTS_KEY] = []


@pytest.fixture
def criterion(request):
    """Record the outcome of an acceptance criterion for the terminal summary."""
    results = request.config.stash[_RESULTS_KEY]

    def record(number, title, passed, detail=""):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title}" + (f" ({detail})" if detail else "")
        results.append(line)
        print(line)
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_RESULTS_KEY, [])
    if results:
        terminalreporter.section("acceptance criteria")
        for line in sorted(results, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def row(*xs, width):
    """A 1-pixel-high mask with text at the given columns."""
    m = np.zeros((1, width), dtype=bool)
    m[0, list(xs)] = True
    return m


@pytest.fixture
def seven():
    """The 1x7 instance: ground truth {x0 easy, x6 hard}, prediction {x0, x1, x2, x5, x6}."""
    gt = np.zeros((1, 7), dtype=np.uint8)
    gt[0, 0] = 1
    gt[0, 6] = 2
    pred = row(0, 1, 2, 5, 6, width=7)
    return gt, pred
