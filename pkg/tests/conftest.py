import numpy as np
import pytest

from rank_disparity.core import GroupedDistribution

POP1 = ([0.05, 0.15, 0.60, 0.20], [30.0, 20.0, 15.0, 5.0])
POP2 = ([0.05, 0.15, 0.60, 0.20], [30.0, 20.0, 5.0, 15.0])
POP3 = ([0.20, 0.20, 0.40, 0.20], [30.0, 20.0, 15.0, 5.0])


def make_dist(spec, units="percent"):
    shares, means = spec
    return GroupedDistribution.from_arrays(shares, means, units=units)


@pytest.fixture
def pop1():
    return make_dist(POP1)


@pytest.fixture
def pop2():
    return make_dist(POP2)


@pytest.fixture
def pop3():
    return make_dist(POP3)


def random_dist(rng, m=None, zero_free=True):
    m = int(rng.integers(2, 11)) if m is None else m
    shares = rng.dirichlet(np.ones(m)) + 1e-3
    means = rng.uniform(0.5, 40.0, size=m)
    if not zero_free and rng.random() < 0.2:
        means[rng.integers(m)] = 0.0
    return GroupedDistribution.from_arrays(shares, means)


# --------------------------------------------------------------------------
# Acceptance criteria report: one PASS/FAIL line per criterion
# --------------------------------------------------------------------------

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            number, title = mark.args
            _criteria.setdefault(number, {"title": title, "nodes": set(), "failed": False, "ran": False})
            _criteria[number]["nodes"].add(item.nodeid)


def pytest_runtest_logreport(report):
    for entry in _criteria.values():
        if report.nodeid in entry["nodes"]:
            entry["ran"] = entry["ran"] or report.when == "call"
            entry["failed"] = entry["failed"] or report.failed


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        status = "FAIL" if entry["failed"] else ("PASS" if entry["ran"] else "NOT RUN")
        terminalreporter.write_line(f"AC{number:<2} {status}  {entry['title']}")
