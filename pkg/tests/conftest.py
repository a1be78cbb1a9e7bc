import numpy as np
import pytest

from quadpattern import synthetic

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion reported at exit")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    name = marker.args[0]
    status = "PASS" if report.passed else "FAIL"
    if report.passed and any(k == "status" and v == "warn" for k, v in item.user_properties):
        status = "WARN"
    details = [v for k, v in item.user_properties if k == "detail"]
    prev = _CRITERIA.get(name)
    if prev is None or prev[0] == "PASS":
        _CRITERIA[name] = (status, "; ".join(details))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, (status, detail) in _CRITERIA.items():
        line = f"{status:4}  {name}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def face_images():
    return synthetic.face_like_set(20, seed=0)
