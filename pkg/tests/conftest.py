import pytest

from cfcnopa import AnalysisPoint, LoopParams, NopaParams


@pytest.fixture
def fig2_nopa():
    return NopaParams(gamma1=0.1, gamma2=0.003, tau=6.7e-10, n_modes=4, beta=0.15)


@pytest.fixture
def fig2_at():
    return AnalysisPoint(1e6)


@pytest.fixture
def fig2_loop():
    return LoopParams(t=0.8, l=0.01)


_ACCEPTANCE: dict[str, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    label, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _ACCEPTANCE[label] = ("PASS" if report.passed else "FAIL", title)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_ACCEPTANCE, key=lambda s: (int(s.rstrip("ab")), s)):
        status, title = _ACCEPTANCE[label]
        terminalreporter.write_line(f"{status}  AC{label:<3} {title}")
