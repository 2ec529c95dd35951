import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from aifv import samples

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion covered by a test")


def pytest_runtest_logreport(report):
    mark = getattr(report, "criterion", None)
    if mark is not None and (report.when == "call" or report.failed):
        _criteria[mark] = (report.passed, report.duration)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        rep.criterion = (m.args[0], m.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for (n, title), (ok, dur) in sorted(_criteria.items()):
        tr.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}  ({dur:.2f}s)")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=sorted(samples.SAMPLES))
def sample_code(request):
    return samples.SAMPLES[request.param][0]()
