import pytest

from rwm_lab import verify_analytics
from rwm_lab.seeding import generator


@pytest.fixture(scope="session")
def verify_report_default():
    """The full analytic battery, run once per session (used by several modules)."""
    import time

    t0 = time.perf_counter()
    report = verify_analytics("default")
    report.elapsed_seconds = time.perf_counter() - t0
    return report


@pytest.fixture()
def rng(request):
    """A fresh deterministic generator, keyed by the test's node id."""
    return generator("tests", request.node.nodeid)
