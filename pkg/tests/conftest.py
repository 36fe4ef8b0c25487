import os
import sys
import uuid

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

from oirbench.airspace import CreateOirRequest, GeoPoint, Volume4D  # noqa: E402

ORIGIN = GeoPoint(-23.2237, -45.9009)


def make_volume(t0=0, t1=60_000, center=ORIGIN, radius=500.0, lo=0.0, hi=120.0):
    return Volume4D(center, radius, lo, hi, t0, t1)


def make_request(t0=0, t1=60_000, oir_id=None, **kw):
    oir_id = oir_id or str(uuid.uuid4())
    return CreateOirRequest(oir_id, "uss-test", make_volume(t0, t1, **kw), 0)


@pytest.fixture
def req_factory():
    return make_request


# acceptance criteria record one line each; printed in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
