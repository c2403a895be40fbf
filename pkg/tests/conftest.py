import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("htica", deadline=None, max_examples=50,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("htica")


@pytest.fixture
def square_body_points():
    # body (1/N) sum [-x_i, x_i] of these four points is the square [-1/2, 1/2]^2
    return np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    # one line per acceptance criterion, recorded by tests/test_acceptance.py
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[number])
