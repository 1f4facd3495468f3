import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from laststop.model import ModelParams  # noqa: E402
from laststop.strategy import build_profile  # noqa: E402
from laststop.valuefn import solve_value  # noqa: E402

settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
    derandomize=True,
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def params_52():
    return ModelParams(theta=2.0, nu=5.0, q=0.9)


@pytest.fixture(scope="session")
def profile_52(params_52):
    return build_profile(params_52, 200)


@pytest.fixture(scope="session")
def grid_52(params_52):
    return solve_value(params_52)


@pytest.fixture(scope="session")
def grid_33():
    return solve_value(ModelParams(theta=3.0, nu=3.0, q=0.9))


@pytest.fixture(scope="session")
def grid_1_15():
    return solve_value(ModelParams(theta=1.5, nu=1.0, q=0.9))


def pytest_terminal_summary(terminalreporter):
    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
