import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ftbalance.harness import catalog

settings.register_profile(
    "ftbalance", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("ftbalance")


@pytest.fixture(scope="session")
def burgers():
    return catalog.burgers()


@pytest.fixture(scope="session")
def tri():
    return catalog.triangular_counterexample()


@pytest.fixture(scope="session")
def psys():
    return catalog.elasticity_damped(a=0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per acceptance criterion."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def report(num, ok, detail):
        line = f"ACCEPTANCE {num:>2} {'PASS' if ok else 'FAIL'}: {detail}"
        lines.append(line)
        print(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
