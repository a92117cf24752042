import math
import random

import pytest

from podbounds.verify import random_values
from podbounds.weights import Explicit, ExplicitOrder, FactorialPower, PODSpec

# filled by test_acceptance; printed once at the end of the session
ACCEPTANCE: dict[int, str] = {}


def random_gamma(rng: random.Random, d: int):
    """Order profile: factorial powers or an explicit list covering orders 0..d."""
    if rng.random() < 0.5:
        return FactorialPower(rng.choice([0.0, 0.5, 1.0, 1.5, 2.0]))
    return ExplicitOrder(tuple(math.exp(rng.gauss(0.0, 2.0)) for _ in range(d + 1)))


def random_pod(rng: random.Random, d_max: int = 12) -> tuple[PODSpec, list[float]]:
    d = rng.randint(1, d_max)
    vals = random_values(rng, d)
    return PODSpec(random_gamma(rng, d), Explicit(vals)), vals


def gamma_fn(gamma):
    return lambda k: math.exp(gamma.log_value(k))


@pytest.fixture
def rng():
    return random.Random(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
