import sys

import pytest

from kerrcat.model import Logistic, ModelParams, table_params
from kerrcat.skeleton import HomoclinicOrbit


@pytest.fixture
def ramp() -> ModelParams:
    return table_params()


@pytest.fixture
def orbit() -> HomoclinicOrbit:
    return HomoclinicOrbit(1.5, 1.0)


def ramp_with(gamma=1.5, p_max=2.5, t_c=5.0, kappa=1.0, K=1.0) -> ModelParams:
    return ModelParams(kappa, K, 0.0, Logistic(p_max, gamma, t_c))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        passed, detail = results[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if passed else 'FAIL'} {detail}")
