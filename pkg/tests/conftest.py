import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(autouse=True)
def _strict_numpy():
    with np.errstate(over="raise", invalid="raise", divide="raise"):
        yield


@pytest.fixture
def no_truncation_warning():
    from kerr_bsv.fock import TruncationWarning

    with warnings.catch_warnings():
        warnings.simplefilter("error", TruncationWarning)
        yield


#: criterion number -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    def record(number: int, passed: bool, detail: str):
        ACCEPTANCE[number] = (bool(passed), detail)
        print(f"CRITERION {number}: {'PASS' if passed else 'FAIL'}  {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"CRITERION {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
