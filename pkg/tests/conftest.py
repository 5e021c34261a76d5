import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from crseq.construct import synthesize
from crseq.scenario import resolve_mask
from crseq.seeds import builtin_zcz, zc_waveforms

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(criterion: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[criterion] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def mask2():
    return resolve_mask("example2")


@pytest.fixture(scope="session")
def qset2(mask2):
    return synthesize(builtin_zcz("example2"), zc_waveforms(mask2, [3, 5, 7, 9]))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
