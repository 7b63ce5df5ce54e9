import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

ACCEPTANCE = {}


def record(criterion, description, passed):
    """Remember an acceptance criterion outcome for the terminal summary."""
    ACCEPTANCE[criterion] = (description, bool(passed))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        desc, ok = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key}: {desc}")


@pytest.fixture
def rng():
    import numpy as np
    return np.random.default_rng(20240611)
