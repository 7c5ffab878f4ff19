import os

import pytest
from hypothesis import settings, strategies as st

from liarrep import ModelParams

# fixed example sequence so recorded runs are reproducible; HYPOTHESIS_PROFILE=explore re-randomizes
settings.register_profile("repo", derandomize=True, deadline=None)
settings.register_profile("explore", deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))

ACCEPTANCE_LINES = []


def set1(pbar=0.2, u=0.99, omega=1.0):
    """theta=0.8, d=0.4, u=0.99, omega=1 with a chosen lying probability."""
    return ModelParams.from_pbar(0.8, pbar, 0.4, omega, u)


@pytest.fixture
def params():
    return set1()


unit = st.floats(0.0, 1.0, allow_nan=False)
open_unit = st.floats(1e-3, 1.0 - 1e-3, allow_nan=False)


@st.composite
def model_params(draw, u=st.floats(0.5, 0.999), omega=st.floats(0.05, 5.0)):
    return ModelParams(draw(unit), draw(unit), draw(open_unit), draw(omega), draw(u))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
