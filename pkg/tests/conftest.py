import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from mejpa.config import load_config, reference_config_path
from mejpa.design import DesignConfig, PumpParams
from mejpa.network import EnvironmentModel
from mejpa.pump_gain import loaded_resonance

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

FIXTURES = Path(__file__).parent / "fixtures"

_ACCEPTANCE = []


def record_acceptance(line):
    _ACCEPTANCE.append(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def table1():
    """Reference design with the pump off."""
    return load_config(reference_config_path()).design


@pytest.fixture(scope="session")
def control(table1):
    """Same SQUID directly on the 50 ohm source, pumped at its own loaded resonance."""
    bare = DesignConfig(table1.squid, EnvironmentModel(50.0), table1.pump,
                        grid=table1.grid, constants=table1.constants)
    w_r, _ = loaded_resonance(bare)
    return bare.with_pump(PumpParams(w_r / np.pi))


@pytest.fixture
def fixtures_dir():
    return FIXTURES
