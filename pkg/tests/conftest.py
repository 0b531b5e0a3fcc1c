import math

import pytest

from cavsqueeze.atomfield import PhysicalParams
from cavsqueeze.config import PRESETS, parse_config


@pytest.fixture(scope="session")
def preset_params() -> PhysicalParams:
    return parse_config(overrides={"experiment": "table1", "preset": "paper"}).params


@pytest.fixture(scope="session")
def slow_params() -> PhysicalParams:
    """Same couplings as the preset but a small cavity frequency, so bare-frame runs stay cheap."""
    base = PRESETS["paper"]
    p = PhysicalParams(
        omega=2 * math.pi * 1e5,
        lambda_g=base["lambda_g"],
        lambda_e=base["lambda_e"],
        Omega=base["Omega"],
        delta=base["delta"],
        Delta=0.0,
    )
    return p.with_resonant_drive()
