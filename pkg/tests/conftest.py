from __future__ import annotations

import pytest

from natfx.cfexpr import Scenario
from natfx.scm import DiscreteScm

import oracles


@pytest.fixture
def dm1() -> DiscreteScm:
    """Binary chain model with hand-checked decomposition values."""
    return DiscreteScm(
        Scenario.chain(2),
        pm1=oracles.DM1_PM1,
        pm2=oracles.DM1_PM2,
        ymean=oracles.DM1_YMEAN,
        treatment=1,
        reference=0,
    )


@pytest.fixture
def ds1() -> DiscreteScm:
    """Binary single-mediator model with hand-checked core decomposition."""
    return DiscreteScm(
        Scenario.single(),
        pm1=oracles.DS1_PM1,
        ymean=oracles.DS1_YMEAN,
        treatment=1,
        reference=0,
    )
