"""Shared fixtures."""

import logging

import numpy as np
import pytest

from src.fixtures import NOTCH_TRACE, fixture_path
from src.rf.network import Element, Netlist
from src.rf.touchstone import FrequencyResponse


@pytest.fixture(autouse=True)
def quiet_logs():
    """Keep library INFO chatter out of captured CLI output."""
    loggers = [
        logging.getLogger(name)
        for name in list(logging.root.manager.loggerDict)
        if name == "src" or name.startswith("src.")
    ]
    levels = [lg.level for lg in loggers]
    for lg in loggers:
        lg.setLevel(logging.ERROR)
    yield
    for lg, level in zip(loggers, levels):
        lg.setLevel(level)


@pytest.fixture
def notch_trace_path():
    return fixture_path(NOTCH_TRACE)


@pytest.fixture
def rlc_notch():
    """Shunt series RLC: 2 ohm, 1 nH, 1 pF, resonant at 5.0329 GHz."""
    return Netlist(
        elements=(Element("shunt", "RLC_S", r=2.0, l=1e-9, c=1e-12),),
        name="rlc-notch",
    )


@pytest.fixture
def small_response():
    freqs = np.array([1e9, 2e9, 3e9])
    s11 = np.array([0.1 + 0.2j, 0.3 - 0.1j, -0.2 + 0.05j])
    s21 = np.array([0.9 - 0.1j, 0.8 + 0.2j, 0.5 - 0.5j])
    return FrequencyResponse.from_channels(freqs, s11, s21, s21, s11)
