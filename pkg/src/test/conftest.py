#!/usr/bin/env python3

import matplotlib
import pytest

from optopix.config import load_config
from optopix.model import measured_network

matplotlib.use("Agg")


@pytest.fixture
def paper_config():
    return load_config("paper_pixel_w020")


@pytest.fixture
def paper_network(paper_config):
    return paper_config.network()


@pytest.fixture
def paper_context(paper_config):
    return paper_config.mechanics_context()


@pytest.fixture
def wide_config():
    return load_config("paper_pixel_w040")


@pytest.fixture
def cyclic_network():
    """
    Pixel with R = 145 K/W and a 23 ms
    absorber time constant.
    """
    return measured_network(0.55e-3).with_overrides(c_abs=23e-3 / 145)


@pytest.fixture
def decoupled_network(paper_network):
    return paper_network.with_overrides(r_air=paper_network.r_abs * 1e4)
