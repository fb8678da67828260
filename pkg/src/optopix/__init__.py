# *_* coding: utf-8 *_*

"""
Simulation, fitting and scheduling
for optotactile pixel displays.
"""

__version__ = "0.0.1"

from optopix.config import PixelConfig, load_config
from optopix.display import (
    DisplayLayout,
    TactilePattern,
    compile_pattern,
    simulate_display)
from optopix.drive import PulseTrain, simulate_cyclic
from optopix.mechanics import MechanicsContext, simulate_response
from optopix.model import ThermalNetwork, derive_network, measured_network
from optopix.thermal import DriveSignal, simulate_coupled
from optopix.traces import TraceSeries
