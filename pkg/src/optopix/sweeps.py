#!/usr/bin/env python3

# filename: sweeps.py
# description: parameter sweeps over
# drive frequency, scan target, pulse
# length and bridge width, returned
# as polars tables

import logging

import numpy as np
import polars as pl

from optopix.config import PixelConfig
from optopix.drive import (
    frequency_sweep,
    minimum_pulse_duration,
    pulse_end_response)
from optopix.energy import stroke_metrics
from optopix.errors import ValidationError
from optopix.mechanics import simulate_response
from optopix.model import derive_network, measured_row
from optopix.thermal import DriveSignal

logger = logging.getLogger(__name__)

SWEEP_KINDS = ("frequency", "scanrate", "pulselength", "width")

# network overrides kept when the bridge width changes
AIR_OVERRIDES = ("r_air", "c_air", "r_air_wall", "wall_temperature")


def sweep_values(start, stop, num):
    """
    `num` evenly spaced values from `start`
    to `stop` inclusive; a single value when
    `num` is 1.
    """
    if int(num) != num or num < 1:
        raise ValidationError(
            "Sweep needs num >= 1, got {}".format(num))
    if not (np.isfinite(start) and np.isfinite(stop)):
        raise ValidationError(
            "Sweep range must be finite, got [{}, {}]".format(start, stop))
    if num > 1 and stop <= start:
        raise ValidationError(
            "Sweep range is empty: stop {} <= start {}".format(stop, start))
    return np.linspace(start, stop, int(num))


def frequency_table(network, context, power, frequencies,
                    duty=0.5, absorbed_fraction=None, workers=1):
    pairs = frequency_sweep(network, context, power, frequencies,
                            duty=duty,
                            absorbed_fraction=absorbed_fraction,
                            workers=workers)
    return pl.DataFrame({"f_Hz": [f for f, _ in pairs],
                         "delta_pp_m": [d for _, d in pairs]})


def scan_rate_table(network, context, power, targets,
                    absorbed_fraction=None):
    """
    Shortest pulse and display rate per
    target displacement.
    """
    durations = [minimum_pulse_duration(network, context, power, target,
                                        absorbed_fraction=absorbed_fraction)
                 for target in targets]
    return pl.DataFrame({
        "d_target_m": [float(d) for d in targets],
        "tp_s": durations,
        "N_px_per_s": [1 / t for t in durations],
    })


def pulse_length_table(network, context, power, pulse_durations,
                       absorbed_fraction):
    """
    End-of-pulse force, displacement and
    stroke efficiency per pulse duration.
    """
    rows = []
    for duration in pulse_durations:
        z, force = pulse_end_response(network, context,
                                      absorbed_fraction * power, duration)
        report = stroke_metrics(max(force, 0.0), max(z, 0.0), duration,
                                power, absorbed_fraction)
        rows.append({"tp_s": float(duration),
                     "F_N": force,
                     "z_m": z,
                     "eta_s": report.stroke_efficiency})
    return pl.DataFrame(rows)


def width_network(config: PixelConfig, width, measured=False):
    """
    Network of `config` with the bridge width
    replaced; measured absorber values are
    used when `measured` is set.
    """
    geometry = config.geometry.with_width(width)
    overrides = {key: value
                 for key, value in config.network_overrides.items()
                 if key in AIR_OVERRIDES}
    if measured:
        row = measured_row(width)
        overrides.update(r_abs=row.r_abs, c_abs=row.c_abs)
    network = derive_network(
        geometry, config.absorber, config.gas,
        eval_temperature=config.network_overrides.get("eval_temperature"))
    if overrides:
        network = network.with_overrides(**overrides)
    return network


def width_table(config: PixelConfig, widths, power, pulse_duration,
                measured=False, sample_period=1e-4, tail=None):
    """
    Resistance, time constant, peak absorber
    temperature and peak displacement of a
    single pulse per bridge width.

    `tail` is the simulated time after the
    pulse, default five air relaxation times.
    """
    context = config.mechanics_context()
    absorbed = config.absorbed_fraction * power
    rows = []
    for width in widths:
        network = width_network(config, width, measured)
        if tail is None:
            extra = 5 / network.air_relaxation_rate
        else:
            extra = tail
        drive = DriveSignal([(0.0, absorbed), (pulse_duration, 0.0)],
                            pulse_duration + extra)
        trace = simulate_response(network, context, drive,
                                  sample_period=sample_period)
        rows.append({"w_m": float(width),
                     "r_abs_K_per_W": network.r_abs,
                     "tau_s": network.tau_abs,
                     "inv_tau_per_s": 1 / network.tau_abs,
                     "peak_T_abs_K": float(np.max(
                         trace.absorber_temperature)),
                     "peak_z_m": float(np.max(trace.displacement))})
    return pl.DataFrame(rows)


def run_sweep(kind, config: PixelConfig, values, power,
              pulse_duration=50e-3, measured=False, workers=1):
    """
    Dispatch one of the sweep kinds
    (``frequency``, ``scanrate``,
    ``pulselength``, ``width``) over
    `values`.
    """
    if kind not in SWEEP_KINDS:
        raise ValidationError(
            "Sweep kind must be one of {}, got '{}'".format(
                SWEEP_KINDS, kind))
    values = np.asarray(values, dtype=float)
    if values.size == 0 or np.any(values <= 0):
        raise ValidationError(
            "Sweep values must be positive, got {}".format(
                values.tolist()))
    logger.info("running %s sweep over %d values", kind, values.size)
    if kind == "width":
        return width_table(config, values, power, pulse_duration,
                           measured=measured)
    network = config.network()
    context = config.mechanics_context()
    if kind == "frequency":
        return frequency_table(network, context, power, values,
                               absorbed_fraction=config.absorbed_fraction,
                               workers=workers)
    if kind == "scanrate":
        return scan_rate_table(network, context, power, values,
                               absorbed_fraction=config.absorbed_fraction)
    return pulse_length_table(network, context, power, values,
                              config.absorbed_fraction)
