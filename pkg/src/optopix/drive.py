#!/usr/bin/env python3
# *_* coding: utf-8 *_*

"""
Pulse-train drives, cyclic photostimulation
and sequential-scan rates.

A cyclic displacement response z(t) is split
into a slowly varying component d(t), the
lower envelope built from per-period minima,
and an oscillating residual δ(t) = z(t) - d(t).
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from optopix.defaults import get_default
from optopix.errors import (
    InfeasibleError,
    InsufficientDataError,
    ValidationError)
from optopix.mechanics import (
    MechanicsContext,
    gauge_pressure,
    membrane_displacement,
    simulate_response)
from optopix.thermal import DriveSignal
from optopix.traces import DISPLACEMENT, TraceSeries

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PulseTrain:
    """
    Rectangular optical pulse train

    Parameters
    ----------
    pulse_power : :py:class:`float`
        Incident optical power P_L during
        a pulse, W.
    pulse_duration : :py:class:`float`
        t_p, s.
    gap_duration : :py:class:`float`
        t_g, s; zero gives continuous drive.
    pulse_count : :py:class:`int`
        Number of pulses, at least 1.
    absorbed_fraction : :py:class:`float`
        ε in (0, 1].
    """
    pulse_power: float
    pulse_duration: float
    gap_duration: float = 0.0
    pulse_count: int = 1
    absorbed_fraction: float = field(
        default_factory=lambda: get_default("absorbed_fraction"))

    def __post_init__(self):
        if not self.pulse_power >= 0:
            raise ValidationError(
                "Pulse power must be nonnegative, "
                "got {}".format(self.pulse_power))
        if not self.pulse_duration > 0:
            raise ValidationError(
                "Pulse duration must be positive, "
                "got {}".format(self.pulse_duration))
        if not self.gap_duration >= 0:
            raise ValidationError(
                "Gap duration must be nonnegative, "
                "got {}".format(self.gap_duration))
        if int(self.pulse_count) != self.pulse_count or (
                self.pulse_count < 1):
            raise ValidationError(
                "Pulse count must be an integer >= 1, "
                "got {}".format(self.pulse_count))
        if not 0 < self.absorbed_fraction <= 1:
            raise ValidationError(
                "Absorbed fraction must lie in (0, 1], "
                "got {}".format(self.absorbed_fraction))
        object.__setattr__(self, "pulse_count", int(self.pulse_count))

    @classmethod
    def from_frequency(cls,
                       pulse_power,
                       frequency,
                       duty_cycle=0.5,
                       pulse_count=1,
                       absorbed_fraction=None):
        if not frequency > 0:
            raise ValidationError(
                "Frequency must be positive, "
                "got {}".format(frequency))
        if not 0 < duty_cycle <= 1:
            raise ValidationError(
                "Duty cycle must lie in (0, 1], "
                "got {}".format(duty_cycle))
        period = 1 / frequency
        return cls(pulse_power=pulse_power,
                   pulse_duration=duty_cycle * period,
                   gap_duration=(1 - duty_cycle) * period,
                   pulse_count=pulse_count,
                   absorbed_fraction=get_default(
                       "absorbed_fraction", absorbed_fraction))

    @property
    def period(self):
        return self.pulse_duration + self.gap_duration

    @property
    def duty_cycle(self):
        return self.pulse_duration / self.period

    @property
    def frequency(self):
        return 1 / self.period

    @property
    def duration(self):
        return self.pulse_count * self.period

    @property
    def absorbed_power(self):
        return self.absorbed_fraction * self.pulse_power

    def with_count(self, pulse_count):
        return PulseTrain(pulse_power=self.pulse_power,
                          pulse_duration=self.pulse_duration,
                          gap_duration=self.gap_duration,
                          pulse_count=pulse_count,
                          absorbed_fraction=self.absorbed_fraction)

    def with_power(self, pulse_power):
        return PulseTrain(pulse_power=pulse_power,
                          pulse_duration=self.pulse_duration,
                          gap_duration=self.gap_duration,
                          pulse_count=self.pulse_count,
                          absorbed_fraction=self.absorbed_fraction)

    def pulse_intervals(self, start=0.0):
        """
        ``(on, off)`` times of every pulse,
        offset by `start`.
        """
        return [(start + k * self.period,
                 start + k * self.period + self.pulse_duration)
                for k in range(self.pulse_count)]

    def to_dict(self):
        return {"P_W": self.pulse_power,
                "tp_s": self.pulse_duration,
                "tg_s": self.gap_duration,
                "n": self.pulse_count,
                "eps": self.absorbed_fraction}

    @classmethod
    def from_dict(cls, data):
        known = {"P_W", "tp_s", "tg_s", "n", "eps"}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(
                "Unknown pulse train keys {}".format(sorted(unknown)))
        try:
            return cls(pulse_power=data["P_W"],
                       pulse_duration=data["tp_s"],
                       gap_duration=data.get("tg_s", 0.0),
                       pulse_count=data.get("n", 1),
                       absorbed_fraction=data.get(
                           "eps", get_default("absorbed_fraction")))
        except KeyError as err:
            raise ValidationError(
                "Pulse train is missing key {}".format(err)) from None


@dataclass(frozen=True)
class CyclicDecomposition:
    """
    Split of a cyclic displacement trace.
    Both components are traces whose
    ``z_m`` column holds d(t) and δ(t).
    """
    slow_component: TraceSeries
    oscillating_component: TraceSeries
    first_pulse_amplitude: float
    steady_peak_to_peak: float
    steady_slow_level: float


def render_pulse_train(train: PulseTrain):
    """
    Absorbed-power drive for a pulse train:
    ε P_L during each pulse and zero during
    gaps, lasting `pulse_count` periods.
    """
    breakpoints = []
    for on, off in train.pulse_intervals():
        breakpoints.append((on, train.absorbed_power))
        if train.gap_duration > 0:
            breakpoints.append((off, 0.0))
    return DriveSignal(breakpoints, train.duration)


def pulse_energy(train: PulseTrain):
    """
    Incident optical energy per pulse, J.
    """
    return train.pulse_power * train.pulse_duration


def train_energy(train: PulseTrain, absorbed=False):
    energy = train.pulse_count * pulse_energy(train)
    if absorbed:
        energy *= train.absorbed_fraction
    return energy


def average_absorbed_power(train: PulseTrain):
    return train.duty_cycle * train.absorbed_fraction * train.pulse_power


def simulate_cyclic(network,
                    context: MechanicsContext,
                    train: PulseTrain,
                    sample_period=1e-4,
                    duration=None):
    """
    Displacement response to a pulse train.

    Parameters
    ----------
    network : :class:`~optopix.model.ThermalNetwork`
    context : :class:`~optopix.mechanics.MechanicsContext`
    train : :class:`PulseTrain`
    sample_period : :py:class:`float`
        Output sampling interval, s.
    duration : :py:class:`float`
        Simulated time; default the train
        duration.

    Returns
    -------
    :class:`~optopix.traces.TraceSeries`
        Thermal and mechanical columns.
    """
    return simulate_response(network, context,
                             render_pulse_train(train),
                             duration=duration,
                             sample_period=sample_period)


def steady_window_start(duration, period, fraction=None):
    fraction = get_default("steady_fraction", fraction)
    return duration - max(fraction * duration, period)


def decompose_cyclic(trace: TraceSeries,
                     train: PulseTrain,
                     steady_fraction=None):
    """
    Decompose a cyclic displacement trace.

    The slow component interpolates the
    minimum of each drive period; the first
    pulse amplitude is the peak of the first
    period; the steady peak-to-peak ripple
    and slow level are taken over the final
    `steady_fraction` of the trace (at least
    one full period).

    Raises
    ------
    :class:`~optopix.errors.InsufficientDataError`
        If the trace covers fewer than three
        drive periods.
    """
    if not trace.has_column(DISPLACEMENT):
        raise ValidationError(
            "Cyclic decomposition needs a displacement "
            "column; run the mechanics chain first")
    period = train.period
    time = trace.time - trace.time[0]
    z = trace.displacement
    if trace.duration < 3 * period * (1 - 1e-9):
        raise InsufficientDataError(
            "Trace covers {:.4g} s, fewer than three "
            "periods of {:.4g} s".format(trace.duration, period),
            periods=trace.duration / period)

    cycle = np.floor(time / period * (1 + 1e-12)).astype(int)
    anchor_times = []
    anchor_values = []
    for k in np.unique(cycle):
        members = np.flatnonzero(cycle == k)
        lowest = members[np.argmin(z[members])]
        anchor_times.append(time[lowest])
        anchor_values.append(z[lowest])
    slow = np.interp(time, anchor_times, anchor_values)
    oscillating = z - slow

    first_pulse_amplitude = float(np.max(z[cycle == 0]))
    steady = time >= steady_window_start(
        trace.duration, period, steady_fraction) - 1e-12
    steady_peak_to_peak = float(np.ptp(oscillating[steady]))
    steady_slow_level = float(np.mean(slow[steady]))
    logger.debug("decomposition d1=%.4g m dpp=%.4g m d=%.4g m",
                 first_pulse_amplitude, steady_peak_to_peak,
                 steady_slow_level)
    return CyclicDecomposition(
        slow_component=trace.with_columns(**{DISPLACEMENT: slow}),
        oscillating_component=trace.with_columns(
            **{DISPLACEMENT: oscillating}),
        first_pulse_amplitude=first_pulse_amplitude,
        steady_peak_to_peak=steady_peak_to_peak,
        steady_slow_level=steady_slow_level)


def steady_state_ratios(tau, gap_duration):
    """
    Reference curves for the steady slow
    level and ripple, both relative to the
    first pulse amplitude:
    (τ / t_g, 1 - exp(-t_g / τ)).
    """
    if not (tau > 0 and gap_duration > 0):
        raise ValidationError(
            "tau and gap duration must be positive, "
            "got {} and {}".format(tau, gap_duration))
    return tau / gap_duration, 1 - np.exp(-gap_duration / tau)


def steady_pulse_count(network, period,
                       min_periods=None,
                       min_time_constants=None):
    """
    Pulses needed to cover at least
    max(min_periods periods, min_time_constants τ),
    with τ the slowest network time constant.
    """
    min_periods = get_default("steady_min_periods", min_periods)
    min_time_constants = get_default("steady_min_time_constants",
                                     min_time_constants)
    slowest = float(np.max(network.modal_time_constants()))
    span = max(min_periods * period, min_time_constants * slowest)
    return int(np.ceil(span / period - 1e-9))


def _ripple_at(network, context, power, frequency, duty,
               absorbed_fraction, sample_period):
    train = PulseTrain.from_frequency(power, frequency, duty,
                                      absorbed_fraction=absorbed_fraction)
    train = train.with_count(steady_pulse_count(network, train.period))
    if sample_period is None:
        sample_period = min(1e-4, train.period / 100)
    trace = simulate_cyclic(network, context, train,
                            sample_period=sample_period)
    return decompose_cyclic(trace, train).steady_peak_to_peak


def frequency_sweep(network,
                    context: MechanicsContext,
                    power,
                    frequencies,
                    duty=0.5,
                    absorbed_fraction=None,
                    sample_period=None,
                    workers=1):
    """
    Steady peak-to-peak displacement ripple
    at each drive frequency.

    Each run lasts at least 20 periods and
    10 slowest time constants. Results are
    independent of `workers`.

    Returns
    -------
    :py:class:`list`
        ``(frequency, delta_pp)`` pairs in
        input order.
    """
    frequencies = [float(f) for f in frequencies]
    if not frequencies or any(not f > 0 for f in frequencies):
        raise ValidationError(
            "Frequencies must be a non-empty list of "
            "positive values, got {}".format(frequencies))

    def run(frequency):
        return _ripple_at(network, context, power, frequency, duty,
                          absorbed_fraction, sample_period)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            ripples = list(pool.map(run, frequencies))
    else:
        ripples = [run(f) for f in frequencies]
    return list(zip(frequencies, ripples))


def steady_displacement(network, context: MechanicsContext,
                        absorbed_power):
    """
    Asymptotic displacement under constant
    absorbed power, m.
    """
    matrix = network.system_matrix()
    forcing = np.array([absorbed_power / network.c_abs, 0.0])
    rises = np.linalg.solve(matrix, -forcing)
    pressure = gauge_pressure(context.gas,
                              network.wall_temperature + rises[1])
    return float(membrane_displacement(context.membrane, pressure))


def pulse_end_response(network, context: MechanicsContext,
                       absorbed_power, pulse_duration):
    """
    Displacement and blocked force at the
    end of one pulse, starting from
    equilibrium.
    """
    drive = DriveSignal.constant(absorbed_power, pulse_duration)
    trace = simulate_response(network, context, drive,
                              duration=pulse_duration,
                              sample_period=pulse_duration)
    return float(trace.displacement[-1]), float(trace.force[-1])


def minimum_pulse_duration(network,
                           context: MechanicsContext,
                           power,
                           target_displacement,
                           absorbed_fraction=None,
                           resolution=None,
                           max_pulse=None):
    """
    Shortest single pulse whose end-of-pulse
    displacement reaches the target, found by
    bisection on the pulse duration.

    Parameters
    ----------
    power : :py:class:`float`
        Incident optical power, W.
    target_displacement : :py:class:`float`
        Required displacement, m.
    resolution : :py:class:`float`
        Bisection stops when the bracket is
        narrower than this, s.

    Returns
    -------
    :py:class:`float`
        Upper end of the final bracket, which
        reaches the target.

    Raises
    ------
    :class:`~optopix.errors.InfeasibleError`
        If the steady displacement does not
        exceed the target.
    """
    absorbed_fraction = get_default("absorbed_fraction", absorbed_fraction)
    resolution = get_default("scan_resolution", resolution)
    max_pulse = get_default("scan_max_pulse", max_pulse)
    if not target_displacement > 0:
        raise ValidationError(
            "Target displacement must be positive, "
            "got {}".format(target_displacement))
    absorbed = power * absorbed_fraction
    ceiling = steady_displacement(network, context, absorbed)
    if not ceiling > target_displacement:
        raise InfeasibleError(
            "Target displacement {:.4g} m is not reachable at "
            "{} W; asymptotic maximum is {:.4g} m".format(
                target_displacement, power, ceiling),
            max_displacement=ceiling)

    def reached(pulse_duration):
        z, _ = pulse_end_response(network, context, absorbed,
                                  pulse_duration)
        return z >= target_displacement

    low = 0.0
    high = min(network.tau_abs, max_pulse)
    while not reached(high):
        low = high
        high *= 2
        if high > max_pulse:
            raise InfeasibleError(
                "Target displacement {:.4g} m needs a pulse "
                "longer than {} s".format(target_displacement,
                                          max_pulse),
                max_displacement=ceiling)
    while high - low > resolution:
        middle = 0.5 * (low + high)
        if reached(middle):
            high = middle
        else:
            low = middle
    logger.debug("target %.4g m reached with t_p = %.6g s",
                 target_displacement, high)
    return high


def max_scan_rate(network,
                  context: MechanicsContext,
                  power,
                  target_displacement,
                  absorbed_fraction=None,
                  resolution=None):
    """
    Sequential-scan display rate N = 1/t_p
    in pixels per second, with t_p from
    :func:`minimum_pulse_duration`.
    """
    return 1 / minimum_pulse_duration(network, context, power,
                                      target_displacement,
                                      absorbed_fraction=absorbed_fraction,
                                      resolution=resolution)


def peak_force(network, context: MechanicsContext, train: PulseTrain,
               sample_period=1e-4):
    """
    Largest blocked force over a simulated
    train, N.
    """
    trace = simulate_cyclic(network, context, train,
                            sample_period=sample_period)
    return float(np.max(trace.force))

