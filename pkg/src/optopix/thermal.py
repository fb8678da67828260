#!/usr/bin/env python3
# *_* coding: utf-8 *_*

"""
Lumped heat transfer for one pixel:
closed-form absorber response, fixed-step
RK4 integration of the coupled absorber/air
equations, and the air-temperature
convolution driven by an absorber trace.

States are integrated as rises above the
wall temperature; traces report absolute
temperatures.
"""

import logging
from collections import namedtuple

import numpy as np
from scipy.integrate import solve_ivp

from optopix.defaults import get_default
from optopix.errors import (
    InstabilityError,
    InsufficientDataError,
    ModeNotAdmissibleError,
    OutOfRangeError,
    ValidationError)
from optopix.model import ThermalNetwork, decoupling_ratio
from optopix.traces import TraceSeries, sample_times

logger = logging.getLogger(__name__)


class DriveSignal:
    """
    Piecewise-constant absorbed power

    Parameters
    ----------
    breakpoints : :py:class:`list`
        Sorted ``(start_time, power)`` pairs in
        s and W. Each power holds until the next
        breakpoint (or the end of the signal).
        Power is zero before the first breakpoint
        and after `duration`.
    duration : :py:class:`float`
        Total signal length in seconds; at
        least the last breakpoint time.
    """

    def __init__(self, breakpoints, duration):
        breakpoints = [(float(t), float(p)) for t, p in breakpoints]
        times = np.array([t for t, _ in breakpoints])
        powers = np.array([p for _, p in breakpoints])
        if times.size and np.any(np.diff(times) <= 0):
            raise ValidationError(
                "Drive breakpoints must be strictly "
                "increasing, got {}".format(times.tolist()))
        if times.size and times[0] < 0:
            raise ValidationError(
                "Drive breakpoints must start at "
                "t >= 0, got {}".format(times[0]))
        if np.any(~np.isfinite(powers)) or np.any(powers < 0):
            raise ValidationError(
                "Drive power must be finite and "
                "nonnegative, got {}".format(powers.tolist()))
        if times.size and duration < times[-1]:
            raise ValidationError(
                "Drive duration {} s precedes the last "
                "breakpoint {} s".format(duration, times[-1]))
        if not duration >= 0:
            raise ValidationError(
                "Drive duration must be nonnegative, "
                "got {}".format(duration))
        self.breakpoints = breakpoints
        self.times = times
        self.powers = powers
        self.duration = float(duration)

    @classmethod
    def constant(cls, power, duration):
        return cls([(0.0, power)], duration)

    @classmethod
    def zero(cls, duration):
        return cls([], duration)

    def power_at(self, t):
        """
        Absorbed power at time(s) `t`.
        """
        t = np.asarray(t, dtype=float)
        if self.times.size == 0:
            return np.zeros_like(t)[()]
        index = np.searchsorted(self.times, t, side="right") - 1
        power = np.where(index >= 0,
                         self.powers[np.clip(index, 0, None)],
                         0.0)
        power = np.where((t >= self.duration) | (t < 0), 0.0, power)
        return power[()]

    def segments(self, stop=None):
        """
        Constant-power pieces ``(start, end, power)``
        covering [0, stop], with zero-power pieces
        before the first breakpoint and after
        the signal duration.
        """
        if stop is None:
            stop = self.duration
        edges = [0.0, stop]
        edges += [t for t in self.times if 0 < t < stop]
        if 0 < self.duration < stop:
            edges.append(self.duration)
        edges = np.unique(edges)
        result = []
        for start, end in zip(edges[:-1], edges[1:]):
            power = float(self.power_at(0.5 * (start + end)))
            result.append((float(start), float(end), power))
        return result

    def energy(self, stop=None):
        """
        Absorbed energy over [0, stop], J.
        """
        return float(sum((end - start) * power
                         for start, end, power
                         in self.segments(stop)))

    def scaled(self, factor):
        return DriveSignal([(t, p * factor)
                            for t, p in self.breakpoints],
                           self.duration)

    def shifted(self, offset, duration=None):
        """
        Same signal delayed by `offset` seconds,
        e.g. to place it inside a longer schedule.
        """
        if duration is None:
            duration = self.duration + offset
        return DriveSignal([(t + offset, p)
                            for t, p in self.breakpoints],
                           duration)

    def __len__(self):
        return len(self.breakpoints)

    def __repr__(self):
        return "{} '{} breakpoints over {} s'".format(
            type(self).__name__,
            len(self),
            self.duration)


def _rise(network, temperature):
    if temperature is None:
        return 0.0
    return float(temperature) - network.wall_temperature


def absorber_temperature_closed_form(network: ThermalNetwork,
                                     drive: DriveSignal,
                                     t,
                                     initial_temperature=None,
                                     threshold=None):
    """
    Decoupled absorber temperature, chained
    across drive breakpoints.

    Within a segment of absorbed power P,
    the rise u above the wall evolves as
    u = P r_abs (1 - exp(-dt/tau_abs))
    + u_0 exp(-dt/tau_abs).

    Parameters
    ----------
    network : :class:`~optopix.model.ThermalNetwork`
        Must satisfy the decoupling threshold.
    drive : :class:`DriveSignal`
        Absorbed power.
    t : :py:class:`float` | array
        Evaluation time(s), s.
    initial_temperature : :py:class:`float`
        Absorber temperature at t = 0, K.
        Default the wall temperature.
    threshold : :py:class:`float`
        Decoupling ratio threshold. Default
        from :data:`~optopix.defaults.model_defaults`.

    Returns
    -------
    :py:class:`float` | :class:`numpy.ndarray`
        Absolute absorber temperature(s), K.
    """
    threshold = get_default("decoupling_threshold", threshold)
    ratio = decoupling_ratio(network)
    if ratio >= threshold:
        raise ModeNotAdmissibleError(
            "Closed-form absorber solution needs a "
            "decoupling ratio below {}, network has {:.4g}"
            "".format(threshold, ratio),
            ratio=ratio)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise OutOfRangeError(
            "Closed-form evaluation requires t >= 0, "
            "got min(t) = {}".format(t.min()))

    stop = max(float(np.max(t)) if t.size else 0.0,
               drive.duration)
    segments = drive.segments(stop) if stop > 0 else []
    tau = network.tau_abs
    starts = np.array([seg[0] for seg in segments] + [stop])
    powers = np.array([seg[2] for seg in segments] + [0.0])

    # rise at the start of each segment
    rises = np.empty(starts.size)
    rises[0] = _rise(network, initial_temperature)
    for i in range(1, starts.size):
        decay = np.exp(-(starts[i] - starts[i - 1]) / tau)
        rises[i] = (powers[i - 1] * network.r_abs * (1 - decay) +
                    rises[i - 1] * decay)

    index = np.clip(np.searchsorted(starts, t, side="right") - 1,
                    0, starts.size - 1)
    decay = np.exp(-(t - starts[index]) / tau)
    rise = (powers[index] * network.r_abs * (1 - decay) +
            rises[index] * decay)
    return (network.wall_temperature + rise)[()]


def _event_grid(samples, drive, duration):
    tol = 1e-12 * max(1.0, duration)
    inner = [t for t in list(drive.times) + [drive.duration]
             if tol < t < duration - tol]
    events = np.union1d(samples, inner)
    keep = np.concatenate([[True], np.diff(events) > tol])
    events = events[keep]
    sample_index = np.searchsorted(events, samples - tol, side="left")
    return events, sample_index


def simulate_coupled(network: ThermalNetwork,
                     drive: DriveSignal,
                     duration: float = None,
                     sample_period: float = 1e-4,
                     initial=None,
                     step_fraction=None):
    """
    Integrate the coupled absorber and
    air equations with fixed-step RK4.

    The internal step is at most
    ``min(sample_period, step_fraction * tau_min)``,
    with tau_min the fastest time constant of
    the network, and is shrunk so that every
    drive breakpoint and sample time falls on
    a step boundary.

    Parameters
    ----------
    network : :class:`~optopix.model.ThermalNetwork`
        Lumped parameters.
    drive : :class:`DriveSignal`
        Absorbed power.
    duration : :py:class:`float`
        Simulated time, s. Default the
        drive duration.
    sample_period : :py:class:`float`
        Output sampling interval, s.
    initial : :py:class:`tuple`
        Initial ``(T_abs, T_air)`` in K.
        Default thermal equilibrium at the
        wall temperature.
    step_fraction : :py:class:`float`
        Step cap as a fraction of tau_min.
        Default ``rk4_step_fraction``.

    Returns
    -------
    :class:`~optopix.traces.TraceSeries`
    """
    if duration is None:
        duration = drive.duration
    times = sample_times(duration, sample_period)
    step_fraction = get_default("rk4_step_fraction", step_fraction)
    max_step = min(sample_period,
                   step_fraction * network.fastest_time_constant())
    if initial is None:
        initial = (None, None)
    u = _rise(network, initial[0])
    y = _rise(network, initial[1])

    matrix = network.system_matrix()
    a11, a12 = float(matrix[0, 0]), float(matrix[0, 1])
    a21, a22 = float(matrix[1, 0]), float(matrix[1, 1])
    inverse_capacity = 1 / network.c_abs

    events, sample_index = _event_grid(times, drive, times[-1])
    midpoints = 0.5 * (events[:-1] + events[1:])
    powers = np.asarray(drive.power_at(midpoints), dtype=float)
    logger.debug("RK4 over %d events, max step %.3g s",
                 events.size, max_step)

    rise_abs = np.empty(events.size)
    rise_air = np.empty(events.size)
    rise_abs[0] = u
    rise_air[0] = y
    for i in range(events.size - 1):
        span = events[i + 1] - events[i]
        n_steps = max(1, int(np.ceil(span / max_step - 1e-9)))
        h = span / n_steps
        half = 0.5 * h
        sixth = h / 6.0
        q = float(powers[i]) * inverse_capacity
        for _ in range(n_steps):
            k1u = a11 * u + a12 * y + q
            k1y = a21 * u + a22 * y
            u2 = u + half * k1u
            y2 = y + half * k1y
            k2u = a11 * u2 + a12 * y2 + q
            k2y = a21 * u2 + a22 * y2
            u3 = u + half * k2u
            y3 = y + half * k2y
            k3u = a11 * u3 + a12 * y3 + q
            k3y = a21 * u3 + a22 * y3
            u4 = u + h * k3u
            y4 = y + h * k3y
            k4u = a11 * u4 + a12 * y4 + q
            k4y = a21 * u4 + a22 * y4
            u = u + sixth * (k1u + 2 * k2u + 2 * k3u + k4u)
            y = y + sixth * (k1y + 2 * k2y + 2 * k3y + k4y)
        if not (np.isfinite(u) and np.isfinite(y)):
            raise InstabilityError(
                "Non-finite state during integration "
                "at t = {} s".format(events[i + 1]),
                time=float(events[i + 1]))
        rise_abs[i + 1] = u
        rise_air[i + 1] = y

    wall = network.wall_temperature
    return TraceSeries.from_arrays(
        times,
        wall + rise_abs[sample_index],
        wall + rise_air[sample_index],
        sample_period=sample_period)


def simulate_reference(network: ThermalNetwork,
                       drive: DriveSignal,
                       duration: float = None,
                       sample_period: float = 1e-4,
                       initial=None,
                       rtol=1e-10,
                       atol=1e-9):
    """
    Adaptive-step reference solution of the
    coupled equations (scipy ``solve_ivp``,
    Radau), restarted at every drive
    breakpoint. Used to cross-check
    :func:`simulate_coupled`.
    """
    if duration is None:
        duration = drive.duration
    times = sample_times(duration, sample_period)
    if initial is None:
        initial = (None, None)
    state = np.array([_rise(network, initial[0]),
                      _rise(network, initial[1])])
    matrix = network.system_matrix()
    rises = np.empty((times.size, 2))
    rises[0] = state
    filled = np.zeros(times.size, dtype=bool)
    filled[0] = True
    for start, end, power in drive.segments(times[-1]):
        forcing = np.array([power / network.c_abs, 0.0])
        inside = (times > start) & (times <= end) & ~filled
        targets = times[inside]
        solution = solve_ivp(
            lambda _, x: matrix @ x + forcing,
            (start, end),
            state,
            method="Radau",
            t_eval=np.append(targets[targets < end], end),
            rtol=rtol,
            atol=atol)
        if not solution.success:
            raise InstabilityError(
                "Reference solver failed between {} s and "
                "{} s: {}".format(start, end, solution.message),
                time=start)
        rises[inside] = solution.y[:, :targets.size].T
        filled[inside] = True
        state = solution.y[:, -1]
    wall = network.wall_temperature
    return TraceSeries.from_arrays(times,
                                   wall + rises[:, 0],
                                   wall + rises[:, 1],
                                   sample_period=sample_period)


def air_temperature_convolution(network: ThermalNetwork,
                                absorber_trace: TraceSeries,
                                initial_air_temperature=None):
    """
    Air temperature driven by a given
    absorber temperature trace.

    Evaluates
    T_air(t) = T_wall + (1/tau_air) ∫ u(s) exp(-λ (t - s)) ds
    + y_0 exp(-λ t), with u the absorber rise
    above the wall and λ the air relaxation rate
    (2/tau_air for a symmetric network), by
    trapezoidal quadrature with a recursive
    exponential update.

    Parameters
    ----------
    network : :class:`~optopix.model.ThermalNetwork`
    absorber_trace : :class:`~optopix.traces.TraceSeries`
        Uniformly sampled absorber temperature.
    initial_air_temperature : :py:class:`float`
        T_air at the first sample, K. Default
        the wall temperature.

    Returns
    -------
    :class:`~optopix.traces.TraceSeries`
        The input trace with its air temperature
        column replaced.
    """
    if absorber_trace is None or len(absorber_trace) < 1:
        raise InsufficientDataError(
            "Air temperature convolution needs a "
            "non-empty absorber trace")
    time = absorber_trace.time
    h = absorber_trace.sample_period
    rise = absorber_trace.absorber_temperature - network.wall_temperature
    rate = network.air_relaxation_rate
    decay = np.exp(-rate * h)

    integral = np.zeros(time.size)
    for n in range(time.size - 1):
        integral[n + 1] = (integral[n] * decay +
                           0.5 * h * (rise[n] * decay + rise[n + 1]))
    y0 = _rise(network, initial_air_temperature)
    air = (network.wall_temperature +
           y0 * np.exp(-rate * (time - time[0])) +
           integral / network.tau_air)
    return absorber_trace.with_columns(**{"T_air_K": air})


EnergyBalance = namedtuple(
    "EnergyBalance",
    ["absorbed", "stored_absorber", "stored_air",
     "lost_to_wall", "residual", "relative_residual"])


def thermal_energy_balance(network: ThermalNetwork,
                           drive: DriveSignal,
                           trace: TraceSeries):
    """
    Energy bookkeeping over a simulated trace:
    absorbed = stored + lost, with losses through
    r_abs and r_air_wall integrated by the
    trapezoidal rule on the trace samples.
    """
    time = trace.time
    u = trace.absorber_temperature - network.wall_temperature
    y = trace.air_temperature - network.wall_temperature
    absorbed = (drive.energy(float(time[-1])) -
                drive.energy(float(time[0])))
    stored_absorber = network.c_abs * (u[-1] - u[0])
    stored_air = network.c_air * (y[-1] - y[0])
    loss_rate = u / network.r_abs + y / network.r_air_wall
    lost = float(np.sum(0.5 * (loss_rate[1:] + loss_rate[:-1]) *
                        np.diff(time)))
    residual = absorbed - stored_absorber - stored_air - lost
    scale = max(abs(absorbed), 1e-300)
    return EnergyBalance(absorbed=absorbed,
                         stored_absorber=float(stored_absorber),
                         stored_air=float(stored_air),
                         lost_to_wall=lost,
                         residual=float(residual),
                         relative_residual=float(residual / scale))
