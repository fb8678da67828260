#!/usr/bin/env python3

# filename: patterns.py
# description: built-in perceptual
# stimulus patterns and pattern
# file documents

import json
import logging

import numpy as np

from optopix.defaults import get_default
from optopix.display import DisplayLayout, PatternEvent, TactilePattern
from optopix.drive import PulseTrain
from optopix.errors import ValidationError

logger = logging.getLogger(__name__)

DEFAULT_POWER = 2.5  # W, incident

# ring arc travelled per pixel, m
RING_STEP = 3.2e-3
ROTATION_SPEEDS = (16e-3, 32e-3, 64e-3)  # m/s

MAGNITUDE_POWERS = tuple(np.round(np.linspace(0.5, 2.5, 9), 6))

TEMPORAL_RATES = {
    "slow": (35e-3, 35e-3),
    "fast": (10e-3, 10e-3),
}


def default_layout():
    """
    Generic rectangular grid large enough
    for every built-in pattern.
    """
    return DisplayLayout.rectangular(7, 11, 4.0e-3)


def pulses_in_dwell(dwell, pulse_duration, gap_duration):
    """
    Largest pulse count whose last pulse
    ends inside the dwell window.
    """
    if dwell < pulse_duration - 1e-12:
        raise ValidationError(
            "Dwell {} s is shorter than one pulse of "
            "{} s".format(dwell, pulse_duration))
    period = pulse_duration + gap_duration
    return int(np.floor((dwell - pulse_duration) / period + 1e-9)) + 1


def _dwell_train(power, dwell, pulse_duration, gap_duration,
                 absorbed_fraction=None):
    return PulseTrain(
        pulse_power=power,
        pulse_duration=pulse_duration,
        gap_duration=gap_duration,
        pulse_count=pulses_in_dwell(dwell, pulse_duration, gap_duration),
        absorbed_fraction=get_default("absorbed_fraction",
                                      absorbed_fraction))


def _require_footprint(layout, cells, name):
    indices = []
    for row, col in cells:
        if not (0 <= row < layout.rows and 0 <= col < layout.cols):
            raise ValidationError(
                "Pattern '{}' does not fit {}: cell ({}, {}) "
                "is outside the grid".format(name, layout, row, col))
        index = layout.pixel_index(row, col)
        if not layout.is_active(index):
            raise ValidationError(
                "Pattern '{}' needs cell ({}, {}), which is "
                "inactive in {}".format(name, row, col, layout))
        indices.append(index)
    return indices


def _sequence(pixels, trains, dwell, start=0.0):
    events = []
    for k, (pixel, train) in enumerate(zip(pixels, trains)):
        events.append(PatternEvent(pixel, start + k * dwell, train))
    return events


def linear_motion(layout, direction="right", power=DEFAULT_POWER,
                  dwell=0.3, pause=0.5, absorbed_fraction=None):
    """
    Three pixels through the center excited
    in turn along `direction`, 300 ms each
    (20 ms pulses, 60 ms gaps); the sweep
    repeats after a 500 ms pause.
    """
    row, col = layout.center()
    steps = {"right": (0, 1), "left": (0, -1),
             "down": (1, 0), "up": (-1, 0)}
    if direction not in steps:
        raise ValidationError(
            "Linear motion direction must be one of {}, "
            "got '{}'".format(sorted(steps), direction))
    d_row, d_col = steps[direction]
    cells = [(row + k * d_row, col + k * d_col) for k in (-1, 0, 1)]
    pixels = _require_footprint(layout, cells, "linear_motion")
    train = _dwell_train(power, dwell, 20e-3, 60e-3, absorbed_fraction)
    sweep = TactilePattern(_sequence(pixels, [train] * 3, dwell),
                           total_duration=3 * dwell)
    pattern = sweep + TactilePattern(total_duration=pause) + sweep
    pattern.name = "linear_motion({})".format(direction)
    return pattern


def ring_cells(layout, direction="clockwise"):
    """
    The eight neighbours of the center pixel,
    starting bottom-left. Rows grow downward,
    so clockwise first climbs the left side.
    """
    row, col = layout.center()
    clockwise = [(row + 1, col - 1), (row, col - 1), (row - 1, col - 1),
                 (row - 1, col), (row - 1, col + 1), (row, col + 1),
                 (row + 1, col + 1), (row + 1, col)]
    if direction == "clockwise":
        return clockwise
    if direction == "counterclockwise":
        return [clockwise[0]] + clockwise[:0:-1]
    raise ValidationError(
        "Rotation direction must be 'clockwise' or "
        "'counterclockwise', got '{}'".format(direction))


def rotation(layout, direction="clockwise", speed=32e-3,
             power=DEFAULT_POWER, absorbed_fraction=None):
    """
    Sequential activation of the eight pixels
    around the center; each dwells
    RING_STEP / speed (200, 100 or 50 ms at
    16, 32 or 64 mm/s) with 25 ms pulses and
    71 ms gaps.
    """
    if not speed > 0:
        raise ValidationError(
            "Rotation speed must be positive, got {}".format(speed))
    pixels = _require_footprint(layout, ring_cells(layout, direction),
                                "rotation")
    dwell = RING_STEP / speed
    train = _dwell_train(power, dwell, 25e-3, 71e-3, absorbed_fraction)
    return TactilePattern(_sequence(pixels, [train] * 8, dwell),
                          total_duration=8 * dwell,
                          name="rotation({}, {} m/s)".format(direction,
                                                             speed))


def localization(layout, target=4, power=DEFAULT_POWER,
                 duration=0.5, pause=0.75, absorbed_fraction=None):
    """
    Reference stimulus on the center pixel,
    a 750 ms pause, then the same stimulus on
    one of the nine pixels of the central
    3 x 3 block (row-major, 4 is the center).
    """
    if int(target) != target or not 0 <= target <= 8:
        raise ValidationError(
            "Localization target must be in 0..8, "
            "got {}".format(target))
    row, col = layout.center()
    t_row, t_col = divmod(int(target), 3)
    block = [(row + r - 1, col + c - 1) for r in range(3) for c in range(3)]
    _require_footprint(layout, block, "localization")
    reference, goal = _require_footprint(
        layout, [(row, col), (row + t_row - 1, col + t_col - 1)],
        "localization")
    train = _dwell_train(power, duration, 25e-3, 25e-3, absorbed_fraction)
    events = [PatternEvent(reference, 0.0, train),
              PatternEvent(goal, duration + pause, train)]
    return TactilePattern(events,
                          total_duration=2 * duration + pause,
                          name="localization({})".format(target))


def magnitude(layout, power=DEFAULT_POWER, duration=1.0,
              absorbed_fraction=None):
    """
    One second of 25 ms pulses and gaps on
    the center pixel at one of nine powers
    between 0.5 and 2.5 W.
    """
    if not 0.5 - 1e-9 <= power <= 2.5 + 1e-9:
        raise ValidationError(
            "Magnitude power must lie in [0.5, 2.5] W, "
            "got {}".format(power))
    (pixel,) = _require_footprint(layout, [layout.center()], "magnitude")
    train = _dwell_train(power, duration, 25e-3, 25e-3, absorbed_fraction)
    return TactilePattern([PatternEvent(pixel, 0.0, train)],
                          total_duration=duration,
                          name="magnitude({} W)".format(power))


def temporal(layout, rate="slow", power=DEFAULT_POWER, duration=0.4,
             oddball=None, pause=0.5, absorbed_fraction=None):
    """
    400 ms of slow (35/35 ms) or fast
    (10/10 ms) pulses on the center pixel.

    With `oddball` in 0..2 a three-interval
    sequence is produced instead, separated
    by `pause`, where interval `oddball` uses
    the other rate.
    """
    if rate not in TEMPORAL_RATES:
        raise ValidationError(
            "Temporal rate must be one of {}, got '{}'".format(
                sorted(TEMPORAL_RATES), rate))
    (pixel,) = _require_footprint(layout, [layout.center()], "temporal")

    def interval(which):
        pulse, gap = TEMPORAL_RATES[which]
        train = _dwell_train(power, duration, pulse, gap,
                             absorbed_fraction)
        return TactilePattern([PatternEvent(pixel, 0.0, train)],
                              total_duration=duration)

    if oddball is None:
        pattern = interval(rate)
        pattern.name = "temporal({})".format(rate)
        return pattern
    if oddball not in (0, 1, 2):
        raise ValidationError(
            "Oddball position must be 0, 1 or 2, "
            "got {}".format(oddball))
    other = "fast" if rate == "slow" else "slow"
    pieces = [interval(other if k == oddball else rate) for k in range(3)]
    gap = TactilePattern(total_duration=pause)
    pattern = pieces[0] + gap + pieces[1] + gap + pieces[2]
    pattern.name = "temporal({}, oddball {})".format(rate, oddball)
    return pattern


def multipoint_squares(layout):
    """
    Four 2 x 2 squares along the center row,
    one column apart; each square lists its
    pixels clockwise from the top left.
    """
    row, col = layout.center()
    first_col = col - 5
    squares = []
    for k in range(4):
        left = first_col + 3 * k
        cells = [(row - 1, left), (row - 1, left + 1),
                 (row, left + 1), (row, left)]
        squares.append(_require_footprint(layout, cells, "multipoint"))
    return squares


def multipoint(layout, digit_pair="13", power=DEFAULT_POWER,
               pulse_duration=15e-3, repetitions=5, dead_time=None,
               absorbed_fraction=None):
    """
    Two of the four squares (digits 1-4)
    traced together: single 15 ms pulses
    alternate between the squares pixel by
    pixel, one beam slot (pulse plus dead
    time) apart, and the sequence repeats
    five times.
    """
    dead_time = get_default("dead_time", dead_time)
    digits = [int(d) for d in str(digit_pair)]
    if len(digits) != 2 or digits[0] == digits[1] or not all(
            1 <= d <= 4 for d in digits):
        raise ValidationError(
            "Digit pair must name two distinct squares 1-4, "
            "got '{}'".format(digit_pair))
    squares = multipoint_squares(layout)
    first, second = squares[digits[0] - 1], squares[digits[1] - 1]
    order = [pixel for pair in zip(first, second) for pixel in pair]
    train = PulseTrain(power, pulse_duration,
                       absorbed_fraction=get_default("absorbed_fraction",
                                                     absorbed_fraction))
    slot = pulse_duration + dead_time
    events = [PatternEvent(pixel, (rep * len(order) + k) * slot, train)
              for rep in range(repetitions)
              for k, pixel in enumerate(order)]
    return TactilePattern(events,
                          name="multipoint({})".format(digit_pair))


BUILTIN_PATTERNS = {
    "linear_motion": linear_motion,
    "rotation": rotation,
    "localization": localization,
    "magnitude": magnitude,
    "temporal": temporal,
    "multipoint": multipoint,
}


def builtin_pattern(name, layout=None, **params):
    """
    One of the built-in perceptual stimuli.

    Parameters
    ----------
    name : :py:class:`str`
        ``linear_motion``, ``rotation``,
        ``localization``, ``magnitude``,
        ``temporal`` or ``multipoint``.
    layout : :class:`~optopix.display.DisplayLayout`
        Target display; default
        :func:`default_layout`.
    **params
        Stimulus parameters, e.g. ``direction``,
        ``speed``, ``target``, ``power``,
        ``rate`` or ``digit_pair``.

    Returns
    -------
    :class:`~optopix.display.TactilePattern`
    """
    if layout is None:
        layout = default_layout()
    try:
        factory = BUILTIN_PATTERNS[name]
    except KeyError:
        raise ValidationError(
            "Unknown built-in pattern '{}'. Available: {}".format(
                name, sorted(BUILTIN_PATTERNS))) from None
    try:
        return factory(layout, **params)
    except TypeError as err:
        raise ValidationError(
            "Bad parameters for pattern '{}': {}".format(
                name, err)) from None


def pattern_document(layout, pattern):
    document = {"layout": layout.to_dict()}
    document.update(pattern.to_dict())
    return document


def read_pattern_document(document, name=""):
    """
    Layout and pattern from a pattern file
    document, expanding a ``builtin`` entry
    when present.
    """
    unknown = set(document) - {"layout", "events",
                               "total_duration_s", "builtin"}
    if unknown:
        raise ValidationError(
            "Unknown pattern file keys {}".format(sorted(unknown)))
    if "layout" in document:
        layout = DisplayLayout.from_dict(document["layout"])
    else:
        layout = default_layout()
    if "builtin" in document:
        if "events" in document:
            raise ValidationError(
                "Pattern file may hold 'events' or 'builtin', "
                "not both")
        params = dict(document["builtin"])
        builtin_name = params.pop("name", None)
        if builtin_name is None:
            raise ValidationError(
                "Built-in pattern entry needs a 'name'")
        pattern = builtin_pattern(builtin_name, layout, **params)
    else:
        pattern = TactilePattern.from_dict(document, name=name)
    pattern.validate_for(layout)
    return layout, pattern


def load_pattern_file(path):
    try:
        with open(path, encoding="utf-8") as handle:
            document = json.load(handle)
    except (OSError, json.JSONDecodeError) as err:
        raise ValidationError(
            "Could not read pattern file {}: {}".format(path, err)) from err
    if not isinstance(document, dict):
        raise ValidationError(
            "Pattern file {} must hold a JSON object".format(path))
    return read_pattern_document(document, name=str(path))
