#!/usr/bin/env python3
# *_* coding: utf-8 *_*

"""
Display layouts, tactile patterns and their
compilation into single-beam scan schedules,
plus array-level simulation of the
displacement field.

Pixels are indexed row-major over the full
rows x cols grid; only active cells may
carry events.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import polars as pl

from optopix.defaults import get_default
from optopix.drive import PulseTrain
from optopix.errors import ScheduleConflictError, ValidationError
from optopix.mechanics import (
    MechanicsContext,
    blocked_force,
    gauge_pressure,
    membrane_displacement,
    simulate_response)
from optopix.thermal import DriveSignal

logger = logging.getLogger(__name__)

# merge tolerance for interval boundaries, s
TIME_TOLERANCE = 1e-12


class DisplayLayout():
    """
    Grid of optotactile pixels

    Parameters
    ----------
    rows : :py:class:`int`
        Grid rows.
    cols : :py:class:`int`
        Grid columns.
    pitch : :py:class:`float`
        Center-to-center spacing, m.
    active_mask : array
        Boolean rows x cols array of populated
        cells. Default all active.
    pixel_config : :py:class:`str`
        Name or path of the pixel configuration
        shared by all cells, if any.
    cavity_radius : :py:class:`float`
        Pixel cavity radius, m; the pitch must
        exceed its double.
    """

    def __init__(self,
                 rows: int,
                 cols: int,
                 pitch: float = 4.0e-3,
                 active_mask=None,
                 pixel_config: str = None,
                 cavity_radius: float = 1.5e-3):
        if int(rows) != rows or int(cols) != cols or rows * cols < 1:
            raise ValidationError(
                "Layout needs integer rows and cols with "
                "rows * cols >= 1, got {} x {}".format(rows, cols))
        if not pitch > 2 * cavity_radius:
            raise ValidationError(
                "Pitch {} m must exceed the cavity diameter "
                "{} m".format(pitch, 2 * cavity_radius))
        self.rows = int(rows)
        self.cols = int(cols)
        self.pitch = float(pitch)
        self.cavity_radius = float(cavity_radius)
        self.pixel_config = pixel_config
        if active_mask is None:
            active_mask = np.ones((self.rows, self.cols), dtype=bool)
        active_mask = np.asarray(active_mask, dtype=bool)
        if active_mask.shape != (self.rows, self.cols):
            raise ValidationError(
                "Active mask shape {} does not match the "
                "{} x {} grid".format(active_mask.shape,
                                      self.rows, self.cols))
        self.active_mask = active_mask

    @classmethod
    def rectangular(cls, rows, cols, pitch=4.0e-3, **kwargs):
        return cls(rows, cols, pitch, **kwargs)

    @classmethod
    def perceptual_437(cls, **kwargs):
        """
        21 x 21 grid at 3.6 mm pitch with
        the four corners unpopulated.
        """
        mask = np.ones((21, 21), dtype=bool)
        for row, col in [(0, 0), (0, 20), (20, 0), (20, 20)]:
            mask[row, col] = False
        return cls(21, 21, 3.6e-3, active_mask=mask, **kwargs)

    @property
    def size(self):
        return self.rows * self.cols

    @property
    def n_active(self):
        return int(self.active_mask.sum())

    def active_indices(self):
        return np.flatnonzero(self.active_mask.ravel())

    def pixel_index(self, row, col):
        if not (0 <= row < self.rows and 0 <= col < self.cols):
            raise ValidationError(
                "Cell ({}, {}) lies outside the {} x {} "
                "grid".format(row, col, self.rows, self.cols))
        return int(row * self.cols + col)

    def position(self, pixel):
        return divmod(int(pixel), self.cols)

    def coordinates(self, pixel):
        """
        Pixel center (x, y) in m, origin at
        cell (0, 0), y increasing with row.
        """
        row, col = self.position(pixel)
        return col * self.pitch, row * self.pitch

    def is_active(self, pixel):
        return (0 <= pixel < self.size and
                bool(self.active_mask.ravel()[int(pixel)]))

    def center(self):
        return self.rows // 2, self.cols // 2

    def to_dict(self):
        result = {"rows": self.rows,
                  "cols": self.cols,
                  "pitch_m": self.pitch}
        if not self.active_mask.all():
            result["mask"] = self.active_mask.astype(int).tolist()
        if self.pixel_config is not None:
            result["pixel_config"] = self.pixel_config
        return result

    @classmethod
    def from_dict(cls, data):
        known = {"rows", "cols", "pitch_m", "mask", "pixel_config"}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(
                "Unknown layout keys {}".format(sorted(unknown)))
        try:
            return cls(rows=data["rows"],
                       cols=data["cols"],
                       pitch=data.get("pitch_m", 4.0e-3),
                       active_mask=data.get("mask"),
                       pixel_config=data.get("pixel_config"))
        except KeyError as err:
            raise ValidationError(
                "Layout is missing key {}".format(err)) from None

    def __repr__(self):
        return "{} '{}x{} at {} m, {} active'".format(
            type(self).__name__,
            self.rows, self.cols, self.pitch, self.n_active)


@dataclass(frozen=True)
class PatternEvent:
    pixel: int
    start_time: float
    train: PulseTrain

    @property
    def end_time(self):
        return self.start_time + self.train.duration

    def to_dict(self):
        return {"pixel": int(self.pixel),
                "t0_s": self.start_time,
                "train": self.train.to_dict()}

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - {"pixel", "t0_s", "train"}
        if unknown:
            raise ValidationError(
                "Unknown event keys {}".format(sorted(unknown)))
        try:
            return cls(pixel=int(data["pixel"]),
                       start_time=float(data["t0_s"]),
                       train=PulseTrain.from_dict(data["train"]))
        except KeyError as err:
            raise ValidationError(
                "Event is missing key {}".format(err)) from None


class TactilePattern():
    """
    Ordered pixel events

    Parameters
    ----------
    events : :py:class:`list`
        :class:`PatternEvent` items.
    total_duration : :py:class:`float`
        Pattern length, s. Default the end of
        the latest event.
    name : :py:class:`str`
        Label for reports.
    """

    def __init__(self, events=None, total_duration=None, name=""):
        if events is None:
            events = list()
        self.events = list(events)
        for event in self.events:
            if not event.start_time >= 0:
                raise ValidationError(
                    "Event start times must be >= 0, "
                    "got {}".format(event.start_time))
        last_end = max([e.end_time for e in self.events], default=0.0)
        if total_duration is None:
            total_duration = last_end
        if total_duration < last_end - TIME_TOLERANCE:
            raise ValidationError(
                "Pattern duration {} s precedes the end of its "
                "last event at {} s".format(total_duration, last_end))
        self.total_duration = float(total_duration)
        self.name = name

    def validate_for(self, layout: DisplayLayout):
        for position, event in enumerate(self.events):
            if not layout.is_active(event.pixel):
                raise ValidationError(
                    "Event {} targets pixel {}, which is not an "
                    "active pixel of {}".format(position, event.pixel,
                                                layout),
                    event=position, pixel=event.pixel)

    def pixels(self):
        return sorted({int(e.pixel) for e in self.events})

    def shifted(self, offset):
        return TactilePattern(
            [PatternEvent(e.pixel, e.start_time + offset, e.train)
             for e in self.events],
            self.total_duration + offset,
            self.name)

    def __add__(self, other):
        """
        Concatenate: `other` starts when
        this pattern ends.
        """
        later = other.shifted(self.total_duration)
        return TactilePattern(self.events + later.events,
                              later.total_duration,
                              self.name or other.name)

    def __len__(self):
        return len(self.events)

    def to_dict(self):
        return {"events": [e.to_dict() for e in self.events],
                "total_duration_s": self.total_duration}

    @classmethod
    def from_dict(cls, data, name=""):
        return cls([PatternEvent.from_dict(e)
                    for e in data.get("events", [])],
                   total_duration=data.get("total_duration_s"),
                   name=name)

    def __repr__(self):
        return "{} '{}: {} events over {} s'".format(
            type(self).__name__, self.name,
            len(self), self.total_duration)


@dataclass(frozen=True)
class Interval:
    """
    One illumination interval; `event` is the
    index of the pattern event it came from.
    """
    pixel: int
    on_time: float
    off_time: float
    power: float
    absorbed_fraction: float = field(
        default_factory=lambda: get_default("absorbed_fraction"))
    event: int = None

    def __post_init__(self):
        if not self.off_time > self.on_time:
            raise ValidationError(
                "Interval must end after it starts, got "
                "[{}, {}]".format(self.on_time, self.off_time))

    @property
    def absorbed_power(self):
        return self.absorbed_fraction * self.power

    def describe(self):
        return "event {} pixel {} [{:.6g}, {:.6g}] s".format(
            self.event, self.pixel, self.on_time, self.off_time)


class ScanSchedule():
    """
    Time-ordered illumination intervals

    Parameters
    ----------
    intervals : :py:class:`list`
        :class:`Interval` items sorted by
        on-time.
    single_beam : :py:class:`bool`
        Whether the intervals were checked
        against the single-beam constraint.
    dead_time : :py:class:`float`
        Beam retarget time used for the check, s.
    duration : :py:class:`float`
        Schedule length, s.
    """

    def __init__(self, intervals, single_beam, dead_time, duration):
        self.intervals = list(intervals)
        self.single_beam = bool(single_beam)
        self.dead_time = float(dead_time)
        last_off = max([i.off_time for i in self.intervals], default=0.0)
        self.duration = float(max(duration, last_off))

    def __len__(self):
        return len(self.intervals)

    def for_pixel(self, pixel):
        return [i for i in self.intervals if i.pixel == pixel]

    def pixels(self):
        return sorted({int(i.pixel) for i in self.intervals})

    def drive_for(self, pixel, duration=None):
        """
        Absorbed-power drive of one pixel
        over the schedule. Overlapping intervals
        (multi-beam schedules) add their absorbed
        powers.
        """
        if duration is None:
            duration = self.duration
        intervals = self.for_pixel(pixel)
        edges = []
        for edge in sorted({t for i in intervals
                            for t in (i.on_time, i.off_time)}):
            if not edges or edge - edges[-1] > TIME_TOLERANCE:
                edges.append(edge)
        breakpoints = []
        level = 0.0
        for start, end in zip(edges[:-1], edges[1:]):
            power = sum(i.absorbed_power for i in intervals
                        if i.on_time <= start + TIME_TOLERANCE
                        and i.off_time >= end - TIME_TOLERANCE)
            if power != level:
                breakpoints.append((start, power))
                level = power
        if level != 0.0:
            breakpoints.append((edges[-1], 0.0))
        return DriveSignal(breakpoints, duration)

    def absorbed_energy(self):
        return float(sum(i.absorbed_power * (i.off_time - i.on_time)
                         for i in self.intervals))

    def to_frame(self):
        return pl.DataFrame(
            {"pixel": [int(i.pixel) for i in self.intervals],
             "on_s": [i.on_time for i in self.intervals],
             "off_s": [i.off_time for i in self.intervals],
             "P_W": [i.power for i in self.intervals],
             "eps": [i.absorbed_fraction for i in self.intervals],
             "event": [i.event for i in self.intervals]},
            schema={"pixel": pl.Int64, "on_s": pl.Float64,
                    "off_s": pl.Float64, "P_W": pl.Float64,
                    "eps": pl.Float64, "event": pl.Int64})

    def __repr__(self):
        return "{} '{} intervals over {} s'".format(
            type(self).__name__, len(self), self.duration)


def check_single_beam(intervals, dead_time):
    """
    Raise :class:`~optopix.errors.ScheduleConflictError`
    for the first interval that starts before
    the beam is free: every interval must start
    after all earlier ones have ended, plus
    `dead_time` when the beam moves to another
    pixel.
    """
    latest = None
    for interval in intervals:
        gap = dead_time
        if latest is None or interval.pixel == latest.pixel:
            gap = 0.0
        if latest is not None and (
                interval.on_time < latest.off_time + gap -
                TIME_TOLERANCE):
            raise ScheduleConflictError(
                "Single-beam conflict between {} and {} "
                "(dead time {} s)".format(latest.describe(),
                                          interval.describe(),
                                          dead_time),
                first=latest,
                second=interval,
                first_event=latest.event,
                second_event=interval.event)
        if latest is None or interval.off_time > latest.off_time:
            latest = interval


def compile_pattern(layout: DisplayLayout,
                    pattern: TactilePattern,
                    single_beam: bool = True,
                    dead_time: float = None):
    """
    Expand a pattern into illumination
    intervals.

    Parameters
    ----------
    layout : :class:`DisplayLayout`
    pattern : :class:`TactilePattern`
    single_beam : :py:class:`bool`
        Require pairwise non-overlapping
        intervals separated by the dead time.
        Conflicts raise; nothing is reordered.
    dead_time : :py:class:`float`
        Beam retarget time, s. Default 0.5 ms.

    Returns
    -------
    :class:`ScanSchedule`
    """
    dead_time = get_default("dead_time", dead_time)
    pattern.validate_for(layout)
    intervals = []
    for position, event in enumerate(pattern.events):
        train = event.train
        for on, off in train.pulse_intervals(event.start_time):
            intervals.append(Interval(pixel=int(event.pixel),
                                      on_time=on,
                                      off_time=off,
                                      power=train.pulse_power,
                                      absorbed_fraction=(
                                          train.absorbed_fraction),
                                      event=position))
    intervals.sort(key=lambda i: (i.on_time, i.event))
    if single_beam:
        check_single_beam(intervals, dead_time)
    schedule = ScanSchedule(intervals, single_beam, dead_time,
                            pattern.total_duration)
    logger.debug("compiled %s into %s", pattern, schedule)
    return schedule


@dataclass(frozen=True)
class FieldFrame:
    """
    Displacement (and optionally force) of
    every active pixel at one instant, in
    :meth:`DisplayLayout.active_indices` order.
    """
    timestamp: float
    displacement: np.ndarray
    force: np.ndarray = None


def _idle_response(network, context: MechanicsContext):
    pressure = gauge_pressure(context.gas, network.wall_temperature)
    return (float(membrane_displacement(context.membrane, pressure)),
            float(blocked_force(context.geometry, pressure)))


def simulate_display(layout: DisplayLayout,
                     schedule: ScanSchedule,
                     network,
                     context: MechanicsContext,
                     sample_period: float = 1e-3,
                     duration: float = None,
                     with_force: bool = False,
                     order=None,
                     workers: int = None):
    """
    Simulate every active pixel independently
    and assemble field frames.

    Parameters
    ----------
    layout : :class:`DisplayLayout`
    schedule : :class:`ScanSchedule`
    network : :class:`~optopix.model.ThermalNetwork`
        Shared by all pixels.
    context : :class:`~optopix.mechanics.MechanicsContext`
        Shared by all pixels.
    sample_period : :py:class:`float`
        Frame interval, s.
    duration : :py:class:`float`
        Default the schedule duration.
    with_force : :py:class:`bool`
        Also store blocked force per frame.
    order : :py:class:`list`
        Pixel evaluation order; does not
        affect the result.
    workers : :py:class:`int`
        Thread count for per-pixel work;
        does not affect the result.

    Returns
    -------
    :py:class:`list`
        :class:`FieldFrame` per sample time.
    """
    workers = get_default("display_workers", workers)
    if duration is None:
        duration = schedule.duration
    if not duration >= sample_period:
        raise ValidationError(
            "Display duration {} s is shorter than one frame "
            "interval {} s".format(duration, sample_period))
    active = layout.active_indices()
    driven = set(schedule.pixels())
    if order is None:
        order = list(active)
    if sorted(int(p) for p in order) != sorted(int(p) for p in active):
        raise ValidationError(
            "Evaluation order must be a permutation of the "
            "active pixels")

    def run(pixel):
        if pixel not in driven:
            return None
        trace = simulate_response(network, context,
                                  schedule.drive_for(pixel, duration),
                                  duration=duration,
                                  sample_period=sample_period)
        return trace.displacement, trace.force

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = dict(zip(order, pool.map(run, order)))
    else:
        results = {pixel: run(pixel) for pixel in order}

    n_samples = None
    for value in results.values():
        if value is not None:
            n_samples = value[0].size
            break
    if n_samples is None:
        n_samples = int(np.floor(duration / sample_period *
                                 (1 + 1e-9))) + 1
    idle_z, idle_f = _idle_response(network, context)
    displacement = np.full((active.size, n_samples), idle_z)
    force = np.full((active.size, n_samples), idle_f)
    for slot, pixel in enumerate(active):
        value = results[pixel]
        if value is not None:
            displacement[slot] = value[0]
            force[slot] = value[1]
    logger.info("simulated %d driven of %d active pixels",
                len(driven), active.size)
    times = np.arange(n_samples) * sample_period
    return [FieldFrame(timestamp=float(t),
                       displacement=displacement[:, k].copy(),
                       force=force[:, k].copy() if with_force else None)
            for k, t in enumerate(times)]


def field_to_frame(layout: DisplayLayout, frames):
    """
    Long table with one row per
    (frame, pixel): t_s, pixel, row, col,
    z_m and, when present, F_N.
    """
    active = layout.active_indices()
    rows, cols = np.divmod(active, layout.cols)
    n_frames = len(frames)
    columns = {
        "t_s": np.repeat([f.timestamp for f in frames], active.size),
        "pixel": np.tile(active, n_frames),
        "row": np.tile(rows, n_frames),
        "col": np.tile(cols, n_frames),
        "z_m": np.concatenate([f.displacement for f in frames])
        if frames else np.array([], dtype=float),
    }
    if frames and frames[0].force is not None:
        columns["F_N"] = np.concatenate([f.force for f in frames])
    return pl.DataFrame(columns)


def write_field(table: pl.DataFrame, path):
    """
    Write a field table as CSV, or as Parquet
    when `path` ends in ``.parquet``.
    """
    if str(path).endswith(".parquet"):
        table.write_parquet(path, use_pyarrow=True)
    else:
        table.write_csv(path)
