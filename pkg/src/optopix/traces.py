#!/usr/bin/env python3

# filename: traces.py
# description: uniformly sampled
# time series of pixel model state,
# backed by a polars DataFrame

import numpy as np
import polars as pl

from optopix.errors import InsufficientDataError, ValidationError

TIME = "t_s"
ABSORBER_TEMPERATURE = "T_abs_K"
AIR_TEMPERATURE = "T_air_K"
PRESSURE = "P_Pa"
FORCE = "F_N"
DISPLACEMENT = "z_m"

THERMAL_COLUMNS = (TIME, ABSORBER_TEMPERATURE, AIR_TEMPERATURE)
MECHANICAL_COLUMNS = (PRESSURE, FORCE, DISPLACEMENT)


def sample_times(duration, sample_period):
    """
    Uniform grid 0, dt, 2 dt, ...
    up to and including `duration`
    (within a relative 1e-9 of a step).
    """
    if not sample_period > 0:
        raise ValidationError(
            "Sample period must be positive, "
            "got {}".format(sample_period))
    if not duration >= sample_period:
        raise ValidationError(
            "Duration {} s is shorter than one "
            "sample period {} s".format(duration, sample_period))
    n_steps = int(np.floor(duration / sample_period * (1 + 1e-9)))
    return np.arange(n_steps + 1) * sample_period


class TraceSeries:
    """
    Uniformly sampled model trace

    Parameters
    ----------
    data : :py:class:`polars.DataFrame`
        Table with at least the columns
        ``t_s``, ``T_abs_K`` and ``T_air_K``,
        optionally followed by ``P_Pa``,
        ``F_N`` and ``z_m``. All values SI.
    sample_period : :py:class:`float`
        Sampling interval in seconds. If None,
        it is inferred from the time column.
    """

    def __init__(self,
                 data: pl.DataFrame,
                 sample_period: float = None):
        missing = [col for col in THERMAL_COLUMNS
                   if col not in data.columns]
        if missing:
            raise ValidationError(
                "Trace is missing required "
                "columns {}".format(missing))
        unknown = [col for col in data.columns
                   if col not in THERMAL_COLUMNS + MECHANICAL_COLUMNS]
        if unknown:
            raise ValidationError(
                "Trace has unknown columns "
                "{}".format(unknown))
        if data.height < 1:
            raise InsufficientDataError(
                "Trace has no samples")
        ordered = [col for col in THERMAL_COLUMNS + MECHANICAL_COLUMNS
                   if col in data.columns]
        self.data = data.select(
            [pl.col(col).cast(pl.Float64) for col in ordered])

        time = self.time
        if sample_period is None:
            if time.size < 2:
                raise InsufficientDataError(
                    "Cannot infer the sample period "
                    "of a single-sample trace")
            sample_period = float(np.median(np.diff(time)))
        self.sample_period = float(sample_period)
        self.validate()

    def validate(self):
        time = self.time
        if time.size > 1:
            steps = np.diff(time)
            if np.any(steps <= 0):
                raise ValidationError(
                    "Trace time must be strictly increasing")
            if not np.allclose(steps, self.sample_period,
                               rtol=1e-6, atol=1e-12):
                raise ValidationError(
                    "Trace is not uniformly sampled at "
                    "{} s".format(self.sample_period))
        for col in [ABSORBER_TEMPERATURE, AIR_TEMPERATURE]:
            values = self.column(col)
            if not np.all(np.isfinite(values)) or np.any(values < 0):
                raise ValidationError(
                    "Column {} must hold finite absolute "
                    "temperatures".format(col))

    @classmethod
    def from_arrays(cls,
                    time,
                    absorber_temperature,
                    air_temperature,
                    sample_period=None,
                    **mechanical):
        columns = {TIME: np.asarray(time, dtype=float),
                   ABSORBER_TEMPERATURE: np.asarray(
                       absorber_temperature, dtype=float),
                   AIR_TEMPERATURE: np.asarray(
                       air_temperature, dtype=float)}
        for col, values in mechanical.items():
            columns[col] = np.asarray(values, dtype=float)
        return cls(pl.DataFrame(columns),
                   sample_period=sample_period)

    def column(self, name):
        return self.data.get_column(name).to_numpy()

    def has_column(self, name):
        return name in self.data.columns

    @property
    def time(self):
        return self.column(TIME)

    @property
    def absorber_temperature(self):
        return self.column(ABSORBER_TEMPERATURE)

    @property
    def air_temperature(self):
        return self.column(AIR_TEMPERATURE)

    @property
    def pressure(self):
        return self.column(PRESSURE)

    @property
    def force(self):
        return self.column(FORCE)

    @property
    def displacement(self):
        return self.column(DISPLACEMENT)

    @property
    def duration(self):
        return float(self.time[-1] - self.time[0])

    def __len__(self):
        return self.data.height

    def with_columns(self, **columns):
        """
        New trace with extra (or replaced)
        columns given as arrays keyed by
        column name.
        """
        series = [pl.Series(name, np.asarray(values, dtype=float))
                  for name, values in columns.items()]
        return TraceSeries(self.data.with_columns(series),
                           sample_period=self.sample_period)

    def window(self, start, stop):
        """
        Samples with start <= t <= stop.
        """
        tol = 1e-9 * self.sample_period
        frame = self.data.filter(
            (pl.col(TIME) >= start - tol) &
            (pl.col(TIME) <= stop + tol))
        return TraceSeries(frame, sample_period=self.sample_period)

    def to_frame(self):
        return self.data.clone()

    def write_csv(self, path):
        self.data.write_csv(path)

    @classmethod
    def read_csv(cls, path):
        try:
            frame = pl.read_csv(path)
        except Exception as err:
            raise ValidationError(
                "Could not read trace CSV {}: {}"
                "".format(path, err)) from err
        return cls(frame)

    def __repr__(self):
        return "{} '{} samples at {} s'".format(
            type(self).__name__,
            len(self),
            self.sample_period)
