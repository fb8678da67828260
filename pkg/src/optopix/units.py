#!/usr/bin/env python3

# filename: units.py
# description: unit scale classes
# inheriting from class Scale.
# Internal values are strict SI;
# scales convert to and from
# reporting units at I/O boundaries.

import numpy as np

KELVIN_OFFSET = 273.15


class Scale():

    unit = ""

    def __init__(self, **kwargs):
        pass

    def __call__(self, x):
        raise NotImplementedError()

    def invert(self, x):
        raise NotImplementedError()

    def __repr__(self):
        return "{} '{}'".format(
            type(self).__name__,
            self.unit)


class ScaleIdentity(Scale):

    def __init__(self, unit="", **kwargs):
        self.unit = unit

    def __call__(self, x):
        return x

    def invert(self, x):
        return x

    def __eq__(self, x):
        return (isinstance(x, type(self)) and
                x.unit == self.unit)


class ScaleLinear(Scale):
    """
    Multiplicative unit scale,
    e.g. seconds to milliseconds.

    Parameters
    ----------
    factor : :py:class:`float`
        Reporting units per SI unit.
    unit : :py:class:`str`
        Label of the reporting unit.
    """

    def __init__(self, factor, unit, **kwargs):
        if not np.isfinite(factor) or factor == 0:
            raise ValueError(
                "ScaleLinear factor must be finite "
                "and nonzero, got {}".format(factor))
        self.factor = factor
        self.unit = unit

    def __call__(self, x):
        return np.multiply(x, self.factor)

    def invert(self, x):
        return np.divide(x, self.factor)


class ScaleOffset(Scale):
    """
    Additive unit scale,
    e.g. kelvin to degrees Celsius.
    """

    def __init__(self, offset, unit, **kwargs):
        self.offset = offset
        self.unit = unit

    def __call__(self, x):
        return np.subtract(x, self.offset)

    def invert(self, x):
        return np.add(x, self.offset)


milliseconds = ScaleLinear(1e3, "ms")
millimeters = ScaleLinear(1e3, "mm")
micrometers = ScaleLinear(1e6, "um")
microjoules_per_kelvin = ScaleLinear(1e6, "uJ/K")
millinewtons = ScaleLinear(1e3, "mN")
microliters = ScaleLinear(1e9, "uL")
percent = ScaleLinear(1e2, "%")
celsius = ScaleOffset(KELVIN_OFFSET, "C")


class ColumnUnits():
    """
    Manual mapping from table column
    names to reporting scales.

    Parameters
    ----------
    mapping : :py:class:`dict`
        Column name to :class:`Scale`.
    strict : :py:class:`bool`
        Raise a ValueError when asked for
        a column with no registered scale.
        If False, unmapped columns pass
        through unchanged. Default False.
    """

    def __init__(self,
                 mapping: dict = None,
                 strict: bool = False):
        if mapping is None:
            mapping = dict()
        self.mapping = dict(mapping)
        self.strict = strict

    def scale_for(self, column):
        scale = self.mapping.get(column, None)
        if scale is None:
            if self.strict:
                raise ValueError(
                    "{} has no scale for "
                    "column '{}'".format(
                        type(self).__name__,
                        column))
            scale = ScaleIdentity()
        return scale

    def label(self, column):
        unit = self.scale_for(column).unit
        if unit:
            return "{} [{}]".format(column, unit)
        return column

    def __call__(self, column, x):
        return self.scale_for(column)(x)


report_units = ColumnUnits({
    "t_s": milliseconds,
    "T_abs_K": celsius,
    "T_air_K": celsius,
    "F_N": millinewtons,
    "z_m": micrometers,
    "delta_pp_m": micrometers,
    "d_target_m": micrometers,
    "tp_s": milliseconds,
    "w_m": millimeters,
    "tau_s": milliseconds,
})
