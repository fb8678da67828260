#!/usr/bin/env python3
# *_* coding: utf-8 *_*

"""
Declarative plot specifications for trace,
sweep and field tables. A plot is defined
once and rendered as a
:class:`matplotlib.figure.Figure` with
:meth:`TablePlot.render`; values are shown
in reporting units.
"""

import matplotlib.pyplot as plt
import numpy as np
import polars as pl

from optopix.units import ColumnUnits, report_units

plot_defaults = dict(
    figsize=(6, 4),
    linewidth=1.5,
    marker="o",
    markersize=4,
    colormap="viridis",
    legend=True,
)


class TablePlot:
    """
    Plot of one or more table columns
    against another

    Parameters
    ----------
    data : :py:class:`polars.DataFrame`
        Table to plot.
    x : :py:class:`str`
        Column for the horizontal axis.
    y : :py:class:`list`
        Columns drawn against `x`.
    units : :class:`~optopix.units.ColumnUnits`
        Column scales for display. Default
        :data:`~optopix.units.report_units`.
    **kwargs
        Style parameters overriding
        :data:`plot_defaults`, plus optional
        ``title``, ``xlabel`` and ``ylabel``.
    """

    draw_markers = False

    def __init__(self,
                 data: pl.DataFrame,
                 x: str,
                 y: list = None,
                 units: ColumnUnits = None,
                 **kwargs):
        if y is None:
            y = [col for col in data.columns if col != x]
        if isinstance(y, str):
            y = [y]
        missing = [col for col in [x] + list(y) if col not in data.columns]
        if missing:
            raise ValueError(
                "Columns {} not found in plot data "
                "with columns {}".format(missing, data.columns))
        if units is None:
            units = report_units
        self.data = data
        self.x = x
        self.y = list(y)
        self.units = units
        self.params = kwargs

    def get_param(self, param, default=None):
        if default is None:
            default = plot_defaults.get(param, None)
        return self.params.get(param, default)

    def scaled(self, column):
        values = self.data.get_column(column).to_numpy()
        return self.units(column, values)

    def get_axes(self, ax=None, fig=None):
        if ax is None:
            if fig is None:
                fig = plt.figure(figsize=self.get_param("figsize"))
            ax = fig.add_subplot()
        elif fig is None:
            fig = ax.figure
        return fig, ax

    def render(self, ax=None, fig=None):
        fig, ax = self.get_axes(ax=ax, fig=fig)
        x = self.scaled(self.x)
        for column in self.y:
            ax.plot(x, self.scaled(column),
                    label=self.units.label(column),
                    linewidth=self.get_param("linewidth"),
                    marker=(self.get_param("marker")
                            if self.draw_markers else None),
                    markersize=self.get_param("markersize"))
        ax.set_xlabel(self.get_param("xlabel", self.units.label(self.x)))
        if len(self.y) == 1:
            ax.set_ylabel(self.get_param("ylabel",
                                         self.units.label(self.y[0])))
        elif self.get_param("ylabel") is not None:
            ax.set_ylabel(self.get_param("ylabel"))
        if self.get_param("legend") and len(self.y) > 1:
            ax.legend()
        if self.get_param("title") is not None:
            ax.set_title(self.get_param("title"))
        return fig

    def __repr__(self):
        return "{} '{} vs {}'".format(type(self).__name__,
                                      self.y, self.x)


class TracePlot(TablePlot):
    """
    Time trace; temperatures by default,
    with an optional second axis for
    displacement.
    """

    def __init__(self, data, y=None, secondary=None, **kwargs):
        if y is None:
            y = [col for col in ["T_abs_K", "T_air_K"]
                 if col in data.columns]
        super().__init__(data, "t_s", y, **kwargs)
        self.secondary = secondary

    def render(self, ax=None, fig=None):
        fig = super().render(ax=ax, fig=fig)
        if self.secondary is not None:
            primary = fig.axes[0]
            twin = primary.twinx()
            twin.plot(self.scaled(self.x), self.scaled(self.secondary),
                      color="black", linestyle="--",
                      linewidth=self.get_param("linewidth"))
            twin.set_ylabel(self.units.label(self.secondary))
        return fig


class SweepPlot(TablePlot):
    """
    Sweep result; the first column is the
    swept parameter.
    """
    draw_markers = True

    def __init__(self, data, y=None, logx=False, **kwargs):
        super().__init__(data, data.columns[0], y, **kwargs)
        self.logx = logx

    def render(self, ax=None, fig=None):
        fig = super().render(ax=ax, fig=fig)
        if self.logx:
            fig.axes[0].set_xscale("log")
        return fig


class FieldPlot:
    """
    Displacement map of a display at one
    frame of a field table.

    Parameters
    ----------
    data : :py:class:`polars.DataFrame`
        Field table with ``t_s``, ``row``,
        ``col`` and a value column.
    timestamp : :py:class:`float`
        Frame to show; default the frame
        of largest peak value.
    value : :py:class:`str`
        Column to map. Default ``z_m``.
    """

    def __init__(self, data, timestamp=None, value="z_m",
                 units=None, **kwargs):
        if units is None:
            units = report_units
        self.data = data
        self.timestamp = timestamp
        self.value = value
        self.units = units
        self.params = kwargs

    def frame(self):
        timestamp = self.timestamp
        if timestamp is None:
            peak = self.data.sort(self.value, descending=True).row(
                0, named=True)
            timestamp = peak["t_s"]
        times = self.data.get_column("t_s").to_numpy()
        nearest = times[np.argmin(np.abs(times - timestamp))]
        return nearest, self.data.filter(pl.col("t_s") == nearest)

    def render(self, ax=None, fig=None):
        if ax is None:
            if fig is None:
                fig = plt.figure(figsize=self.params.get(
                    "figsize", plot_defaults["figsize"]))
            ax = fig.add_subplot()
        elif fig is None:
            fig = ax.figure
        timestamp, frame = self.frame()
        rows = frame.get_column("row").to_numpy()
        cols = frame.get_column("col").to_numpy()
        grid = np.full((rows.max() + 1, cols.max() + 1), np.nan)
        grid[rows, cols] = self.units(
            self.value, frame.get_column(self.value).to_numpy())
        image = ax.imshow(grid,
                          cmap=self.params.get("colormap",
                                               plot_defaults["colormap"]),
                          origin="upper")
        fig.colorbar(image, ax=ax, label=self.units.label(self.value))
        ax.set_title(self.params.get(
            "title", "t = {:.4g} ms".format(1e3 * timestamp)))
        ax.set_xlabel("col")
        ax.set_ylabel("row")
        return fig
