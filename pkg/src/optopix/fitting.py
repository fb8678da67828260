#!/usr/bin/env python3
# *_* coding: utf-8 *_*

"""
Thermal parameter estimation.

Fits the single-pole absorber response to
measured temperature rises, the bridge-width
law R = a / w, and the steady-state cyclic
ratio laws. Nonlinear fits use a damped
Gauss-Newton (Levenberg-Marquardt) iteration
with analytic Jacobians.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import polars as pl
from scipy.stats import linregress

from optopix.defaults import get_default
from optopix.errors import (
    ConvergenceError,
    InsufficientDataError,
    ValidationError)
from optopix.traces import TraceSeries, sample_times

logger = logging.getLogger(__name__)


@dataclass
class FitResult:
    """
    Outcome of a parameter fit

    Parameters
    ----------
    parameters : :py:class:`dict`
        Fitted values keyed by name, SI.
    standard_errors : :py:class:`dict`
        One-sigma error estimate per parameter
        from the linearized covariance.
    r_squared : :py:class:`float`
        1 - SS_res / SS_tot.
    residual_rms : :py:class:`float`
        Root mean square residual in the
        units of the observable.
    iterations : :py:class:`int`
        Solver iterations used.
    converged : :py:class:`bool`
        Whether the stopping criterion was met.
    units : :py:class:`dict`
        Unit label per parameter.
    provenance : :py:class:`dict`
        Fit settings (window, seed, model).
    """
    parameters: dict
    standard_errors: dict
    r_squared: float
    residual_rms: float
    iterations: int = 0
    converged: bool = True
    units: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def __getitem__(self, name):
        return self.parameters[name]

    def to_dict(self):
        return {
            "parameters": {k: float(v) for k, v in self.parameters.items()},
            "standard_errors": {k: float(v) for k, v
                                in self.standard_errors.items()},
            "units": dict(self.units),
            "r_squared": float(self.r_squared),
            "residual_rms": float(self.residual_rms),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "provenance": dict(self.provenance),
        }


def r_squared(observed, predicted):
    """
    Coefficient of determination,
    1 - SS_res / SS_tot, about the
    mean of `observed`.
    """
    observed = np.asarray(observed, dtype=float)
    predicted = np.asarray(predicted, dtype=float)
    ss_res = float(np.sum((observed - predicted) ** 2))
    ss_tot = float(np.sum((observed - np.mean(observed)) ** 2))
    if ss_tot == 0:
        return 1.0 if ss_res == 0 else 0.0
    return 1 - ss_res / ss_tot


def _scaled_gradient(jacobian, residuals, x):
    # Gauss-Newton step implied by the gradient,
    # relative to max(|x|, 1) per parameter
    normal = jacobian.T @ jacobian
    gradient = jacobian.T @ residuals
    try:
        newton = np.linalg.solve(normal, gradient)
    except np.linalg.LinAlgError:
        newton = np.linalg.lstsq(normal, gradient, rcond=None)[0]
    return float(np.max(np.abs(newton) / np.maximum(np.abs(x), 1.0)))


def levenberg_marquardt(residuals_and_jacobian,
                        initial,
                        tolerance=None,
                        max_iterations=None,
                        damping=None):
    """
    Minimize the sum of squared residuals.

    Convergence is judged only at accepted
    iterates, from the gradient J^T r there:
    the undamped Gauss-Newton step it implies
    must be below `tolerance` relative to
    max(|x|, 1) per parameter. A rejected
    trial step never ends the iteration.

    Parameters
    ----------
    residuals_and_jacobian : callable
        Maps a parameter vector to
        ``(residuals, jacobian)``.
    initial : array
        Starting parameter vector.
    tolerance : :py:class:`float`
        Scaled gradient tolerance.
    max_iterations : :py:class:`int`
        Iteration cap.
    damping : :py:class:`float`
        Initial Marquardt damping factor.

    Returns
    -------
    :py:class:`tuple`
        ``(x, iterations, converged, residuals, jacobian)``
        at the final accepted iterate.
    """
    tolerance = get_default("fit_tolerance", tolerance)
    max_iterations = get_default("fit_max_iterations", max_iterations)
    damping = get_default("fit_initial_damping", damping)

    x = np.asarray(initial, dtype=float).copy()
    residuals, jacobian = residuals_and_jacobian(x)
    cost = float(residuals @ residuals)
    converged = bool(np.isfinite(cost)) and (
        cost == 0 or _scaled_gradient(jacobian, residuals, x) < tolerance)
    iterations = 0
    while not converged and iterations < max_iterations:
        iterations += 1
        normal = jacobian.T @ jacobian
        gradient = jacobian.T @ residuals
        scaled = normal + damping * np.diag(np.diag(normal))
        try:
            step = -np.linalg.solve(scaled, gradient)
        except np.linalg.LinAlgError:
            step = -np.linalg.lstsq(scaled, gradient, rcond=None)[0]
        trial = x + step
        trial_residuals, trial_jacobian = residuals_and_jacobian(trial)
        trial_cost = float(trial_residuals @ trial_residuals)
        if np.isfinite(trial_cost) and trial_cost <= cost:
            x = trial
            residuals, jacobian = trial_residuals, trial_jacobian
            cost = trial_cost
            damping = max(damping / 10, 1e-15)
            converged = (cost == 0 or
                         _scaled_gradient(jacobian, residuals, x) <
                         tolerance)
        else:
            damping *= 10
        logger.debug("iteration %d cost %.6g damping %.1g",
                     iterations, cost, damping)
    return x, iterations, converged, residuals, jacobian


def _standard_errors(jacobian, residuals, n_params):
    dof = max(residuals.size - n_params, 1)
    variance = float(residuals @ residuals) / dof
    try:
        covariance = variance * np.linalg.inv(jacobian.T @ jacobian)
    except np.linalg.LinAlgError:
        covariance = np.full((n_params, n_params), np.nan)
    return covariance


def rc_step_response(time, r_abs, tau, absorbed_power):
    """
    Temperature rise of the absorber under
    constant absorbed power from equilibrium.
    """
    return absorbed_power * r_abs * (1 - np.exp(-np.asarray(time) / tau))


def fit_rc(trace: TraceSeries,
           absorbed_power: float,
           fit_window: float = None,
           onset: float = None):
    """
    Estimate absorber resistance and time
    constant from a heating trace.

    The temperature rise above the sample at
    `onset` is fitted over `fit_window` with
    P R (1 - exp(-t / τ)) in parameters
    (R, log τ); C = τ / R.

    Parameters
    ----------
    trace : :class:`~optopix.traces.TraceSeries`
        Absorber temperature trace.
    absorbed_power : :py:class:`float`
        Constant absorbed power during the
        window, W.
    fit_window : :py:class:`float`
        Window length from onset, s. Default
        ``fit_window`` (30 ms).
    onset : :py:class:`float`
        Pulse onset time; default the first
        sample.

    Returns
    -------
    :class:`FitResult`
        Parameters ``r_abs`` (K/W), ``c_abs``
        (J/K) and ``tau`` (s).
    """
    fit_window = get_default("fit_window", fit_window)
    if not absorbed_power > 0:
        raise ValidationError(
            "Absorbed power must be positive, "
            "got {}".format(absorbed_power))
    time = trace.time
    if onset is None:
        onset = float(time[0])
    if time[-1] < onset + fit_window - 1e-9 * trace.sample_period:
        raise InsufficientDataError(
            "Trace ends at {} s, before the end of the "
            "{} s fit window".format(time[-1], fit_window),
            window=fit_window)
    window = trace.window(onset, onset + fit_window)
    if len(window) < 3:
        raise InsufficientDataError(
            "Fit window holds {} samples, need at "
            "least 3".format(len(window)))
    elapsed = window.time - onset
    rise = window.absorber_temperature - window.absorber_temperature[0]

    def residuals_and_jacobian(theta):
        r_abs, log_tau = theta
        tau = np.exp(log_tau)
        decay = np.exp(-elapsed / tau)
        model = absorbed_power * r_abs * (1 - decay)
        jacobian = np.column_stack([
            absorbed_power * (1 - decay),
            -absorbed_power * r_abs * (elapsed / tau) * decay])
        return model - rise, jacobian

    r0 = max(float(rise[-1]) / absorbed_power, 1e-12)
    tau0 = fit_window / 3
    theta, iterations, converged, residuals, jacobian = (
        levenberg_marquardt(residuals_and_jacobian,
                            [r0, np.log(tau0)]))
    if not converged:
        raise ConvergenceError(
            "RC fit did not converge in {} iterations; last "
            "iterate R={:.6g} K/W tau={:.6g} s".format(
                iterations, theta[0], np.exp(theta[1])),
            last_iterate={"r_abs": float(theta[0]),
                          "tau": float(np.exp(theta[1]))},
            iterations=iterations)

    r_abs, tau = float(theta[0]), float(np.exp(theta[1]))
    covariance = _standard_errors(jacobian, residuals, 2)
    se_r = float(np.sqrt(covariance[0, 0]))
    se_tau = tau * float(np.sqrt(covariance[1, 1]))
    # log C = log τ - log R
    grad = np.array([-1 / r_abs, 1.0])
    se_c = (tau / r_abs) * float(np.sqrt(grad @ covariance @ grad))
    logger.info("fitted R=%.4g K/W tau=%.4g s in %d iterations",
                r_abs, tau, iterations)
    return FitResult(
        parameters={"r_abs": r_abs, "c_abs": tau / r_abs, "tau": tau},
        standard_errors={"r_abs": se_r, "c_abs": se_c, "tau": se_tau},
        r_squared=r_squared(rise, rise + residuals),
        residual_rms=float(np.sqrt(np.mean(residuals ** 2))),
        iterations=iterations,
        converged=converged,
        units={"r_abs": "K/W", "c_abs": "J/K", "tau": "s"},
        provenance={"model": "rc_step", "window_s": fit_window,
                    "onset_s": onset, "absorbed_power_W": absorbed_power})


def _validate_points(points, what):
    if len(points) < 3:
        raise InsufficientDataError(
            "{} fit needs at least 3 points, "
            "got {}".format(what, len(points)))
    x = np.array([p[0] for p in points], dtype=float)
    y = np.array([p[1] for p in points], dtype=float)
    if np.any(x <= 0):
        raise ValidationError(
            "{} fit abscissae must be positive, "
            "got {}".format(what, x.tolist()))
    return x, y


def _through_origin(x, y):
    """
    Least squares y = a x with no intercept.
    """
    sxx = float(np.sum(x * x))
    a = float(np.sum(x * y)) / sxx
    residuals = a * x - y
    dof = max(x.size - 1, 1)
    se = float(np.sqrt(float(residuals @ residuals) / dof / sxx))
    return a, se, residuals


def fit_bridge_law(pairs):
    """
    Fit R = a / w over (bridge width,
    resistance) pairs.

    Returns
    -------
    :class:`FitResult`
        Parameter ``a`` in K m / W.
    """
    widths, resistances = _validate_points(pairs, "Bridge law")
    if np.unique(widths).size != widths.size:
        raise ValidationError(
            "Bridge law fit needs distinct widths, "
            "got {}".format(widths.tolist()))
    a, se, residuals = _through_origin(1 / widths, resistances)
    return FitResult(
        parameters={"a": a},
        standard_errors={"a": se},
        r_squared=r_squared(resistances, resistances + residuals),
        residual_rms=float(np.sqrt(np.mean(residuals ** 2))),
        iterations=1,
        units={"a": "K m/W"},
        provenance={"model": "bridge_law", "points": int(widths.size)})


def exponential_ratio(gap_duration, tau):
    return 1 - np.exp(-np.asarray(gap_duration) / tau)


def hyperbolic_ratio(gap_duration, tau):
    return tau / np.asarray(gap_duration)


def fit_cyclic_ratios(points, model="exponential"):
    """
    One-parameter fit of a steady-state
    ratio law in the gap duration t_g.

    Parameters
    ----------
    points : :py:class:`list`
        ``(gap_duration, ratio)`` pairs.
    model : :py:class:`str`
        ``"exponential"`` for 1 - exp(-t_g / τ)
        (ripple over first pulse amplitude) or
        ``"hyperbolic"`` for τ / t_g (slow
        level over first pulse amplitude).

    Returns
    -------
    :class:`FitResult`
        Parameter ``tau`` in seconds.
    """
    gaps, ratios = _validate_points(points, "Cyclic ratio")
    if model == "hyperbolic":
        tau, se, residuals = _through_origin(1 / gaps, ratios)
        iterations, converged = 1, True
    elif model == "exponential":
        def residuals_and_jacobian(theta):
            tau = np.exp(theta[0])
            decay = np.exp(-gaps / tau)
            return ((1 - decay) - ratios,
                    (-(gaps / tau) * decay)[:, None])

        clipped = np.clip(ratios, 1e-6, 1 - 1e-6)
        tau0 = float(np.median(-gaps / np.log(1 - clipped)))
        theta, iterations, converged, residuals, jacobian = (
            levenberg_marquardt(residuals_and_jacobian, [np.log(tau0)]))
        if not converged:
            raise ConvergenceError(
                "Exponential ratio fit did not converge; last "
                "tau={:.6g} s".format(np.exp(theta[0])),
                last_iterate={"tau": float(np.exp(theta[0]))},
                iterations=iterations)
        tau = float(np.exp(theta[0]))
        covariance = _standard_errors(jacobian, residuals, 1)
        se = tau * float(np.sqrt(covariance[0, 0]))
    else:
        raise ValidationError(
            "Unknown ratio model '{}'; expected 'exponential' "
            "or 'hyperbolic'".format(model))
    return FitResult(
        parameters={"tau": tau},
        standard_errors={"tau": se},
        r_squared=r_squared(ratios, ratios + residuals),
        residual_rms=float(np.sqrt(np.mean(residuals ** 2))),
        iterations=iterations,
        converged=converged,
        units={"tau": "s"},
        provenance={"model": model, "points": int(gaps.size)})


def affine_fit(x, y):
    """
    Ordinary least squares y = slope x +
    intercept, via :func:`scipy.stats.linregress`.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 3:
        raise InsufficientDataError(
            "Affine fit needs at least 3 points, "
            "got {}".format(x.size))
    result = linregress(x, y)
    predicted = result.slope * x + result.intercept
    residuals = predicted - y
    return FitResult(
        parameters={"slope": float(result.slope),
                    "intercept": float(result.intercept)},
        standard_errors={"slope": float(result.stderr),
                         "intercept": float(result.intercept_stderr)},
        r_squared=float(result.rvalue ** 2),
        residual_rms=float(np.sqrt(np.mean(residuals ** 2))),
        iterations=1,
        provenance={"model": "affine"})


def synthesize_rc_trace(r_abs,
                        c_abs,
                        absorbed_power,
                        window=None,
                        sample_period=1e-4,
                        noise=0.0,
                        seed=None,
                        wall_temperature=None):
    """
    Synthetic absorber heating trace.

    Parameters
    ----------
    r_abs, c_abs : :py:class:`float`
        True resistance (K/W) and capacity (J/K).
    absorbed_power : :py:class:`float`
        W.
    window : :py:class:`float`
        Trace length, s. Default the fit window.
    noise : :py:class:`float`
        Standard deviation of additive Gaussian
        noise, relative to the temperature rise
        at the end of the window.
    seed : :py:class:`int` | :class:`numpy.random.Generator`
        Noise generator seed.
    """
    window = get_default("fit_window", window)
    wall_temperature = get_default("ambient_temperature", wall_temperature)
    time = sample_times(window, sample_period)
    rise = rc_step_response(time, r_abs, r_abs * c_abs, absorbed_power)
    if noise > 0:
        rng = np.random.default_rng(seed)
        rise = rise + rng.normal(0.0, noise * rise[-1], size=rise.size)
    return TraceSeries.from_arrays(
        time,
        wall_temperature + rise,
        np.full(time.size, wall_temperature),
        sample_period=sample_period)


def fit_rc_study(r_abs,
                 c_abs,
                 absorbed_power,
                 repetitions=100,
                 noise=0.01,
                 seed=0,
                 window=None,
                 sample_period=1e-4):
    """
    Monte Carlo accuracy study of
    :func:`fit_rc` on noisy synthetic traces.

    Each repetition draws from its own
    generator spawned from `seed`, so rows
    do not depend on evaluation order. The
    seed and repetition index are recorded in
    every fit's provenance and in the table.

    Returns
    -------
    :py:class:`polars.DataFrame`
        Columns ``rep``, ``seed``, ``r_abs``,
        ``c_abs``, ``tau``, ``r_squared``,
        ``iterations``.
    """
    children = np.random.SeedSequence(seed).spawn(repetitions)
    rows = []
    for rep, child in enumerate(children):
        trace = synthesize_rc_trace(r_abs, c_abs, absorbed_power,
                                    window=window,
                                    sample_period=sample_period,
                                    noise=noise,
                                    seed=np.random.default_rng(child))
        result = fit_rc(trace, absorbed_power, fit_window=window)
        result.provenance.update(seed=seed, rep=rep, noise=noise)
        logger.debug("study rep %d: %s", rep, result.provenance)
        rows.append({"rep": rep,
                     "seed": seed,
                     "r_abs": result["r_abs"],
                     "c_abs": result["c_abs"],
                     "tau": result["tau"],
                     "r_squared": result.r_squared,
                     "iterations": result.iterations})
    return pl.DataFrame(rows)
