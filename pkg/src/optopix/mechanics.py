#!/usr/bin/env python3

# filename: mechanics.py
# description: cavity pressure,
# blocked force and membrane
# deflection from air temperature

import logging
from dataclasses import dataclass, field

import numpy as np

from optopix.errors import (
    InvalidGeometryError,
    OutOfRangeError,
    ValidationError)
from optopix.model import GasState, MaterialProperties, PixelGeometry
from optopix.thermal import simulate_coupled, DriveSignal
from optopix.traces import (
    DISPLACEMENT,
    FORCE,
    PRESSURE,
    TraceSeries)

logger = logging.getLogger(__name__)

# coefficient of the linear membrane law
MEMBRANE_COEFFICIENT = 3.0 / 1280.0


@dataclass(frozen=True)
class MembraneModel:
    """
    Linear elastic membrane

    Parameters
    ----------
    youngs_modulus : :py:class:`float`
        E, Pa.
    poisson_ratio : :py:class:`float`
        ν, in [0, 0.5).
    thickness : :py:class:`float`
        h_m, m.
    radius : :py:class:`float`
        Clamped radius r, m.
    compliance_scale : :py:class:`float`
        Empirical multiplier on the deflection
        law; 1.0 is the bare model. See
        :func:`calibrate_compliance`.
    """
    youngs_modulus: float
    poisson_ratio: float
    thickness: float
    radius: float
    compliance_scale: float = 1.0

    def __post_init__(self):
        for name in ["youngs_modulus", "thickness",
                     "radius", "compliance_scale"]:
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValidationError(
                    "Membrane field {} must be strictly "
                    "positive, got {}".format(name, value),
                    field=name)
        if not 0 <= self.poisson_ratio < 0.5:
            raise ValidationError(
                "Poisson ratio must lie in [0, 0.5), "
                "got {}".format(self.poisson_ratio))

    @classmethod
    def from_material(cls,
                      material: MaterialProperties,
                      geometry: PixelGeometry,
                      compliance_scale: float = 1.0):
        if material.youngs_modulus is None or (
                material.poisson_ratio is None):
            raise ValidationError(
                "Material '{}' has no elastic constants "
                "and cannot form a membrane".format(material.name))
        return cls(youngs_modulus=material.youngs_modulus,
                   poisson_ratio=material.poisson_ratio,
                   thickness=geometry.membrane_thickness,
                   radius=geometry.cavity_radius,
                   compliance_scale=compliance_scale)

    @property
    def compliance(self):
        """
        Center deflection per unit gauge
        pressure, m/Pa.
        """
        return (self.compliance_scale * MEMBRANE_COEFFICIENT *
                (1 - self.poisson_ratio ** 2) * self.radius ** 4 /
                (self.youngs_modulus * self.thickness ** 3))

    def with_compliance_scale(self, compliance_scale):
        return MembraneModel(youngs_modulus=self.youngs_modulus,
                             poisson_ratio=self.poisson_ratio,
                             thickness=self.thickness,
                             radius=self.radius,
                             compliance_scale=compliance_scale)


@dataclass(frozen=True)
class MechanicsContext:
    """
    Everything needed to turn an air
    temperature trace into pressure,
    force and displacement.
    """
    geometry: PixelGeometry
    membrane: MembraneModel
    gas: GasState = field(default_factory=GasState)

    @classmethod
    def from_materials(cls,
                       geometry: PixelGeometry,
                       membrane_material: MaterialProperties,
                       gas: GasState = None,
                       compliance_scale: float = 1.0):
        if gas is None:
            gas = GasState()
        return cls(geometry=geometry,
                   membrane=MembraneModel.from_material(
                       membrane_material, geometry, compliance_scale),
                   gas=gas)

    def with_membrane(self, membrane):
        return MechanicsContext(geometry=self.geometry,
                                membrane=membrane,
                                gas=self.gas)


def isometric_pressure(gas: GasState, air_temperature):
    """
    Absolute cavity pressure at constant
    volume, P = ρ R_s T_air, in Pa.
    """
    air_temperature = np.asarray(air_temperature, dtype=float)
    if np.any(air_temperature <= 0):
        raise OutOfRangeError(
            "Air temperature must be positive kelvin, "
            "got min {}".format(air_temperature.min()))
    return (gas.density * gas.specific_gas_constant *
            air_temperature)[()]


def gauge_pressure(gas: GasState, air_temperature):
    return isometric_pressure(gas, air_temperature) - gas.ambient_pressure


def finite_volume_pressure(gas: GasState,
                           mean_air_temperature,
                           initial_volume,
                           current_volume):
    """
    Gauge pressure of a cavity whose volume
    changes from `initial_volume` to
    `current_volume`:
    P_atm ((T / T_atm)(V_0 / V) - 1).
    """
    if not (np.all(np.asarray(initial_volume) > 0) and
            np.all(np.asarray(current_volume) > 0)):
        raise InvalidGeometryError(
            "Cavity volumes must be positive, got "
            "{} and {}".format(initial_volume, current_volume))
    ratio = np.divide(mean_air_temperature, gas.ambient_temperature)
    return (gas.ambient_pressure *
            (ratio * np.divide(initial_volume, current_volume) - 1))


def blocked_force(geometry: PixelGeometry, gauge_pressure):
    """
    Force on the aperture A_p = π r²
    with the membrane held fixed, N.
    """
    return np.multiply(geometry.aperture_area, gauge_pressure)


def membrane_displacement(membrane: MembraneModel, gauge_pressure):
    """
    Center deflection of the membrane, m.
    Linear in pressure.
    """
    return np.multiply(membrane.compliance, gauge_pressure)


def air_temperature_from_force(geometry: PixelGeometry,
                               gas: GasState,
                               force,
                               reported_rise=None):
    """
    Invert a blocked-force measurement into
    absolute air temperature through the
    isometric ideal-gas law.

    Parameters
    ----------
    geometry : :class:`~optopix.model.PixelGeometry`
    gas : :class:`~optopix.model.GasState`
    force : :py:class:`float` | array
        Measured force, N; nonnegative.
    reported_rise : :py:class:`float`
        Independently reported air temperature
        rise, K. When given, a disagreement of
        more than 1% with the inverted rise is
        logged as a warning.

    Returns
    -------
    :py:class:`float` | array
        Air temperature, K.
    """
    force = np.asarray(force, dtype=float)
    if np.any(force < 0):
        raise OutOfRangeError(
            "Force must be nonnegative, got "
            "min {}".format(force.min()))
    pressure = force / geometry.aperture_area
    rise = gas.ambient_temperature * pressure / gas.ambient_pressure
    if reported_rise is not None:
        peak = float(np.max(rise))
        if abs(peak - reported_rise) > 1e-2 * abs(reported_rise):
            logger.warning(
                "Force-inverted air temperature rise %.3f K differs "
                "from the reported %.3f K (%.1f%%)",
                peak, reported_rise,
                100 * (peak / reported_rise - 1))
    return (gas.ambient_temperature + rise)[()]


def volume_coupled_pressure(context: MechanicsContext, air_temperature):
    """
    Gauge pressure with membrane volume
    feedback.

    The deflected membrane sweeps
    π r² z / 3, with z = compliance · P, so
    the finite-volume law becomes a quadratic
    in P whose physical root is returned.
    """
    gas = context.gas
    v0 = context.geometry.cavity_volume
    a = (np.pi * context.membrane.radius ** 2 *
         context.membrane.compliance / 3)
    b = v0 + a * gas.ambient_pressure
    c = gas.ambient_pressure * v0 * (
        np.divide(air_temperature, gas.ambient_temperature) - 1)
    return 2 * c / (b + np.sqrt(b ** 2 + 4 * a * c))


def attach_mechanics(trace: TraceSeries,
                     context: MechanicsContext,
                     pressure_model="isometric"):
    """
    Append gauge pressure, blocked force and
    membrane displacement columns to a
    thermal trace.

    Parameters
    ----------
    trace : :class:`~optopix.traces.TraceSeries`
        Trace with an air temperature column.
    context : :class:`MechanicsContext`
    pressure_model : :py:class:`str`
        ``"isometric"`` (default) or
        ``"finite_volume"`` for membrane
        volume feedback.
    """
    air = trace.air_temperature
    if pressure_model == "isometric":
        pressure = gauge_pressure(context.gas, air)
    elif pressure_model == "finite_volume":
        pressure = volume_coupled_pressure(context, air)
    else:
        raise ValidationError(
            "Unknown pressure model '{}'; expected "
            "'isometric' or 'finite_volume'".format(pressure_model))
    return trace.with_columns(**{
        PRESSURE: pressure,
        FORCE: blocked_force(context.geometry, pressure),
        DISPLACEMENT: membrane_displacement(context.membrane, pressure),
    })


def simulate_response(network,
                      context: MechanicsContext,
                      drive: DriveSignal,
                      duration=None,
                      sample_period=1e-4,
                      pressure_model="isometric"):
    """
    Thermal simulation followed by the
    mechanics chain; returns a trace with
    all six columns.
    """
    trace = simulate_coupled(network, drive,
                             duration=duration,
                             sample_period=sample_period)
    return attach_mechanics(trace, context, pressure_model)


def calibrate_compliance(network,
                         context: MechanicsContext,
                         absorbed_power,
                         pulse_duration,
                         target_displacement,
                         sample_period=1e-4):
    """
    Fit the membrane compliance scale to one
    measured operating point.

    A single pulse of `absorbed_power` is
    simulated for `pulse_duration`; the scale
    is chosen so that the displacement at the
    end of the pulse equals
    `target_displacement`.

    Returns
    -------
    :class:`MembraneModel`
        Copy of the context membrane with the
        calibrated compliance scale.
    """
    if not target_displacement > 0:
        raise ValidationError(
            "Target displacement must be positive, "
            "got {}".format(target_displacement))
    drive = DriveSignal([(0.0, absorbed_power)], pulse_duration)
    bare = context.with_membrane(
        context.membrane.with_compliance_scale(1.0))
    trace = simulate_response(network, bare, drive,
                              sample_period=sample_period)
    reached = float(trace.displacement[-1])
    if not reached > 0:
        raise ValidationError(
            "Calibration pulse produced no displacement "
            "({} m); check power and duration".format(reached))
    scale = target_displacement / reached
    logger.info("calibrated compliance scale %.4g "
                "(bare model reached %.4g m)", scale, reached)
    return context.membrane.with_compliance_scale(scale)
