#!/usr/bin/env python3

# filename: energy.py
# description: stroke work, conversion
# efficiencies and the dimensional
# efficiency-loss scaling law

import logging
from dataclasses import asdict, dataclass, fields

import numpy as np

from optopix.defaults import get_default
from optopix.errors import ValidationError
from optopix.mechanics import air_temperature_from_force
from optopix.model import GasState, PixelGeometry

logger = logging.getLogger(__name__)

SCALING_EXPONENTS = {"surface": 1, "volume": 2}


@dataclass
class EfficiencyReport:
    """
    Energy figures of one operating point.
    Fields not computed by a given
    operation are None.

    Parameters
    ----------
    stroke_work : :py:class:`float`
        W_s = F d / 2, J.
    stroke_power : :py:class:`float`
        W_s / t_p, W.
    stroke_efficiency : :py:class:`float`
        Stroke power over absorbed power.
    heat_to_gas_efficiency : :py:class:`float`
        Air internal energy change over
        absorbed energy.
    thermo_mech_efficiency : :py:class:`float`
        Stroke work over air internal
        energy change.
    air_energy : :py:class:`float`
        Air internal energy change, J.
    air_temp_rise : :py:class:`float`
        Air temperature rise, K.
    specific_heat_basis : :py:class:`str`
        Which air specific heat the gas
        figures use.
    """
    stroke_work: float = None
    stroke_power: float = None
    stroke_efficiency: float = None
    heat_to_gas_efficiency: float = None
    thermo_mech_efficiency: float = None
    air_energy: float = None
    air_temp_rise: float = None
    specific_heat_basis: str = None

    def __post_init__(self):
        for item in fields(self):
            value = getattr(self, item.name)
            if item.name == "specific_heat_basis" or value is None:
                continue
            if not value >= 0:
                raise ValidationError(
                    "Efficiency report field '{}' must be "
                    "nonnegative, got {}".format(item.name, value))
        if (self.stroke_efficiency is not None and
                self.heat_to_gas_efficiency is not None and
                self.stroke_efficiency >
                self.heat_to_gas_efficiency * (1 + 1e-12)):
            raise ValidationError(
                "Stroke efficiency {} exceeds heat-to-gas "
                "efficiency {}".format(self.stroke_efficiency,
                                       self.heat_to_gas_efficiency))

    def merge(self, other):
        """
        Combine two partial reports; fields
        set in `other` win.
        """
        values = asdict(self)
        for item in fields(other):
            value = getattr(other, item.name)
            if value is not None:
                values[item.name] = value
        return EfficiencyReport(**values)

    def to_dict(self):
        return {key: value for key, value in asdict(self).items()
                if value is not None}


def stroke_metrics(peak_force,
                   peak_displacement,
                   pulse_duration,
                   incident_power,
                   absorbed_fraction=None):
    """
    Stroke work, power and efficiency of a
    single pulse.

    Parameters
    ----------
    peak_force : :py:class:`float`
        Blocked force, N.
    peak_displacement : :py:class:`float`
        Free displacement, m.
    pulse_duration : :py:class:`float`
        t_p, s.
    incident_power : :py:class:`float`
        P_L, W.
    absorbed_fraction : :py:class:`float`
        ε. Default 0.66.
    """
    absorbed_fraction = get_default("absorbed_fraction", absorbed_fraction)
    if not (peak_force >= 0 and peak_displacement >= 0):
        raise ValidationError(
            "Force and displacement must be nonnegative, "
            "got {} and {}".format(peak_force, peak_displacement))
    if not (pulse_duration > 0 and incident_power > 0):
        raise ValidationError(
            "Pulse duration and power must be positive, "
            "got {} and {}".format(pulse_duration, incident_power))
    work = peak_force * peak_displacement / 2
    power = work / pulse_duration
    return EfficiencyReport(
        stroke_work=work,
        stroke_power=power,
        stroke_efficiency=power / (absorbed_fraction * incident_power))


def gas_energy_metrics(geometry: PixelGeometry,
                       gas: GasState,
                       peak_force,
                       specific_heat_cv=None,
                       pulse_duration=None,
                       absorbed_power=None,
                       cavity_volume=None,
                       stroke: EfficiencyReport = None,
                       reported_rise=None):
    """
    Heat-to-gas and thermomechanical
    conversion efficiencies from a peak
    blocked force.

    The air temperature rise is inverted from
    the force; the air internal energy change
    is c_v ρ V ΔT.

    Parameters
    ----------
    geometry : :class:`~optopix.model.PixelGeometry`
    gas : :class:`~optopix.model.GasState`
    peak_force : :py:class:`float`
        N.
    specific_heat_cv : :py:class:`float`
        Air specific heat, J/(kg K). Default
        the constant-volume value.
    pulse_duration : :py:class:`float`
        s.
    absorbed_power : :py:class:`float`
        W.
    cavity_volume : :py:class:`float`
        Gas volume, m³. Default the geometric
        cavity volume.
    stroke : :class:`EfficiencyReport`
        Output of :func:`stroke_metrics`; when
        given, the thermomechanical efficiency
        is filled in.
    reported_rise : :py:class:`float`
        Independently reported air temperature
        rise, K, checked against the inversion.
    """
    if not (pulse_duration is not None and pulse_duration > 0 and
            absorbed_power is not None and absorbed_power > 0):
        raise ValidationError(
            "Pulse duration and absorbed power must be "
            "positive, got {} and {}".format(pulse_duration,
                                             absorbed_power))
    if specific_heat_cv is None:
        specific_heat_cv = gas.specific_heat_cv
        basis = "cv"
    else:
        basis = ("cv" if np.isclose(specific_heat_cv,
                                    get_default("air_specific_heat_cv"))
                 else "custom")
    if cavity_volume is None:
        cavity_volume = geometry.cavity_volume
    rise = float(air_temperature_from_force(
        geometry, gas, peak_force,
        reported_rise=reported_rise)) - gas.ambient_temperature
    air_energy = specific_heat_cv * gas.density * cavity_volume * rise
    report = EfficiencyReport(
        air_energy=air_energy,
        air_temp_rise=rise,
        heat_to_gas_efficiency=air_energy / (absorbed_power *
                                             pulse_duration),
        specific_heat_basis=basis)
    if stroke is not None:
        report.thermo_mech_efficiency = (
            stroke.stroke_work / air_energy if air_energy > 0 else 0.0)
        report = stroke.merge(report)
    return report


def operating_point_report(geometry: PixelGeometry,
                           gas: GasState,
                           peak_force,
                           peak_displacement,
                           pulse_duration,
                           incident_power,
                           absorbed_fraction=None,
                           specific_heat_cv=None,
                           cavity_volume=None,
                           reported_rise=None):
    """
    Full efficiency chain of one operating
    point; the stroke efficiency equals the
    product of the heat-to-gas and
    thermomechanical efficiencies.
    """
    absorbed_fraction = get_default("absorbed_fraction", absorbed_fraction)
    stroke = stroke_metrics(peak_force, peak_displacement,
                            pulse_duration, incident_power,
                            absorbed_fraction)
    return gas_energy_metrics(geometry, gas, peak_force,
                              specific_heat_cv=specific_heat_cv,
                              pulse_duration=pulse_duration,
                              absorbed_power=(absorbed_fraction *
                                              incident_power),
                              cavity_volume=cavity_volume,
                              stroke=stroke,
                              reported_rise=reported_rise)


def scaling_efficiency_loss(length_scale,
                            reference_scale,
                            reference_loss,
                            heating_mode="surface"):
    """
    Efficiency loss at characteristic size L,
    anchored at a reference size:
    loss_ref (L_ref / L)^α with α = 1 for
    surface heating and 2 for volume heating.
    """
    if heating_mode not in SCALING_EXPONENTS:
        raise ValidationError(
            "Heating mode must be one of {}, got '{}'".format(
                sorted(SCALING_EXPONENTS), heating_mode))
    if not (np.all(np.asarray(length_scale) > 0) and reference_scale > 0):
        raise ValidationError(
            "Length scales must be positive, got {} and {}".format(
                length_scale, reference_scale))
    if not 0 < reference_loss < 1:
        raise ValidationError(
            "Reference loss must lie in (0, 1), "
            "got {}".format(reference_loss))
    exponent = SCALING_EXPONENTS[heating_mode]
    return reference_loss * np.power(
        np.divide(reference_scale, length_scale), exponent)


def carnot_efficiency(hot_temperature, cold_temperature):
    """
    Reversible limit 1 - T_cold / T_hot.
    """
    if not (cold_temperature > 0 and hot_temperature >= cold_temperature):
        raise ValidationError(
            "Need 0 < T_cold <= T_hot, got T_hot={} and "
            "T_cold={}".format(hot_temperature, cold_temperature))
    return 1 - cold_temperature / hot_temperature


def scaled_efficiency(length_scale,
                      reference_scale,
                      reference_efficiency,
                      hot_temperature,
                      cold_temperature,
                      heating_mode="surface"):
    """
    Efficiency at size L: the Carnot limit
    minus the scaled loss, where the loss at
    the reference size is the gap between the
    Carnot limit and `reference_efficiency`.
    Clipped at zero.
    """
    limit = carnot_efficiency(hot_temperature, cold_temperature)
    loss = scaling_efficiency_loss(length_scale, reference_scale,
                                   limit - reference_efficiency,
                                   heating_mode)
    return np.maximum(limit - loss, 0.0)
