#!/usr/bin/env python3
# *_* coding: utf-8 *_*

"""
Physical domain types for a single
optotactile pixel, and derivation of
its lumped thermal network.

All quantities are strict SI
(s, m, K, W, J, Pa). Temperatures
are absolute.
"""

import logging
from collections import namedtuple
from dataclasses import dataclass, field, replace

import numpy as np

from optopix.defaults import get_default
from optopix.errors import (
    InvalidGeometryError,
    OutOfRangeError,
    ValidationError)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConstantConductivity:
    """
    Temperature-independent thermal
    conductivity, W/(m K).
    """
    value: float

    def __call__(self, temperature):
        return self.value * np.ones_like(
            np.asarray(temperature, dtype=float))[()]

    def to_dict(self):
        return self.value


@dataclass(frozen=True)
class InverseTemperatureConductivity:
    """
    Conductivity falling as 1/T,
    k(T) = coefficient / T, with
    the coefficient in W/m.
    """
    coefficient: float

    def __call__(self, temperature):
        return self.coefficient / np.asarray(
            temperature, dtype=float)[()]

    def to_dict(self):
        return {"inverse_temperature": self.coefficient}


def conductivity_from_spec(spec):
    """
    Build a conductivity law from
    its config-file representation:
    a plain number or a one-key dict
    ``{"inverse_temperature": b}``.
    """
    if isinstance(spec, (ConstantConductivity,
                         InverseTemperatureConductivity)):
        return spec
    if isinstance(spec, (int, float)):
        return ConstantConductivity(float(spec))
    if isinstance(spec, dict) and set(spec) == {"inverse_temperature"}:
        return InverseTemperatureConductivity(
            float(spec["inverse_temperature"]))
    raise ValidationError(
        "Unsupported thermal conductivity "
        "specification {}".format(spec))


@dataclass(frozen=True)
class PixelGeometry:
    """
    Physical dimensions of one pixel

    Parameters
    ----------
    cavity_radius : :py:class:`float`
        Cavity (and aperture) radius, m.
    cavity_height : :py:class:`float`
        Cavity height H, m.
    bridge_width : :py:class:`float`
        Width w of the absorber bridges, m.
    absorber_area : :py:class:`float`
        Photoabsorber surface area A_s, m².
    absorber_thickness : :py:class:`float`
        Photoabsorber thickness h, m.
    membrane_thickness : :py:class:`float`
        Elastic membrane thickness h_m, m.
    bridge_length : :py:class:`float`
        Characteristic heat-transfer length L
        of the bridges, m. Defaults to the
        absorber-edge-to-wall distance in
        :data:`~optopix.defaults.model_defaults`.
    """
    cavity_radius: float
    cavity_height: float
    bridge_width: float
    absorber_area: float
    absorber_thickness: float
    membrane_thickness: float
    bridge_length: float = field(
        default_factory=lambda: get_default("bridge_length"))

    def __post_init__(self):
        for name in ["cavity_radius", "cavity_height",
                     "bridge_width", "absorber_area",
                     "absorber_thickness",
                     "membrane_thickness", "bridge_length"]:
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise InvalidGeometryError(
                    "Pixel geometry field {} must be "
                    "strictly positive, got {}"
                    "".format(name, value),
                    field=name)
        if self.bridge_width > self.cavity_radius:
            raise InvalidGeometryError(
                "Bridge width {} m exceeds cavity "
                "radius {} m".format(self.bridge_width,
                                     self.cavity_radius),
                field="bridge_width")
        footprint = 4 * np.pi * self.cavity_radius ** 2
        if self.absorber_area > footprint:
            raise InvalidGeometryError(
                "Absorber area {} m² does not fit "
                "the pixel footprint {} m²"
                "".format(self.absorber_area, footprint),
                field="absorber_area")

    @property
    def aperture_area(self):
        return np.pi * self.cavity_radius ** 2

    @property
    def cavity_volume(self):
        return self.aperture_area * self.cavity_height

    @property
    def absorber_volume(self):
        return self.absorber_area * self.absorber_thickness

    def with_width(self, bridge_width):
        return replace(self, bridge_width=bridge_width)


def paper_geometry(bridge_width=0.4e-3, **kwargs):
    """
    Geometry of the fabricated pixels:
    3 mm diameter, 1 mm high cavity,
    2 mm x 1.5 mm absorber of 16.7 µm
    pyrolytic graphite, 0.25 mm membrane.
    """
    values = dict(
        cavity_radius=1.5e-3,
        cavity_height=1.0e-3,
        bridge_width=bridge_width,
        absorber_area=2.0e-3 * 1.5e-3,
        absorber_thickness=16.7e-6,
        membrane_thickness=0.25e-3)
    values.update(kwargs)
    return PixelGeometry(**values)


@dataclass(frozen=True)
class MaterialProperties:
    """
    Bulk material parameters

    Parameters
    ----------
    specific_heat : :py:class:`float`
        J/(kg K).
    density : :py:class:`float`
        kg/m³.
    thermal_conductivity_in_plane : callable
        k_xy(T) in W/(m K); see
        :class:`ConstantConductivity` and
        :class:`InverseTemperatureConductivity`.
    thermal_conductivity_cross_plane : :py:class:`float`
        W/(m K).
    youngs_modulus : :py:class:`float`
        Pa; membrane materials only.
    poisson_ratio : :py:class:`float`
        Dimensionless; membrane materials only.
    name : :py:class:`str`
        Label used in reports.
    """
    specific_heat: float
    density: float
    thermal_conductivity_in_plane: object
    thermal_conductivity_cross_plane: float
    youngs_modulus: float = None
    poisson_ratio: float = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(
            self, "thermal_conductivity_in_plane",
            conductivity_from_spec(
                self.thermal_conductivity_in_plane))
        if not (self.specific_heat > 0 and self.density > 0):
            raise ValidationError(
                "Material {} needs positive specific heat "
                "and density, got {} and {}"
                "".format(self.name, self.specific_heat,
                          self.density))
        if self.poisson_ratio is not None and not (
                0 <= self.poisson_ratio < 0.5):
            raise ValidationError(
                "Poisson ratio must lie in [0, 0.5), "
                "got {}".format(self.poisson_ratio))
        if self.youngs_modulus is not None and not (
                self.youngs_modulus > 0):
            raise ValidationError(
                "Young's modulus must be positive, "
                "got {}".format(self.youngs_modulus))
        grid = np.linspace(get_default("conductivity_valid_min"),
                           get_default("conductivity_valid_max"),
                           65)
        k_grid = np.asarray(
            self.thermal_conductivity_in_plane(grid), dtype=float)
        if not np.all(np.isfinite(k_grid) & (k_grid > 0)):
            raise ValidationError(
                "In-plane conductivity of material {} "
                "must be positive over the validity "
                "range".format(self.name))

    def conductivity_in_plane(self, temperature):
        return float(self.thermal_conductivity_in_plane(temperature))

    def to_dict(self):
        result = dict(
            specific_heat=self.specific_heat,
            density=self.density,
            thermal_conductivity_in_plane=(
                self.thermal_conductivity_in_plane.to_dict()),
            thermal_conductivity_cross_plane=(
                self.thermal_conductivity_cross_plane))
        if self.youngs_modulus is not None:
            result["youngs_modulus"] = self.youngs_modulus
        if self.poisson_ratio is not None:
            result["poisson_ratio"] = self.poisson_ratio
        return result


PGS = MaterialProperties(
    specific_heat=850.0,
    density=1962.0,  # measured; manufacturer lists 2130
    thermal_conductivity_in_plane=InverseTemperatureConductivity(3.6e5),
    thermal_conductivity_cross_plane=15.0,
    name="pgs")

ECOFLEX_00_10 = MaterialProperties(
    specific_heat=1000.0,
    density=1060.0,
    thermal_conductivity_in_plane=29.0,  # as tabulated
    thermal_conductivity_cross_plane=29.0,
    youngs_modulus=50e3,
    poisson_ratio=0.49,
    name="ecoflex0010")

POLYSTYRENE = MaterialProperties(
    specific_heat=1460.0,
    density=970.0,
    thermal_conductivity_in_plane=0.092,
    thermal_conductivity_cross_plane=0.092,
    youngs_modulus=750e3,
    poisson_ratio=0.49,
    name="polystyrene")

ACRYLIC = MaterialProperties(
    specific_heat=1470.0,
    density=1190.0,
    thermal_conductivity_in_plane=0.18,
    thermal_conductivity_cross_plane=0.18,
    name="acrylic")

material_presets = {
    material.name: material
    for material in [PGS, ECOFLEX_00_10, POLYSTYRENE, ACRYLIC]
}


def get_material(name):
    try:
        return material_presets[name]
    except KeyError:
        raise ValidationError(
            "Unknown material preset '{}'. "
            "Available: {}".format(
                name, sorted(material_presets))) from None


@dataclass(frozen=True)
class GasState:
    """
    Ambient state of the cavity gas.

    `density` defaults to the ideal-gas
    value at the ambient pressure and
    temperature. Any explicit density must
    agree with P = ρ R_s T to within the
    ``ideal_gas_tolerance`` default (0.5%).
    """
    ambient_pressure: float = field(
        default_factory=lambda: get_default("ambient_pressure"))
    ambient_temperature: float = field(
        default_factory=lambda: get_default("ambient_temperature"))
    specific_gas_constant: float = field(
        default_factory=lambda: get_default("specific_gas_constant"))
    density: float = None
    thermal_conductivity: float = field(
        default_factory=lambda: get_default("air_thermal_conductivity"))
    specific_heat_cv: float = field(
        default_factory=lambda: get_default("air_specific_heat_cv"))

    def __post_init__(self):
        for name in ["ambient_pressure", "ambient_temperature",
                     "specific_gas_constant",
                     "thermal_conductivity", "specific_heat_cv"]:
            if not getattr(self, name) > 0:
                raise ValidationError(
                    "Gas field {} must be positive, "
                    "got {}".format(name, getattr(self, name)))
        ideal_density = self.ambient_pressure / (
            self.specific_gas_constant * self.ambient_temperature)
        if self.density is None:
            object.__setattr__(self, "density", ideal_density)
        mismatch = abs(self.density / ideal_density - 1)
        if mismatch > get_default("ideal_gas_tolerance"):
            raise ValidationError(
                "Gas density {} kg/m³ is inconsistent with "
                "the ideal gas law at ambient conditions "
                "(expected {:.6g}, mismatch {:.3%})"
                "".format(self.density, ideal_density, mismatch))


@dataclass(frozen=True)
class OpticalInput:
    incident_power: float
    absorbed_fraction: float = field(
        default_factory=lambda: get_default("absorbed_fraction"))

    def __post_init__(self):
        if not self.incident_power >= 0:
            raise ValidationError(
                "Incident power must be nonnegative, "
                "got {}".format(self.incident_power))
        if not (0 < self.absorbed_fraction <= 1):
            raise ValidationError(
                "Absorbed fraction must lie in (0, 1], "
                "got {}".format(self.absorbed_fraction))

    @property
    def absorbed_power(self):
        return self.incident_power * self.absorbed_fraction

    @classmethod
    def from_losses(cls,
                    incident_power,
                    window_transmission,
                    absorber_absorptance,
                    other_losses=1.0):
        """
        Absorbed fraction as the product of
        window transmission, absorber
        absorptance and any remaining
        (multiplicative) optical losses.
        """
        return cls(incident_power=incident_power,
                   absorbed_fraction=(window_transmission *
                                      absorber_absorptance *
                                      other_losses))


@dataclass(frozen=True)
class ThermalNetwork:
    """
    Lumped two-node thermal network

    The absorber node (capacity `c_abs`)
    loses heat to the wall through `r_abs`
    and to the air node through `r_air`.
    The air node (capacity `c_air`) loses
    heat to the wall through `r_air_wall`,
    which defaults to `r_air`.

    `tau_abs` and `tau_air` are derived
    on construction and cannot be passed in.
    """
    r_abs: float
    r_air: float
    c_abs: float
    c_air: float
    wall_temperature: float = field(
        default_factory=lambda: get_default("ambient_temperature"))
    r_air_wall: float = None
    tau_abs: float = field(init=False)
    tau_air: float = field(init=False)

    def __post_init__(self):
        if self.r_air_wall is None:
            object.__setattr__(self, "r_air_wall", self.r_air)
        for name in ["r_abs", "r_air", "c_abs", "c_air",
                     "r_air_wall", "wall_temperature"]:
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValidationError(
                    "Thermal network field {} must be "
                    "strictly positive, got {}"
                    "".format(name, value),
                    field=name)
        object.__setattr__(self, "tau_abs", self.r_abs * self.c_abs)
        object.__setattr__(self, "tau_air", self.r_air * self.c_air)

    @property
    def symmetric_air_path(self):
        return self.r_air_wall == self.r_air

    @property
    def air_relaxation_rate(self):
        """
        Decay rate of the air node with the
        absorber held fixed, 1/s. Equals
        2/tau_air for the symmetric network.
        """
        return (1 / self.r_air + 1 / self.r_air_wall) / self.c_air

    @property
    def air_gain(self):
        """
        Static fraction of an absorber
        temperature rise seen by the air.
        """
        return (1 / self.r_air) / (
            1 / self.r_air + 1 / self.r_air_wall)

    def system_matrix(self):
        """
        Matrix A of d/dt [u, y] = A [u, y] + b P
        for rises u, y above the wall.
        """
        return np.array([
            [-(1 / self.r_abs + 1 / self.r_air) / self.c_abs,
             1 / (self.r_air * self.c_abs)],
            [1 / (self.r_air * self.c_air),
             -self.air_relaxation_rate]])

    def modal_time_constants(self):
        eigenvalues = np.linalg.eigvals(self.system_matrix())
        return np.sort(1 / np.abs(np.real(eigenvalues)))

    def fastest_time_constant(self):
        return float(min(self.tau_abs,
                         self.tau_air,
                         self.modal_time_constants()[0]))

    def with_overrides(self, **kwargs):
        """
        Copy with some of the free fields
        replaced; derived time constants
        are recomputed.
        """
        values = dict(r_abs=self.r_abs, r_air=self.r_air,
                      c_abs=self.c_abs, c_air=self.c_air,
                      wall_temperature=self.wall_temperature,
                      r_air_wall=(None if self.symmetric_air_path
                                  else self.r_air_wall))
        values.update(kwargs)
        return ThermalNetwork(**values)


def derive_network(geometry: PixelGeometry,
                   absorber: MaterialProperties,
                   gas: GasState = None,
                   eval_temperature: float = None,
                   wall_temperature: float = None):
    """
    Lumped thermal parameters from
    geometry and materials.

    Parameters
    ----------
    geometry : :class:`PixelGeometry`
        Pixel dimensions.
    absorber : :class:`MaterialProperties`
        Photoabsorber material.
    gas : :class:`GasState`
        Cavity gas. Default ambient air.
    eval_temperature : :py:class:`float`
        Temperature (K) at which the in-plane
        conductivity is evaluated. Default
        ``eval_temperature`` from the defaults.
    wall_temperature : :py:class:`float`
        Reservoir temperature; defaults to
        the gas ambient temperature.

    Returns
    -------
    :class:`ThermalNetwork`
        Symmetric-air-path network.
    """
    if gas is None:
        gas = GasState()
    eval_temperature = get_default("eval_temperature",
                                   eval_temperature)
    t_min = get_default("conductivity_valid_min")
    t_max = get_default("conductivity_valid_max")
    if not (t_min <= eval_temperature <= t_max):
        raise OutOfRangeError(
            "Evaluation temperature {} K lies outside "
            "the conductivity validity range "
            "[{}, {}] K".format(eval_temperature, t_min, t_max),
            eval_temperature=eval_temperature)
    if wall_temperature is None:
        wall_temperature = gas.ambient_temperature

    k_xy = absorber.conductivity_in_plane(eval_temperature)
    r_abs = geometry.bridge_length / (
        k_xy * geometry.bridge_width * geometry.absorber_thickness)
    r_air = geometry.cavity_height / (
        gas.thermal_conductivity * geometry.absorber_area)
    c_abs = (geometry.absorber_volume * absorber.density *
             absorber.specific_heat)
    c_air = geometry.cavity_volume * gas.density * gas.specific_heat_cv
    logger.debug("derived network r_abs=%.4g K/W r_air=%.4g K/W "
                 "c_abs=%.4g J/K c_air=%.4g J/K",
                 r_abs, r_air, c_abs, c_air)
    return ThermalNetwork(r_abs=r_abs,
                          r_air=r_air,
                          c_abs=c_abs,
                          c_air=c_air,
                          wall_temperature=wall_temperature)


def decoupling_ratio(network: ThermalNetwork):
    """
    Ratio r_abs / r_air. Values below the
    ``decoupling_threshold`` default admit
    the closed-form absorber solution.
    """
    return network.r_abs / network.r_air


def closed_form_admissible(network: ThermalNetwork, threshold=None):
    threshold = get_default("decoupling_threshold", threshold)
    return decoupling_ratio(network) < threshold


BridgeRow = namedtuple("BridgeRow", ["width", "r_abs", "c_abs", "tau"])

# measured absorber parameters per bridge width (m, K/W, J/K, s)
MEASURED_BRIDGE_ROWS = (
    BridgeRow(0.20e-3, 382.0, 81e-6, 31e-3),
    BridgeRow(0.25e-3, 269.0, 106e-6, 29e-3),
    BridgeRow(0.40e-3, 184.0, 126e-6, 23e-3),
    BridgeRow(0.55e-3, 145.0, 99e-6, 14e-3),
    BridgeRow(0.75e-3, 95.0, 102e-6, 10e-3),
)

# air-to-wall resistance of the fabricated cavity, K/W
MEASURED_AIR_WALL_RESISTANCE = 660.0


def measured_row(width):
    for row in MEASURED_BRIDGE_ROWS:
        if np.isclose(row.width, width, rtol=1e-6, atol=0):
            return row
    raise ValidationError(
        "No measured parameters for bridge width "
        "{} m. Available: {}".format(
            width, [row.width for row in MEASURED_BRIDGE_ROWS]))


def measured_network(width,
                     geometry: PixelGeometry = None,
                     gas: GasState = None,
                     r_air_wall=MEASURED_AIR_WALL_RESISTANCE,
                     **kwargs):
    """
    Network with the measured absorber
    resistance and capacity for one of
    the characterized bridge widths; the
    air node is derived from geometry.
    """
    row = measured_row(width)
    if geometry is None:
        geometry = paper_geometry(bridge_width=row.width)
    derived = derive_network(geometry, PGS, gas)
    values = dict(r_air_wall=r_air_wall)
    values.update(kwargs)
    return derived.with_overrides(r_abs=row.r_abs,
                                  c_abs=row.c_abs,
                                  **values)
