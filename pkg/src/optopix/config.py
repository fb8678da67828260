#!/usr/bin/env python3

# filename: config.py
# description: JSON pixel configuration
# documents and preset lookup

import json
import logging
import os
from importlib import resources
from pathlib import Path

from optopix.defaults import get_default
from optopix.errors import ConfigError, ValidationError
from optopix.mechanics import MechanicsContext, MembraneModel
from optopix.model import (
    GasState,
    MaterialProperties,
    PixelGeometry,
    derive_network,
    material_presets)

logger = logging.getLogger(__name__)

CONFIG_DIR_VARIABLE = "OPTOPIX_CONFIG_DIR"
DEFAULT_PRESET = "paper_pixel_w020"

TOP_LEVEL_KEYS = {"name", "description", "geometry", "materials",
                  "gas", "optics", "network", "mechanics"}
GEOMETRY_KEYS = {"cavity_radius", "cavity_height", "bridge_width",
                 "bridge_length", "absorber_area", "absorber_thickness",
                 "membrane_thickness"}
MATERIAL_KEYS = {"name", "specific_heat", "density",
                 "thermal_conductivity_in_plane",
                 "thermal_conductivity_cross_plane",
                 "youngs_modulus", "poisson_ratio"}
GAS_KEYS = {"ambient_pressure", "ambient_temperature",
            "specific_gas_constant", "density",
            "thermal_conductivity", "specific_heat_cv"}
OPTICS_KEYS = {"absorbed_fraction"}
NETWORK_KEYS = {"r_abs", "c_abs", "r_air", "c_air", "r_air_wall",
                "wall_temperature", "eval_temperature"}
MECHANICS_KEYS = {"compliance_scale", "pressure_model"}


def _check_keys(section, data, allowed):
    if not isinstance(data, dict):
        raise ConfigError(
            "Config section '{}' must be a JSON object, "
            "got {}".format(section, type(data).__name__))
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(
            "Unknown keys in config section '{}': {}".format(
                section, sorted(unknown)),
            section=section)


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except json.JSONDecodeError as err:
        raise ConfigError(
            "Malformed JSON in {}: {}".format(path, err)) from err
    except OSError as err:
        raise ConfigError(
            "Could not read {}: {}".format(path, err)) from err


def resolve_preset(name):
    """
    Locate a configuration document.

    Parameters
    ----------
    name : :py:class:`str` | :class:`pathlib.Path`
        Existing file path, or a preset name
        with or without the ``.json`` suffix.

    Returns
    -------
    :class:`pathlib.Path` | Traversable
        The first match among the explicit
        path, ``$OPTOPIX_CONFIG_DIR`` and the
        packaged presets.
    """
    path = Path(name)
    if path.is_file():
        return path
    filename = path.name if path.suffix == ".json" else path.name + ".json"
    config_dir = os.environ.get(CONFIG_DIR_VARIABLE)
    if config_dir:
        candidate = Path(config_dir) / filename
        if candidate.is_file():
            return candidate
    packaged = resources.files("optopix") / "presets" / filename
    if packaged.is_file():
        return packaged
    raise ConfigError(
        "No configuration '{}' as a path, in ${} or among the "
        "packaged presets".format(name, CONFIG_DIR_VARIABLE))


def list_presets():
    presets = resources.files("optopix") / "presets"
    return sorted(entry.name[:-5] for entry in presets.iterdir()
                  if entry.name.endswith(".json"))


def material_from_spec(spec, section="materials"):
    """
    Material from a preset name, a material
    preset file, or an explicit property
    object.
    """
    if isinstance(spec, str):
        if spec in material_presets:
            return material_presets[spec]
        spec = _read_json(resolve_preset(spec))
    _check_keys(section, spec, MATERIAL_KEYS)
    try:
        return MaterialProperties(**spec)
    except TypeError as err:
        raise ConfigError(
            "Incomplete material in '{}': {}".format(section, err)) from err


class PixelConfig():
    """
    Configuration of one pixel design

    Parameters
    ----------
    geometry : :class:`~optopix.model.PixelGeometry`
    absorber : :class:`~optopix.model.MaterialProperties`
    membrane : :class:`~optopix.model.MaterialProperties`
    gas : :class:`~optopix.model.GasState`
    absorbed_fraction : :py:class:`float`
        Optical ε.
    network_overrides : :py:class:`dict`
        Measured network values replacing the
        derived ones (``r_abs``, ``c_abs``,
        ``r_air``, ``c_air``, ``r_air_wall``,
        ``wall_temperature``), plus an optional
        ``eval_temperature`` for the derivation.
    compliance_scale : :py:class:`float`
        Membrane compliance multiplier.
    pressure_model : :py:class:`str`
        ``isometric`` or ``finite_volume``.
    name : :py:class:`str`
    source : :py:class:`str`
        Where the document was read from.
    """

    def __init__(self,
                 geometry: PixelGeometry,
                 absorber: MaterialProperties,
                 membrane: MaterialProperties,
                 gas: GasState = None,
                 absorbed_fraction: float = None,
                 network_overrides: dict = None,
                 compliance_scale: float = 1.0,
                 pressure_model: str = "isometric",
                 name: str = "",
                 source: str = None):
        if gas is None:
            gas = GasState()
        if network_overrides is None:
            network_overrides = dict()
        if pressure_model not in ("isometric", "finite_volume"):
            raise ConfigError(
                "Pressure model must be 'isometric' or "
                "'finite_volume', got '{}'".format(pressure_model))
        self.geometry = geometry
        self.absorber = absorber
        self.membrane = membrane
        self.gas = gas
        self.absorbed_fraction = get_default("absorbed_fraction",
                                             absorbed_fraction)
        if not 0 < self.absorbed_fraction <= 1:
            raise ValidationError(
                "Absorbed fraction must lie in (0, 1], "
                "got {}".format(self.absorbed_fraction))
        self.network_overrides = dict(network_overrides)
        self.compliance_scale = compliance_scale
        self.pressure_model = pressure_model
        self.name = name
        self.source = source

    def network(self):
        """
        Derived thermal network with the
        measured overrides applied.
        """
        overrides = dict(self.network_overrides)
        eval_temperature = overrides.pop("eval_temperature", None)
        derived = derive_network(self.geometry, self.absorber, self.gas,
                                 eval_temperature=eval_temperature)
        if not overrides:
            return derived
        return derived.with_overrides(**overrides)

    def mechanics_context(self):
        return MechanicsContext(
            geometry=self.geometry,
            membrane=MembraneModel.from_material(
                self.membrane, self.geometry, self.compliance_scale),
            gas=self.gas)

    def with_compliance_scale(self, compliance_scale):
        values = self.__dict__.copy()
        values["compliance_scale"] = compliance_scale
        return PixelConfig(**values)

    @classmethod
    def from_dict(cls, data, source=None):
        _check_keys("<root>", data, TOP_LEVEL_KEYS)
        for required in ["geometry", "materials"]:
            if required not in data:
                raise ConfigError(
                    "Config is missing section '{}'".format(required))
        geometry_data = data["geometry"]
        _check_keys("geometry", geometry_data, GEOMETRY_KEYS)
        if "bridge_length" not in geometry_data:
            geometry_data = dict(geometry_data,
                                 bridge_length=get_default("bridge_length"))
        try:
            geometry = PixelGeometry(**geometry_data)
        except TypeError as err:
            raise ConfigError(
                "Incomplete geometry: {}".format(err)) from err

        materials = data["materials"]
        _check_keys("materials", materials, {"absorber", "membrane"})
        absorber = material_from_spec(materials.get("absorber", "pgs"),
                                      "materials.absorber")
        membrane = material_from_spec(
            materials.get("membrane", "ecoflex0010"), "materials.membrane")

        gas_data = data.get("gas", dict())
        _check_keys("gas", gas_data, GAS_KEYS)
        optics = data.get("optics", dict())
        _check_keys("optics", optics, OPTICS_KEYS)
        network = data.get("network", dict())
        _check_keys("network", network, NETWORK_KEYS)
        mechanics = data.get("mechanics", dict())
        _check_keys("mechanics", mechanics, MECHANICS_KEYS)

        return cls(geometry=geometry,
                   absorber=absorber,
                   membrane=membrane,
                   gas=GasState(**gas_data),
                   absorbed_fraction=optics.get("absorbed_fraction"),
                   network_overrides=network,
                   compliance_scale=mechanics.get("compliance_scale", 1.0),
                   pressure_model=mechanics.get("pressure_model",
                                                "isometric"),
                   name=data.get("name", ""),
                   source=source)

    def to_dict(self):
        geometry = {key: getattr(self.geometry, key)
                    for key in sorted(GEOMETRY_KEYS)}
        gas = {key: getattr(self.gas, key) for key in sorted(GAS_KEYS)}
        result = {"name": self.name,
                  "geometry": geometry,
                  "materials": {"absorber": self.absorber.to_dict(),
                                "membrane": self.membrane.to_dict()},
                  "gas": gas,
                  "optics": {"absorbed_fraction": self.absorbed_fraction},
                  "mechanics": {"compliance_scale": self.compliance_scale,
                                "pressure_model": self.pressure_model}}
        if self.network_overrides:
            result["network"] = dict(self.network_overrides)
        return result

    def __repr__(self):
        return "{} '{}'".format(type(self).__name__,
                                self.name or self.source)


def load_config(name=None):
    """
    Read a pixel configuration by path or
    preset name; default
    ``paper_pixel_w020``.
    """
    if name is None:
        name = DEFAULT_PRESET
    path = resolve_preset(name)
    data = _read_json(path)
    logger.debug("loaded configuration from %s", path)
    return PixelConfig.from_dict(data, source=str(path))
