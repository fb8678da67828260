#!/usr/bin/env python3

import json

import pytest

from optopix.config import (
    CONFIG_DIR_VARIABLE,
    PixelConfig,
    list_presets,
    load_config,
    material_from_spec,
    resolve_preset)
from optopix.defaults import get_default
from optopix.errors import ConfigError, ValidationError
from optopix.model import PGS


def test_get_default():
    assert get_default("dead_time") == 0.5e-3
    assert get_default("dead_time", 1e-3) == 1e-3
    with pytest.raises(KeyError):
        get_default("warp_factor")


def test_packaged_presets():
    presets = list_presets()
    for width in ["020", "025", "040", "055", "075"]:
        assert "paper_pixel_w{}".format(width) in presets
    assert "pgs" in presets


def test_default_preset_network(paper_config):
    network = paper_config.network()
    assert network.r_abs == 382.0
    assert network.c_abs == 81e-6
    assert network.r_air_wall == 660.0
    assert paper_config.absorbed_fraction == 0.66
    assert paper_config.mechanics_context().membrane.compliance_scale == \
        pytest.approx(10.73)
    assert load_config().name == paper_config.name


def test_material_specs():
    assert material_from_spec("pgs") is PGS
    custom = material_from_spec({"specific_heat": 800.0, "density": 2000.0,
                                 "thermal_conductivity_in_plane": 1000.0,
                                 "thermal_conductivity_cross_plane": 5.0})
    assert custom.conductivity_in_plane(500.0) == 1000.0
    with pytest.raises(ConfigError):
        material_from_spec({"density": 2000.0})


def test_config_document_round_trip(paper_config):
    rebuilt = PixelConfig.from_dict(paper_config.to_dict())
    assert rebuilt.network() == paper_config.network()
    assert rebuilt.geometry == paper_config.geometry


def write_config(directory, name, document):
    path = directory / "{}.json".format(name)
    path.write_text(json.dumps(document))
    return path


def test_config_directory_lookup(tmp_path, monkeypatch, paper_config):
    document = paper_config.to_dict()
    document["name"] = "lab_pixel"
    document["mechanics"]["compliance_scale"] = 2.0
    write_config(tmp_path, "lab_pixel", document)
    monkeypatch.setenv(CONFIG_DIR_VARIABLE, str(tmp_path))
    config = load_config("lab_pixel")
    assert config.compliance_scale == 2.0
    assert resolve_preset("lab_pixel.json").parent == tmp_path


def test_unknown_keys_rejected(tmp_path, paper_config):
    document = paper_config.to_dict()
    document["gas"]["humidity"] = 0.5
    path = write_config(tmp_path, "humid", document)
    with pytest.raises(ConfigError) as info:
        load_config(str(path))
    assert info.value.exit_code == 2
    assert "gas" in info.value.diagnostic()


def test_missing_and_malformed_configs(tmp_path):
    with pytest.raises(ConfigError):
        load_config("no_such_pixel")
    path = tmp_path / "broken.json"
    path.write_text("{")
    with pytest.raises(ConfigError):
        load_config(str(path))
    path.write_text(json.dumps({"materials": {}}))
    with pytest.raises(ConfigError):
        load_config(str(path))


def test_config_value_checks(paper_config):
    document = paper_config.to_dict()
    document["optics"]["absorbed_fraction"] = 1.5
    with pytest.raises(ValidationError):
        PixelConfig.from_dict(document)
    document = paper_config.to_dict()
    document["mechanics"]["pressure_model"] = "adiabatic"
    with pytest.raises(ConfigError):
        PixelConfig.from_dict(document)


def test_derived_config_without_network_section(paper_config):
    document = paper_config.to_dict()
    del document["network"]
    config = PixelConfig.from_dict(document)
    assert config.network().r_abs == pytest.approx(124.75, rel=1e-3)


def test_with_compliance_scale(paper_config):
    other = paper_config.with_compliance_scale(1.0)
    assert other.mechanics_context().membrane.compliance_scale == 1.0
    assert paper_config.compliance_scale == pytest.approx(10.73)
