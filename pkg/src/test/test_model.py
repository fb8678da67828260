#!/usr/bin/env python3

import numpy as np
import pytest

from optopix.errors import (
    InvalidGeometryError,
    OutOfRangeError,
    ValidationError)
from optopix.model import (
    ECOFLEX_00_10,
    MEASURED_BRIDGE_ROWS,
    PGS,
    ConstantConductivity,
    GasState,
    InverseTemperatureConductivity,
    OpticalInput,
    closed_form_admissible,
    conductivity_from_spec,
    decoupling_ratio,
    derive_network,
    get_material,
    measured_network,
    measured_row,
    paper_geometry)


def test_geometry_volumes():
    geometry = paper_geometry(0.2e-3)
    assert geometry.aperture_area == pytest.approx(7.0686e-6, rel=1e-4)
    assert geometry.cavity_volume == pytest.approx(7.0686e-9, rel=1e-4)
    assert geometry.absorber_volume == pytest.approx(5.01e-11, rel=1e-4)
    assert geometry.with_width(0.4e-3).bridge_width == 0.4e-3


@pytest.mark.parametrize("field,value", [
    ("cavity_height", 0.0),
    ("absorber_thickness", -1e-6),
    ("bridge_width", 2e-3),
    ("absorber_area", 1e-3),
])
def test_invalid_geometry(field, value):
    with pytest.raises(InvalidGeometryError):
        paper_geometry(**{field: value})


def test_conductivity_laws():
    assert PGS.conductivity_in_plane(300.0) == pytest.approx(1200.0)
    assert PGS.conductivity_in_plane(600.0) == pytest.approx(600.0)
    law = conductivity_from_spec({"inverse_temperature": 3.6e5})
    assert isinstance(law, InverseTemperatureConductivity)
    assert isinstance(conductivity_from_spec(29), ConstantConductivity)
    with pytest.raises(ValidationError):
        conductivity_from_spec("fast")


def test_material_lookup():
    assert get_material("ecoflex0010") is ECOFLEX_00_10
    with pytest.raises(ValidationError):
        get_material("unobtainium")


def test_gas_density_checked_against_ideal_gas():
    gas = GasState()
    assert gas.density == pytest.approx(1.17663, rel=1e-4)
    with pytest.raises(ValidationError):
        GasState(density=1.3)


def test_optical_input_from_losses():
    optics = OpticalInput.from_losses(2.5, 0.92, 0.8, 0.9)
    assert optics.absorbed_fraction == pytest.approx(0.6624)
    assert optics.absorbed_power == pytest.approx(1.656)
    with pytest.raises(ValidationError):
        OpticalInput(1.0, absorbed_fraction=1.2)


def test_derived_network_values():
    network = derive_network(paper_geometry(0.2e-3), PGS)
    assert network.r_abs == pytest.approx(124.75, rel=1e-3)
    assert network.r_air == pytest.approx(12820.5, rel=1e-3)
    assert network.c_abs == pytest.approx(83.55e-6, rel=1e-3)
    assert network.tau_abs == pytest.approx(network.r_abs * network.c_abs)
    assert network.symmetric_air_path
    assert network.air_relaxation_rate == pytest.approx(
        2 / network.tau_air)
    assert decoupling_ratio(network) == pytest.approx(0.0097, rel=0.01)
    assert closed_form_admissible(network)


def test_bridge_law_product_with_effective_length():
    """
    A bridge length of 1.47 mm reproduces
    the measured R w product.
    """
    network = derive_network(paper_geometry(0.4e-3, bridge_length=1.47e-3),
                             PGS)
    assert network.r_abs * 0.4e-3 == pytest.approx(73.3e-3, rel=2e-3)


def test_default_bridge_length_misses_bridge_law_constant():
    # the 0.5 mm default keeps R proportional to 1/w
    # but lands at about a third of a = 73.3 mm K/W
    products = [derive_network(paper_geometry(row.width), PGS).r_abs *
                row.width for row in MEASURED_BRIDGE_ROWS]
    np.testing.assert_allclose(products, products[0], rtol=1e-9)
    assert products[0] == pytest.approx(24.95e-3, rel=1e-3)
    assert 73.3e-3 / products[0] == pytest.approx(1.47e-3 / 0.5e-3,
                                                  rel=5e-3)
    assert abs(products[0] / 73.3e-3 - 1) > 0.5


def test_derive_network_rejects_temperature_outside_validity():
    with pytest.raises(OutOfRangeError):
        derive_network(paper_geometry(), PGS, eval_temperature=4000.0)


def test_time_constants_track_overrides(paper_network):
    other = paper_network.with_overrides(c_abs=1e-4)
    assert other.tau_abs == pytest.approx(paper_network.r_abs * 1e-4)
    assert other.r_air_wall == paper_network.r_air_wall
    with pytest.raises(TypeError):
        paper_network.with_overrides(tau_abs=1.0)
    with pytest.raises(ValidationError):
        paper_network.with_overrides(r_abs=-1.0)


def test_modal_time_constants(paper_network):
    fast, slow = paper_network.modal_time_constants()
    assert fast < paper_network.tau_abs < 2 * slow
    assert slow == pytest.approx(paper_network.tau_abs, rel=0.05)
    assert paper_network.fastest_time_constant() == pytest.approx(fast)


def test_measured_rows():
    row = measured_row(0.2e-3)
    assert row.r_abs == 382.0
    assert row.r_abs * row.c_abs == pytest.approx(row.tau, rel=0.01)
    with pytest.raises(ValidationError):
        measured_row(0.3e-3)
    assert len(MEASURED_BRIDGE_ROWS) == 5


def test_measured_network_uses_measured_air_wall():
    network = measured_network(0.75e-3)
    assert network.r_abs == 95.0
    assert network.r_air_wall == 660.0
    assert not network.symmetric_air_path
    assert network.air_gain == pytest.approx(
        660.0 / (660.0 + network.r_air))
    assert np.all(np.real(np.linalg.eigvals(network.system_matrix())) < 0)
