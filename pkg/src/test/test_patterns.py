#!/usr/bin/env python3

import json

import pytest

from optopix.display import DisplayLayout, compile_pattern
from optopix.errors import ValidationError
from optopix.patterns import (
    BUILTIN_PATTERNS,
    MAGNITUDE_POWERS,
    builtin_pattern,
    default_layout,
    load_pattern_file,
    multipoint_squares,
    pattern_document,
    pulses_in_dwell,
    ring_cells)


def test_pulses_in_dwell():
    assert pulses_in_dwell(0.3, 20e-3, 60e-3) == 4
    assert pulses_in_dwell(0.05, 25e-3, 71e-3) == 1
    assert pulses_in_dwell(0.4, 10e-3, 10e-3) == 20
    with pytest.raises(ValidationError):
        pulses_in_dwell(5e-3, 10e-3, 10e-3)


@pytest.mark.parametrize("name,params", [
    ("linear_motion", {}),
    ("linear_motion", {"direction": "up"}),
    ("rotation", {"speed": 16e-3}),
    ("rotation", {"direction": "counterclockwise", "speed": 64e-3}),
    ("localization", {"target": 0}),
    ("magnitude", {"power": 0.5}),
    ("temporal", {"rate": "fast"}),
    ("temporal", {"rate": "slow", "oddball": 1}),
    ("multipoint", {"digit_pair": "24"}),
])
def test_builtins_compile_single_beam(name, params):
    layout = default_layout()
    pattern = builtin_pattern(name, layout, **params)
    schedule = compile_pattern(layout, pattern)
    assert len(schedule) > 0


def test_linear_motion_timing():
    pattern = builtin_pattern("linear_motion")
    assert pattern.total_duration == pytest.approx(2.3)
    assert len(pattern) == 6
    assert pattern.events[0].train.pulse_count == 4


def test_rotation_dwell():
    pattern = builtin_pattern("rotation", speed=32e-3)
    assert pattern.total_duration == pytest.approx(0.8)
    assert len(pattern.pixels()) == 8


def test_ring_directions():
    layout = default_layout()
    clockwise = ring_cells(layout, "clockwise")
    counter = ring_cells(layout, "counterclockwise")
    assert clockwise[0] == counter[0]
    assert clockwise[1] == counter[-1]
    with pytest.raises(ValidationError):
        ring_cells(layout, "sideways")


def test_localization_and_magnitude():
    assert builtin_pattern("localization").total_duration == \
        pytest.approx(1.75)
    assert builtin_pattern("magnitude").total_duration == pytest.approx(1.0)
    assert len(MAGNITUDE_POWERS) == 9
    with pytest.raises(ValidationError):
        builtin_pattern("localization", target=9)
    with pytest.raises(ValidationError):
        builtin_pattern("magnitude", power=3.0)


def test_temporal_oddball_sequence():
    pattern = builtin_pattern("temporal", rate="slow", oddball=2)
    assert pattern.total_duration == pytest.approx(3 * 0.4 + 2 * 0.5)
    trains = [event.train for event in pattern.events]
    assert trains[0].pulse_duration == pytest.approx(35e-3)
    assert trains[2].pulse_duration == pytest.approx(10e-3)


def test_multipoint_sequence():
    pattern = builtin_pattern("multipoint", digit_pair="13")
    assert len(pattern) == 40
    assert pattern.total_duration == pytest.approx(0.6, rel=0.05)
    squares = multipoint_squares(default_layout())
    assert pattern.events[0].pixel == squares[0][0]
    assert pattern.events[1].pixel == squares[2][0]
    with pytest.raises(ValidationError):
        builtin_pattern("multipoint", digit_pair="11")


def test_builtin_needs_room():
    with pytest.raises(ValidationError):
        builtin_pattern("multipoint", DisplayLayout.rectangular(3, 3))
    with pytest.raises(ValidationError):
        builtin_pattern("spiral")
    with pytest.raises(ValidationError):
        builtin_pattern("rotation", colour="red")


def test_every_builtin_registered():
    assert set(BUILTIN_PATTERNS) == {"linear_motion", "rotation",
                                     "localization", "magnitude",
                                     "temporal", "multipoint"}


def test_pattern_file_round_trip(tmp_path):
    layout = default_layout()
    pattern = builtin_pattern("rotation", layout)
    path = tmp_path / "rotation.json"
    path.write_text(json.dumps(pattern_document(layout, pattern)))
    loaded_layout, loaded = load_pattern_file(path)
    assert loaded_layout.rows == layout.rows
    assert len(loaded) == len(pattern)
    assert loaded.total_duration == pytest.approx(pattern.total_duration)


def test_pattern_file_with_builtin_entry(tmp_path):
    path = tmp_path / "magnitude.json"
    path.write_text(json.dumps({"builtin": {"name": "magnitude",
                                            "power": 1.5}}))
    layout, pattern = load_pattern_file(path)
    assert pattern.events[0].train.pulse_power == 1.5


def test_bad_pattern_files(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("[1, 2]")
    with pytest.raises(ValidationError):
        load_pattern_file(path)
    path.write_text(json.dumps({"builtin": {"name": "magnitude"},
                                "events": []}))
    with pytest.raises(ValidationError):
        load_pattern_file(path)
    with pytest.raises(ValidationError):
        load_pattern_file(tmp_path / "missing.json")
