#!/usr/bin/env python3

import numpy as np
import polars as pl
import pytest

from optopix.display import (
    DisplayLayout,
    Interval,
    PatternEvent,
    TactilePattern,
    check_single_beam,
    compile_pattern,
    field_to_frame,
    simulate_display,
    write_field)
from optopix.drive import PulseTrain, simulate_cyclic
from optopix.errors import ScheduleConflictError, ValidationError
from optopix.fitting import affine_fit
from optopix.patterns import builtin_pattern


def two_pixel_pattern(offset):
    train = PulseTrain(2.5, 10e-3)
    return TactilePattern([PatternEvent(0, 0.0, train),
                           PatternEvent(1, offset, train)])


def test_layout_geometry():
    layout = DisplayLayout.rectangular(3, 4)
    assert layout.size == 12
    assert layout.pixel_index(2, 1) == 9
    assert layout.position(9) == (2, 1)
    assert layout.coordinates(9) == pytest.approx((4e-3, 8e-3))
    assert layout.center() == (1, 2)
    with pytest.raises(ValidationError):
        layout.pixel_index(3, 0)


def test_perceptual_layout():
    layout = DisplayLayout.perceptual_437()
    assert layout.n_active == 437
    assert not layout.is_active(0)
    assert layout.is_active(1)
    assert layout.pitch == pytest.approx(3.6e-3)


def test_layout_validation():
    with pytest.raises(ValidationError):
        DisplayLayout(2, 2, pitch=2e-3)
    with pytest.raises(ValidationError):
        DisplayLayout(2, 2, active_mask=np.ones((3, 3)))
    with pytest.raises(ValidationError):
        DisplayLayout.from_dict({"rows": 2, "cols": 2, "shape": "hex"})


def test_layout_document():
    mask = np.ones((2, 3), dtype=bool)
    mask[0, 0] = False
    layout = DisplayLayout(2, 3, active_mask=mask,
                           pixel_config="paper_pixel_w040")
    loaded = DisplayLayout.from_dict(layout.to_dict())
    np.testing.assert_array_equal(loaded.active_mask, mask)
    assert loaded.pixel_config == "paper_pixel_w040"


def test_pattern_concatenation():
    first = two_pixel_pattern(20e-3)
    combined = first + TactilePattern(total_duration=0.1) + first
    assert len(combined) == 4
    assert combined.total_duration == pytest.approx(
        2 * first.total_duration + 0.1)
    assert combined.events[2].start_time == pytest.approx(
        first.total_duration + 0.1)


def test_pattern_validation():
    layout = DisplayLayout.rectangular(1, 2)
    with pytest.raises(ValidationError):
        two_pixel_pattern(20e-3).validate_for(DisplayLayout.rectangular(1, 1))
    two_pixel_pattern(20e-3).validate_for(layout)
    with pytest.raises(ValidationError):
        TactilePattern([PatternEvent(0, -1.0, PulseTrain(1.0, 1e-3))])
    with pytest.raises(ValidationError):
        TactilePattern([PatternEvent(0, 0.0, PulseTrain(1.0, 1e-3))],
                       total_duration=0.5e-3)


def test_compile_sorted_intervals():
    layout = DisplayLayout.rectangular(1, 2)
    pattern = TactilePattern([
        PatternEvent(1, 30e-3, PulseTrain(2.0, 5e-3, 5e-3, 2)),
        PatternEvent(0, 0.0, PulseTrain(1.0, 10e-3, 5e-3, 2))])
    schedule = compile_pattern(layout, pattern)
    assert len(schedule) == 4
    assert [i.pixel for i in schedule.intervals] == [0, 0, 1, 1]
    assert schedule.intervals[2].event == 0
    assert schedule.absorbed_energy() == pytest.approx(
        0.66 * (2 * 1.0 * 10e-3 + 2 * 2.0 * 5e-3))
    frame = schedule.to_frame()
    assert frame.columns == ["pixel", "on_s", "off_s", "P_W", "eps", "event"]


def test_single_beam_conflict_reported():
    layout = DisplayLayout.rectangular(1, 2)
    with pytest.raises(ScheduleConflictError) as info:
        compile_pattern(layout, two_pixel_pattern(5e-3))
    assert info.value.first.pixel == 0
    assert info.value.second.pixel == 1
    assert info.value.exit_code == 4
    assert "first_event=0" in info.value.diagnostic()


def test_dead_time_between_pixels():
    layout = DisplayLayout.rectangular(1, 2)
    with pytest.raises(ScheduleConflictError):
        compile_pattern(layout, two_pixel_pattern(10.2e-3))
    compile_pattern(layout, two_pixel_pattern(10.5e-3))
    compile_pattern(layout, two_pixel_pattern(10.2e-3), dead_time=0.1e-3)
    overlapping = compile_pattern(layout, two_pixel_pattern(5e-3),
                                  single_beam=False)
    assert not overlapping.single_beam


def test_same_pixel_needs_no_retarget():
    intervals = [Interval(0, 0.0, 10e-3, 1.0), Interval(0, 10e-3, 20e-3, 1.0)]
    check_single_beam(intervals, 0.5e-3)


def test_drive_merges_contiguous_intervals():
    layout = DisplayLayout.rectangular(1, 1)
    pattern = TactilePattern([PatternEvent(0, 0.0,
                                           PulseTrain(1.0, 10e-3, 0.0, 3))],
                             total_duration=50e-3)
    schedule = compile_pattern(layout, pattern)
    drive = schedule.drive_for(0)
    assert drive.duration == pytest.approx(50e-3)
    assert len(drive) == 2
    assert drive.times == pytest.approx([0.0, 30e-3])
    assert drive.powers == pytest.approx([0.66, 0.0])
    assert drive.energy() == pytest.approx(0.66 * 30e-3)


def test_overlapping_beams_add_power(paper_network, paper_context):
    layout = DisplayLayout.rectangular(1, 1)
    train = PulseTrain(2.5, 10e-3)
    pattern = TactilePattern([PatternEvent(0, 0.0, train),
                              PatternEvent(0, 5e-3, train)])
    with pytest.raises(ScheduleConflictError):
        compile_pattern(layout, pattern)
    schedule = compile_pattern(layout, pattern, single_beam=False)
    drive = schedule.drive_for(0)
    assert drive.times == pytest.approx([0.0, 5e-3, 10e-3, 15e-3])
    assert drive.powers == pytest.approx([1.65, 3.3, 1.65, 0.0])
    assert drive.energy() == pytest.approx(schedule.absorbed_energy(),
                                           rel=1e-9)
    frames = simulate_display(layout, schedule, paper_network,
                              paper_context, sample_period=1e-3)
    assert len(frames) == 16
    assert frames[-1].displacement[0] > frames[0].displacement[0]


def test_single_pixel_schedule_matches_cyclic(paper_network, paper_context):
    layout = DisplayLayout.rectangular(1, 1)
    train = PulseTrain(2.5, 10e-3, 10e-3, pulse_count=5)
    pattern = TactilePattern([PatternEvent(0, 0.0, train)],
                             total_duration=train.duration)
    schedule = compile_pattern(layout, pattern)
    frames = simulate_display(layout, schedule, paper_network,
                              paper_context, sample_period=1e-3,
                              with_force=True)
    trace = simulate_cyclic(paper_network, paper_context, train,
                            sample_period=1e-3)
    np.testing.assert_array_equal(
        np.array([f.displacement[0] for f in frames]), trace.displacement)
    np.testing.assert_array_equal(
        np.array([f.force[0] for f in frames]), trace.force)


def test_perceptual_display_field_is_deterministic(tmp_path, paper_network,
                                                   paper_context):
    layout = DisplayLayout.perceptual_437()
    schedule = compile_pattern(layout,
                               builtin_pattern("rotation", layout))
    serial = simulate_display(layout, schedule, paper_network,
                              paper_context, sample_period=5e-3,
                              workers=1)
    order = list(reversed(layout.active_indices().tolist()))
    threaded = simulate_display(layout, schedule, paper_network,
                                paper_context, sample_period=5e-3,
                                order=order, workers=4)
    write_field(field_to_frame(layout, serial), tmp_path / "serial.csv")
    write_field(field_to_frame(layout, threaded), tmp_path / "threaded.csv")
    assert (tmp_path / "serial.csv").read_bytes() == \
        (tmp_path / "threaded.csv").read_bytes()
    assert serial[0].displacement.size == 437


def test_magnitude_peak_force_is_affine(paper_network, paper_context):
    layout = DisplayLayout.rectangular(3, 3)
    powers = np.linspace(0.5, 2.5, 9)
    peaks = []
    for power in powers:
        pattern = builtin_pattern("magnitude", layout, power=float(power))
        frames = simulate_display(layout, compile_pattern(layout, pattern),
                                  paper_network, paper_context,
                                  sample_period=1e-3, with_force=True)
        peaks.append(max(f.force.max() for f in frames))
    fit = affine_fit(powers, peaks)
    assert fit.r_squared >= 0.999
    assert fit["slope"] > 0


def test_display_simulation(paper_network, paper_context):
    layout = DisplayLayout.rectangular(2, 2)
    schedule = compile_pattern(layout, two_pixel_pattern(20e-3))
    frames = simulate_display(layout, schedule, paper_network,
                              paper_context, sample_period=1e-3,
                              with_force=True)
    assert len(frames) == 31
    last = frames[-1]
    assert last.displacement[0] > 0
    assert last.displacement[1] > 0
    assert abs(last.displacement[2]) < 1e-6
    assert last.displacement[2] == last.displacement[3]
    reordered = simulate_display(layout, schedule, paper_network,
                                 paper_context, sample_period=1e-3,
                                 order=[3, 2, 1, 0], workers=2)
    np.testing.assert_array_equal(reordered[-1].displacement,
                                  last.displacement)
    assert reordered[-1].force is None


def test_display_order_must_cover_active(paper_network, paper_context):
    layout = DisplayLayout.rectangular(1, 2)
    schedule = compile_pattern(layout, two_pixel_pattern(20e-3))
    with pytest.raises(ValidationError):
        simulate_display(layout, schedule, paper_network, paper_context,
                         order=[0])


def test_field_table(tmp_path, paper_network, paper_context):
    layout = DisplayLayout.rectangular(1, 2)
    schedule = compile_pattern(layout, two_pixel_pattern(20e-3))
    frames = simulate_display(layout, schedule, paper_network,
                              paper_context, sample_period=5e-3)
    table = field_to_frame(layout, frames)
    assert table.height == 2 * len(frames)
    assert table.columns == ["t_s", "pixel", "row", "col", "z_m"]
    write_field(table, tmp_path / "field.parquet")
    loaded = pl.read_parquet(tmp_path / "field.parquet")
    assert loaded.equals(table)
    write_field(table, tmp_path / "field.csv")
    assert pl.read_csv(tmp_path / "field.csv").height == table.height
