#!/usr/bin/env python3

import numpy as np
import pytest

from optopix.drive import (
    PulseTrain,
    average_absorbed_power,
    decompose_cyclic,
    frequency_sweep,
    max_scan_rate,
    minimum_pulse_duration,
    peak_force,
    pulse_end_response,
    pulse_energy,
    render_pulse_train,
    simulate_cyclic,
    steady_displacement,
    steady_pulse_count,
    steady_state_ratios,
    train_energy)
from optopix.errors import (
    InfeasibleError,
    InsufficientDataError,
    ValidationError)
from optopix.fitting import affine_fit, fit_cyclic_ratios
from optopix.thermal import DriveSignal, simulate_coupled


def test_pulse_train_timing():
    train = PulseTrain.from_frequency(2.5, 200.0, 0.5, pulse_count=4)
    assert train.pulse_duration == pytest.approx(2.5e-3)
    assert train.gap_duration == pytest.approx(2.5e-3)
    assert train.period == pytest.approx(5e-3)
    assert train.duration == pytest.approx(20e-3)
    assert train.duty_cycle == pytest.approx(0.5)
    assert train.absorbed_power == pytest.approx(1.65)
    assert train.pulse_intervals(1.0)[1] == pytest.approx((1.005, 1.0075))


@pytest.mark.parametrize("kwargs", [
    dict(pulse_power=-1.0, pulse_duration=1e-3),
    dict(pulse_power=1.0, pulse_duration=0.0),
    dict(pulse_power=1.0, pulse_duration=1e-3, gap_duration=-1e-3),
    dict(pulse_power=1.0, pulse_duration=1e-3, pulse_count=0),
    dict(pulse_power=1.0, pulse_duration=1e-3, pulse_count=1.5),
    dict(pulse_power=1.0, pulse_duration=1e-3, absorbed_fraction=0.0),
])
def test_pulse_train_validation(kwargs):
    with pytest.raises(ValidationError):
        PulseTrain(**kwargs)


def test_pulse_train_document():
    train = PulseTrain(2.0, 20e-3, 60e-3, 4, 0.7)
    assert PulseTrain.from_dict(train.to_dict()) == train
    with pytest.raises(ValidationError):
        PulseTrain.from_dict({"P_W": 1.0})
    with pytest.raises(ValidationError):
        PulseTrain.from_dict({"P_W": 1.0, "tp_s": 1e-3, "colour": "red"})


def test_render_pulse_train():
    train = PulseTrain(2.0, 10e-3, 30e-3, 3, 0.5)
    drive = render_pulse_train(train)
    assert drive.duration == pytest.approx(0.12)
    assert drive.power_at(5e-3) == pytest.approx(1.0)
    assert drive.power_at(20e-3) == 0.0
    assert drive.power_at(85e-3) == pytest.approx(1.0)
    assert drive.energy() == pytest.approx(train_energy(train,
                                                        absorbed=True))
    continuous = render_pulse_train(PulseTrain(2.0, 10e-3, 0.0, 3, 0.5))
    assert len(continuous) == 3
    assert continuous.energy() == pytest.approx(1.0 * 30e-3)


def test_energy_helpers():
    train = PulseTrain(2.5, 50e-3, 50e-3, 2, 0.66)
    assert pulse_energy(train) == pytest.approx(0.125)
    assert train_energy(train) == pytest.approx(0.25)
    assert average_absorbed_power(train) == pytest.approx(0.825)


def test_steady_state_ratios():
    slow, ripple = steady_state_ratios(23e-3, 23e-3)
    assert slow == pytest.approx(1.0)
    assert ripple == pytest.approx(1 - np.exp(-1))
    with pytest.raises(ValidationError):
        steady_state_ratios(23e-3, 0.0)


def test_steady_pulse_count(cyclic_network):
    slowest = max(cyclic_network.modal_time_constants())
    count = steady_pulse_count(cyclic_network, 5e-3)
    assert count * 5e-3 >= 10 * slowest
    assert steady_pulse_count(cyclic_network, 1.0) == 20


def test_decomposition_needs_three_periods(paper_network, paper_context):
    train = PulseTrain(2.5, 10e-3, 10e-3, 2)
    trace = simulate_cyclic(paper_network, paper_context, train)
    with pytest.raises(InsufficientDataError):
        decompose_cyclic(trace, train)


def test_decomposition_components_add_up(cyclic_network, paper_context):
    train = PulseTrain(2.5, 10e-3, 10e-3, 30)
    trace = simulate_cyclic(cyclic_network, paper_context, train)
    parts = decompose_cyclic(trace, train)
    np.testing.assert_allclose(
        parts.slow_component.displacement +
        parts.oscillating_component.displacement,
        trace.displacement, atol=1e-12)
    assert parts.first_pulse_amplitude > 0
    assert 0 < parts.steady_peak_to_peak < parts.first_pulse_amplitude
    assert parts.steady_slow_level > 0


def cyclic_parts(network, context, gap, pulse=50e-3):
    train = PulseTrain(2.5, pulse, gap)
    train = train.with_count(steady_pulse_count(network, train.period))
    trace = simulate_cyclic(network, context, train, sample_period=2e-4)
    return decompose_cyclic(trace, train)


def test_steady_ratios_follow_both_laws(cyclic_network, paper_context):
    tau = 23e-3
    gaps = [multiple * tau for multiple in [0.5, 1, 2, 4, 8]]
    parts = [cyclic_parts(cyclic_network, paper_context, gap)
             for gap in gaps]
    ripple = [p.steady_peak_to_peak / p.first_pulse_amplitude
              for p in parts]
    slow = [p.steady_slow_level / p.first_pulse_amplitude for p in parts]
    assert np.all(np.diff(ripple) > 0)
    assert np.all(np.diff(slow) < 0)
    exponential = fit_cyclic_ratios(list(zip(gaps, ripple)), "exponential")
    assert exponential.r_squared >= 0.9
    assert exponential["tau"] == pytest.approx(tau, rel=0.15)
    hyperbolic = fit_cyclic_ratios(list(zip(gaps, slow)), "hyperbolic")
    assert hyperbolic.r_squared >= 0.9


def test_ripple_at_200_hz(paper_network, paper_context):
    [(frequency, ripple)] = frequency_sweep(paper_network, paper_context,
                                            2.5, [200.0])
    assert frequency == 200.0
    assert ripple == pytest.approx(8.4e-6, rel=0.3)


def test_ripple_falls_with_frequency(paper_network, paper_context):
    pairs = frequency_sweep(paper_network, paper_context, 2.5,
                            [20.0, 100.0, 300.0], workers=2)
    assert [f for f, _ in pairs] == [20.0, 100.0, 300.0]
    ripples = [d for _, d in pairs]
    assert ripples[0] > ripples[1] > ripples[2]


def test_frequency_sweep_rejects_bad_input(paper_network, paper_context):
    with pytest.raises(ValidationError):
        frequency_sweep(paper_network, paper_context, 2.5, [])
    with pytest.raises(ValidationError):
        frequency_sweep(paper_network, paper_context, 2.5, [0.0])


def test_steady_displacement_bounds_pulse_response(paper_network,
                                                   paper_context):
    ceiling = steady_displacement(paper_network, paper_context, 1.65)
    z, force = pulse_end_response(paper_network, paper_context, 1.65, 0.2)
    assert 0 < z < ceiling
    assert force > 0


def test_scan_rate_at_large_displacement(cyclic_network, paper_context):
    rate = max_scan_rate(cyclic_network, paper_context, 2.5, 400e-6)
    assert rate == pytest.approx(26.5, rel=0.3)


def test_scan_rate_at_small_displacement(cyclic_network, paper_context):
    """
    The lumped model reaches 50 um sooner
    than the measured 217 pixels/s suggests.
    """
    rate = max_scan_rate(cyclic_network, paper_context, 2.5, 50e-6)
    assert 217.0 / 2 < rate < 217.0 * 2
    assert rate > max_scan_rate(cyclic_network, paper_context, 2.5,
                                100e-6)


def test_minimum_pulse_reaches_target(cyclic_network, paper_context):
    duration = minimum_pulse_duration(cyclic_network, paper_context,
                                      2.5, 200e-6)
    z_at, _ = pulse_end_response(cyclic_network, paper_context,
                                 0.66 * 2.5, duration)
    z_before, _ = pulse_end_response(cyclic_network, paper_context,
                                     0.66 * 2.5, duration - 2e-6)
    assert z_at >= 200e-6 > z_before


def test_unreachable_target(cyclic_network, paper_context):
    with pytest.raises(InfeasibleError) as info:
        minimum_pulse_duration(cyclic_network, paper_context, 2.5, 0.1)
    assert info.value.max_displacement < 0.1
    with pytest.raises(ValidationError):
        minimum_pulse_duration(cyclic_network, paper_context, 2.5, -1e-6)


def test_peak_force_grows_with_power(paper_network, paper_context):
    train = PulseTrain(1.0, 50e-3)
    low = peak_force(paper_network, paper_context, train)
    high = peak_force(paper_network, paper_context, train.with_power(2.0))
    assert high == pytest.approx(2 * low, rel=1e-4)


def test_peak_force_is_affine_in_power(paper_network, paper_context):
    powers = np.linspace(0.5, 2.5, 9)
    train = PulseTrain(1.0, 50e-3)
    forces = [peak_force(paper_network, paper_context,
                         train.with_power(float(p))) for p in powers]
    fit = affine_fit(powers, forces)
    assert fit.r_squared >= 0.999
    assert fit["slope"] > 0


def test_single_pulse_train_matches_coupled(paper_network, paper_context):
    train = PulseTrain(2.5, 50e-3)
    cyclic = simulate_cyclic(paper_network, paper_context, train)
    coupled = simulate_coupled(paper_network, DriveSignal.constant(
        train.absorbed_power, train.pulse_duration))
    np.testing.assert_array_equal(cyclic.absorber_temperature,
                                  coupled.absorber_temperature)
    np.testing.assert_array_equal(cyclic.air_temperature,
                                  coupled.air_temperature)


def test_isolated_pulses_repeat(wide_config):
    train = PulseTrain(2.5, 8e-3, 4.95, pulse_count=2)
    trace = simulate_cyclic(wide_config.network(),
                            wide_config.mechanics_context(), train,
                            sample_period=5e-4)
    first = trace.time < train.period
    peaks = [trace.displacement[first].max(),
             trace.displacement[~first].max()]
    assert peaks[0] > 0
    assert abs(peaks[1] - peaks[0]) < 0.5e-6


def steady_parts(network, context, frequency):
    train = PulseTrain.from_frequency(2.5, frequency, 0.5)
    train = train.with_count(steady_pulse_count(network, train.period))
    trace = simulate_cyclic(network, context, train, sample_period=1e-4)
    return train, decompose_cyclic(trace, train)


def test_equal_duty_trains_share_slow_level(paper_network, paper_context):
    slow_train, slow = steady_parts(paper_network, paper_context, 200.0)
    fast_train, fast = steady_parts(paper_network, paper_context, 400.0)
    assert average_absorbed_power(slow_train) == pytest.approx(
        average_absorbed_power(fast_train))
    assert fast.steady_slow_level == pytest.approx(slow.steady_slow_level,
                                                   rel=0.05)
    assert fast.steady_peak_to_peak < slow.steady_peak_to_peak


def test_low_frequency_ripple_is_single_pulse(paper_network, paper_context):
    _, parts = steady_parts(paper_network, paper_context, 2.0)
    assert parts.steady_peak_to_peak == pytest.approx(
        parts.first_pulse_amplitude, rel=0.01)
