#!/usr/bin/env python3

# filename: defaults.py
# description: runtime
# configuration defaults
# for optopix

model_defaults = dict(

    # thermal network derivation
    eval_temperature=300.0,  # K
    bridge_length=0.5e-3,  # m, absorber edge to wall frame
    air_thermal_conductivity=0.026,  # W/(m K)
    conductivity_valid_min=250.0,  # K
    conductivity_valid_max=3300.0,  # K

    # ambient gas (air)
    ambient_pressure=101325.0,  # Pa
    ambient_temperature=300.0,  # K
    specific_gas_constant=287.05,  # J/(kg K)
    air_specific_heat_cv=718.0,  # J/(kg K)
    air_specific_heat_cp=1005.0,  # J/(kg K)
    ideal_gas_tolerance=5e-3,

    # optics
    absorbed_fraction=0.66,

    # thermal simulation
    decoupling_threshold=1e-2,
    rk4_step_fraction=1e-2,  # of the fastest time constant

    # drive engine
    steady_fraction=0.2,
    steady_min_periods=20,
    steady_min_time_constants=10,
    scan_resolution=1e-6,  # s
    scan_max_pulse=10.0,  # s, bisection upper bracket

    # fitting
    fit_window=30e-3,  # s
    fit_tolerance=1e-8,
    fit_max_iterations=100,
    fit_initial_damping=1e-3,

    # display compiler
    dead_time=0.5e-3,  # s, beam retarget time
    display_workers=1,

    # output
    manifest_schema_version=1,
)


def get_default(name, override=None):
    """
    Look up a runtime default,
    returning `override` instead
    if one is given.

    Raises :py:class:`KeyError`
    for names that have no
    registered default.
    """
    if name not in model_defaults:
        raise KeyError(
            "No optopix default named "
            "'{}'".format(name))
    if override is not None:
        return override
    return model_defaults[name]
