#!/usr/bin/env python3

# filename: cli.py
# description: the optopix command:
# simulate, fit, sweep, schedule,
# render and analyze

import argparse
import json
import logging
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from optopix import __version__
from optopix.config import load_config
from optopix.defaults import get_default
from optopix.display import (
    compile_pattern,
    field_to_frame,
    simulate_display,
    write_field)
from optopix.drive import PulseTrain, render_pulse_train
from optopix.energy import operating_point_report
from optopix.errors import EXIT_OK, EXIT_VALIDATION, OptopixError, \
    ValidationError
from optopix.fitting import fit_rc
from optopix.mechanics import simulate_response
from optopix.patterns import load_pattern_file
from optopix.sweeps import SWEEP_KINDS, run_sweep, sweep_values
from optopix.traces import TraceSeries
from optopix.units import (
    celsius,
    micrometers,
    microjoules_per_kelvin,
    millinewtons,
    milliseconds,
    percent)

logger = logging.getLogger(__name__)

DEFAULT_OUTPUTS = {
    "simulate": "trace.csv",
    "fit": "fit.json",
    "sweep": "sweep.csv",
    "schedule": "schedule.csv",
    "render": "field.csv",
    "analyze": "report.json",
}


def _stage(path, writer):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    handle, tmp = tempfile.mkstemp(dir=path.parent,
                                   prefix=".{}.".format(path.name),
                                   suffix=path.suffix)
    os.close(handle)
    try:
        writer(tmp)
    except BaseException:
        os.remove(tmp)
        raise
    return tmp


def write_together(items):
    """
    Write several files as a unit.

    Each ``(path, writer)`` pair has
    ``writer(tmp_path)`` fill a temporary
    file next to `path`. Only when every
    writer has succeeded are the files
    renamed into place; on any failure the
    temporaries and files already renamed
    by this call are removed.
    """
    staged = []
    placed = []
    try:
        for path, writer in items:
            staged.append((_stage(path, writer), Path(path)))
        for tmp, path in staged:
            os.replace(tmp, path)
            placed.append(path)
    except BaseException:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.remove(tmp)
        for path in placed:
            path.unlink(missing_ok=True)
        raise


def atomic_write(path, writer):
    """
    Call ``writer(tmp_path)`` on a temporary
    file next to `path`, then rename it into
    place. Nothing is left behind on failure.
    """
    write_together([(path, writer)])


def json_text(payload):
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def json_writer(payload):
    def writer(tmp):
        with open(tmp, "w", encoding="utf-8") as handle:
            handle.write(json_text(payload))
    return writer


def manifest_path(out):
    return Path(str(out) + ".manifest.json")


def base_manifest(args, command, config_paths, outputs, started):
    overrides = {key: value for key, value in sorted(vars(args).items())
                 if key not in ("handler", "config", "out", "seed",
                                "quiet", "verbose")
                 and value is not None}
    return {
        "schema_version": get_default("manifest_schema_version"),
        "command": command,
        "config_paths": [str(p) for p in config_paths],
        "overrides": overrides,
        "outputs": [str(p) for p in outputs],
        "seed": args.seed,
        "tool_version": __version__,
        "wall_clock_s": round(time.perf_counter() - started, 6),
    }


def _output(args):
    if args.out is not None:
        return Path(args.out)
    return Path(DEFAULT_OUTPUTS[args.command])


def _finish(args, config_paths, writer, summary, started):
    # output and manifest land together or not at all
    out = _output(args)
    manifest = base_manifest(args, args.command, config_paths,
                             [out], started)
    write_together([(out, writer),
                    (manifest_path(out), json_writer(manifest))])
    logger.info("wrote %s", out)
    if not args.quiet:
        print(summary)
    return EXIT_OK


def cmd_simulate(args, started):
    config = load_config(args.config)
    train = PulseTrain(pulse_power=args.power,
                       pulse_duration=args.pulse,
                       gap_duration=args.gap,
                       pulse_count=args.count,
                       absorbed_fraction=config.absorbed_fraction)
    trace = simulate_response(config.network(),
                              config.mechanics_context(),
                              render_pulse_train(train),
                              duration=args.duration,
                              sample_period=args.sample_period,
                              pressure_model=config.pressure_model)
    summary = "peak T_abs={:.1f} C peak F={:.2f} mN peak z={:.1f} um".format(
        float(celsius(np.max(trace.absorber_temperature))),
        float(millinewtons(np.max(trace.force))),
        float(micrometers(np.max(trace.displacement))))
    return _finish(args, [config.source], trace.write_csv, summary, started)


def cmd_fit(args, started):
    trace = TraceSeries.read_csv(args.trace)
    result = fit_rc(trace, args.power, fit_window=args.window)
    if args.seed is not None:
        result.provenance["seed"] = args.seed
    result.provenance["trace"] = Path(args.trace).name
    summary = "R={:.4g} K/W C={:.4g} uJ/K tau={:.4g} ms".format(
        result["r_abs"],
        float(microjoules_per_kelvin(result["c_abs"])),
        float(milliseconds(result["tau"])))
    return _finish(args, [], json_writer(result.to_dict()), summary,
                   started)


def cmd_sweep(args, started):
    config = load_config(args.config)
    values = sweep_values(args.start, args.stop, args.num)
    table = run_sweep(args.kind, config, values, args.power,
                      pulse_duration=args.pulse,
                      measured=args.measured,
                      workers=args.workers)
    return _finish(args, [config.source], table.write_csv,
                   "{} sweep: {} rows".format(args.kind, table.height),
                   started)


def cmd_schedule(args, started):
    layout, pattern = load_pattern_file(args.pattern)
    schedule = compile_pattern(layout, pattern,
                               single_beam=args.single_beam,
                               dead_time=args.dead_time)
    summary = "{} intervals, duration {:.4g} s".format(len(schedule),
                                                       schedule.duration)
    return _finish(args, [args.pattern], schedule.to_frame().write_csv,
                   summary, started)


def cmd_render(args, started):
    layout, pattern = load_pattern_file(args.pattern)
    config = load_config(args.config or layout.pixel_config)
    schedule = compile_pattern(layout, pattern,
                               single_beam=args.single_beam,
                               dead_time=args.dead_time)
    frames = simulate_display(layout, schedule,
                              config.network(),
                              config.mechanics_context(),
                              sample_period=args.sample_period,
                              with_force=args.with_force,
                              workers=args.workers)
    table = field_to_frame(layout, frames)
    return _finish(args, [args.pattern, config.source],
                   lambda tmp: write_field(table, tmp),
                   "{} frames x {} pixels".format(len(frames),
                                                  layout.n_active),
                   started)


def cmd_analyze(args, started):
    config = load_config(args.config)
    if args.trace is not None:
        if args.force is not None or args.displacement is not None:
            raise ValidationError(
                "Give either --trace or --force with "
                "--displacement, not both")
        trace = TraceSeries.read_csv(args.trace)
        if not (trace.has_column("F_N") and trace.has_column("z_m")):
            raise ValidationError(
                "Trace {} has no force and displacement "
                "columns".format(args.trace))
        force = float(np.max(trace.force))
        displacement = float(np.max(trace.displacement))
    elif args.force is not None and args.displacement is not None:
        force, displacement = args.force, args.displacement
    else:
        raise ValidationError(
            "analyze needs --trace or both --force and --displacement")
    report = operating_point_report(
        config.geometry, config.gas, force, displacement,
        args.pulse, args.power,
        absorbed_fraction=config.absorbed_fraction,
        specific_heat_cv=args.specific_heat,
        cavity_volume=args.cavity_volume,
        reported_rise=args.reported_rise)
    payload = report.to_dict()
    payload["operating_point"] = {"peak_force_N": force,
                                  "peak_displacement_m": displacement,
                                  "pulse_duration_s": args.pulse,
                                  "incident_power_W": args.power}
    summary = " ".join(
        "{}={}".format(label, "n/a" if value is None
                       else "{:.4g}%".format(float(percent(value))))
        for label, value in [("eta_s", report.stroke_efficiency),
                             ("eta_qt", report.heat_to_gas_efficiency),
                             ("eta_tm", report.thermo_mech_efficiency)])
    return _finish(args, [config.source], json_writer(payload), summary,
                   started)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="optopix",
        description="Simulate, fit and schedule optotactile "
        "pixel displays.")
    parser.add_argument("--version", action="version",
                        version="%(prog)s {}".format(__version__))
    parser.add_argument("--config", default=None, metavar="JSON",
                        help="pixel config path or preset name")
    parser.add_argument("--out", default=None, metavar="PATH",
                        help="output file")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--quiet", action="store_true")
    parser.add_argument("--verbose", "-v", action="store_true")
    subparsers = parser.add_subparsers(dest="command", required=True)

    simulate = subparsers.add_parser(
        "simulate", help="simulate a pulse train on one pixel")
    simulate.add_argument("--power", type=float, required=True,
                          help="incident optical power, W")
    simulate.add_argument("--pulse", type=float, required=True,
                          help="pulse duration, s")
    simulate.add_argument("--gap", type=float, default=0.0,
                          help="gap duration, s")
    simulate.add_argument("--count", type=int, default=1)
    simulate.add_argument("--duration", type=float, default=None,
                          help="simulated time, s")
    simulate.add_argument("--sample-period", type=float, default=1e-4)
    simulate.set_defaults(handler=cmd_simulate)

    fit = subparsers.add_parser(
        "fit", help="fit absorber R and C to a heating trace")
    fit.add_argument("trace", metavar="TRACE_CSV")
    fit.add_argument("--power", type=float, required=True,
                     help="absorbed power during the pulse, W")
    fit.add_argument("--window", type=float, default=None,
                     help="fit window from onset, s")
    fit.set_defaults(handler=cmd_fit)

    sweep = subparsers.add_parser("sweep", help="run a parameter sweep")
    sweep.add_argument("--kind", choices=SWEEP_KINDS, required=True)
    sweep.add_argument("--start", type=float, required=True)
    sweep.add_argument("--stop", type=float, required=True)
    sweep.add_argument("--num", type=int, default=10)
    sweep.add_argument("--power", type=float, default=2.5,
                       help="incident optical power, W")
    sweep.add_argument("--pulse", type=float, default=50e-3,
                       help="pulse duration for width sweeps, s")
    sweep.add_argument("--measured", action="store_true",
                       help="use measured absorber parameters "
                       "in width sweeps")
    sweep.add_argument("--workers", type=int, default=1)
    sweep.set_defaults(handler=cmd_sweep)

    for name, help_text in [("schedule", "compile a pattern file"),
                            ("render", "simulate a pattern file")]:
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("pattern", metavar="PATTERN_JSON")
        sub.add_argument("--single-beam",
                         action=argparse.BooleanOptionalAction,
                         default=True)
        sub.add_argument("--dead-time", type=float, default=None)
        if name == "render":
            sub.add_argument("--sample-period", type=float, default=1e-3)
            sub.add_argument("--with-force", action="store_true")
            sub.add_argument("--workers", type=int, default=None)
            sub.set_defaults(handler=cmd_render)
        else:
            sub.set_defaults(handler=cmd_schedule)

    analyze = subparsers.add_parser(
        "analyze", help="energy and efficiency report")
    analyze.add_argument("--trace", default=None, metavar="TRACE_CSV")
    analyze.add_argument("--force", type=float, default=None,
                         help="peak blocked force, N")
    analyze.add_argument("--displacement", type=float, default=None,
                         help="peak displacement, m")
    analyze.add_argument("--pulse", type=float, required=True)
    analyze.add_argument("--power", type=float, required=True,
                         help="incident optical power, W")
    analyze.add_argument("--specific-heat", type=float, default=None,
                         help="air specific heat, J/(kg K)")
    analyze.add_argument("--cavity-volume", type=float, default=None,
                         help="gas volume, m^3")
    analyze.add_argument("--reported-rise", type=float, default=None,
                         help="measured air temperature rise, K")
    analyze.set_defaults(handler=cmd_analyze)
    return parser


def configure_logging(args):
    level = logging.WARNING
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.ERROR
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args)
    started = time.perf_counter()
    try:
        return args.handler(args, started)
    except OptopixError as err:
        print(err.diagnostic(), file=sys.stderr)
        return err.exit_code
    except OSError as err:
        print(ValidationError(str(err)).diagnostic(), file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
