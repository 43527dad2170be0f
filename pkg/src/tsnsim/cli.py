"""Command line: run, sweep, validate, gcl-synth.

Exit status is 0 on success, 2 for invalid scenarios or arguments, 3 for
errors raised while running (including failed schedule synthesis).
"""

import argparse
import sys
from pathlib import Path

import yaml

from tsnsim.gcl import SynthesisError
from tsnsim.kernel import SimulationError
from tsnsim.metrics import write_rows_csv
from tsnsim.port import Mode
from tsnsim.runner import plot_data, run, sweep
from tsnsim.scenario import ScenarioError, load, resolve, schedule_for, shipped_scenarios, write_gcl_file

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 2, 3


def _csv_list(text, cast=str):
    return [cast(x) for x in text.split(",") if x.strip()]


def _number(text):
    v = float(text)
    return int(v) if v.is_integer() and "." not in text and "e" not in text.lower() else v


def _value(config, text):
    if text is None:
        return None
    if not config.sweep_variable:
        raise ScenarioError("--value given but the scenario has no sweep")
    return _number(text)


def cmd_run(args):
    config = load(args.scenario)
    result = run(config, args.mode, _value(config, args.value), args.seed, args.duration,
                 args.out, keep_series=False)
    be = result.be
    print(f"{config.name} mode={result.mode} seed={result.seed}"
          + (f" {result.variable}={result.value}" if result.variable else ""))
    if be.count:
        print(f"  BE frames={be.count} mean={be.mean_delay / 1e3:.2f}us p99={be.p99_delay / 1e3:.2f}us "
              f"mean backlog={be.mean_backlog:.0f}B")
    else:
        print("  no best-effort frames delivered after warm-up")
    for name, path in sorted(result.files.items()):
        print(f"  {name}: {path}")
    return EXIT_OK


def cmd_sweep(args):
    config = load(args.scenario)
    modes = _csv_list(args.modes, Mode) if args.modes else None
    seeds = _csv_list(args.seeds, int) if args.seeds else None
    values = _csv_list(args.values, _number) if args.values is not None else None
    results, rows = sweep(config, modes, seeds, values, args.duration, args.jobs, args.out,
                          keep_series=args.plot)
    if args.out is None:
        write_rows_csv(rows, sys.stdout)
    else:
        print(f"{len(rows)} runs written to {Path(args.out) / (config.name + '_sweep.csv')}")
        if args.plot:
            for p in plot_data(results, args.out, config.figure or config.name, render=args.render):
                print(f"  {p}")
    return EXIT_OK


def cmd_validate(args):
    config = load(args.scenario)
    print(f"{config.name}: valid ({config.source})")
    print(f"  hash {config.scenario_hash}")
    print(f"  modes {','.join(m.value for m in config.modes)}  seeds {config.seeds}")
    if config.sweep_variable:
        print(f"  sweep {config.sweep_variable} over {config.sweep_values}")
    if args.dump:
        mode = Mode(args.mode) if args.mode else config.modes[0]
        res = resolve(config, mode, _value(config, args.value), synthesize=False)
        yaml.safe_dump(res.to_dict(), sys.stdout, sort_keys=True, default_flow_style=None)
    return EXIT_OK


def cmd_gcl_synth(args):
    config = load(args.scenario)
    res = resolve(config, Mode.SP, _value(config, args.value), synthesize=False)
    schedule = schedule_for(config, res.topology, res.flows)
    write_gcl_file(schedule, args.out, config.name)
    print(f"hyperperiod {schedule.hyperperiod} ns, {len(schedule.gcls)} gated port(s) -> {args.out}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="tsnsim", description="TSN egress forwarding simulator")
    sub = p.add_subparsers(dest="command", required=True)
    shipped = ", ".join(shipped_scenarios())

    r = sub.add_parser("run", help="one simulation")
    r.add_argument("--scenario", required=True, help=f"scenario file or shipped name ({shipped})")
    r.add_argument("--mode", required=True, choices=[m.value for m in Mode])
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--duration", type=int, default=None, help="simulated time in ns")
    r.add_argument("--value", default=None, help="sweep value (defaults to the first)")
    r.add_argument("--out", default=None, help="output directory for CSV files")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="all sweep values x modes x seeds")
    s.add_argument("--scenario", required=True)
    s.add_argument("--modes", default=None, help="comma separated, default: scenario modes")
    s.add_argument("--seeds", default=None, help="comma separated, default: scenario seeds")
    s.add_argument("--values", default=None, help="comma separated sweep values")
    s.add_argument("--duration", type=int, default=None, help="simulated time in ns")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out", default=None)
    s.add_argument("--plot", action="store_true", help="also write per-figure data files")
    s.add_argument("--render", action="store_true", help="with --plot, also draw SVGs")
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("validate", help="check a scenario")
    v.add_argument("--scenario", required=True)
    v.add_argument("--dump", action="store_true", help="print the resolved configuration")
    v.add_argument("--mode", default=None, choices=[m.value for m in Mode])
    v.add_argument("--value", default=None)
    v.set_defaults(func=cmd_validate)

    g = sub.add_parser("gcl-synth", help="synthesize a no-wait gate schedule")
    g.add_argument("--scenario", required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--value", default=None)
    g.set_defaults(func=cmd_gcl_synth)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (SynthesisError, SimulationError, OSError, RuntimeError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
