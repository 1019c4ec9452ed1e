"""Command line entry point: ``hydro-opt {calibrate,run,simulate}``.

Exit status is 0 on success, 1 for usage errors and 2 when a calibration
or simulation fails.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .circuits import CalibrationError, CircuitProblem, DomainError, FaultConfig
from .harness import (ExperimentSpec, MissingCalibrationError, calibrate,
                      config_overrides, export_timeseries, make_problem,
                      run_experiment, write_runs_csv)
from .pga import PGAConfig
from .simcore import DivergedSimulationError, IntegratorConfig
from .tabu import TabuConfig

EXIT_USAGE = 1
EXIT_FAILURE = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hydro-opt", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("calibrate", help="solve the circuit B motor fault slip")
    c.add_argument("--target-eff", type=float, default=0.75,
                   help="volumetric efficiency of the faulty motor (default 0.75)")
    c.add_argument("--nominal-eff", type=float, default=None,
                   help="volumetric efficiency of the healthy motor (default 0.95)")
    c.add_argument("--out", required=True, help="calibration JSON to write")

    def common(sp):
        sp.add_argument("--circuit", type=str.upper, choices=("A", "B"), required=True)
        sp.add_argument("--calibration", help="calibration JSON (required for circuit B)")
        sp.add_argument("--no-fault", action="store_true",
                        help="circuit B: use the healthy motor")
        sp.add_argument("--dt", type=float, default=1e-3, help="integration step (s)")
        sp.add_argument("--duration", type=float, default=4.0, help="simulated time (s)")
        sp.add_argument("--integrator", choices=("rk4", "euler"), default="rk4")
        sp.add_argument("--out", required=True, help="CSV file to write")

    r = sub.add_parser("run", help="repeated optimization runs with summary rows")
    common(r)
    r.add_argument("--method", choices=("tabu", "pga"), required=True)
    r.add_argument("--runs", type=int, default=10)
    r.add_argument("--seed", type=int, default=0, help="seed of the first run")
    r.add_argument("--config", help="JSON file with optional 'tabu' and 'pga' overrides")

    s = sub.add_parser("simulate", help="simulate one design point and export its response")
    common(s)
    s.add_argument("--point", required=True,
                   help="comma separated design values, e.g. 65,324,55")
    return p


def _integrator(args) -> IntegratorConfig:
    try:
        return IntegratorConfig(method=args.integrator, dt=args.dt, duration=args.duration)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _cmd_calibrate(args) -> int:
    try:
        FaultConfig(True, args.target_eff)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    cal = calibrate(args.target_eff, args.out, nominal_eff=args.nominal_eff)
    print(f"faulty slip {cal.motor_b_slip_faulty_lpm_per_bar:.6g} (L/min)/bar, "
          f"nominal slip {cal.motor_b_slip_nominal_lpm_per_bar:.6g} (L/min)/bar "
          f"-> {args.out}")
    return 0


def _spec(args, **extra) -> ExperimentSpec:
    try:
        return ExperimentSpec(circuit=args.circuit, fault=not args.no_fault,
                              calibration=args.calibration,
                              integrator=_integrator(args), **extra)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _cmd_run(args) -> int:
    extra = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
            extra["tabu"] = config_overrides(TabuConfig, data.get("tabu", {}))
            extra["pga"] = config_overrides(PGAConfig, data.get("pga", {}))
        except (OSError, ValueError, TypeError) as exc:
            raise UsageError(f"bad --config: {exc}") from exc
    spec = _spec(args, method=args.method, runs=args.runs, base_seed=args.seed, **extra)
    records, stats = run_experiment(spec)
    write_runs_csv(records, stats, args.out)
    best = min(records, key=lambda r: r.obfn)
    print(f"{len(records)} runs -> {args.out}; best run {best.run_index}: "
          f"{best.point} obfn {best.obfn:.6g}")
    return 0


def _cmd_simulate(args) -> int:
    spec = _spec(args)
    problem: CircuitProblem = make_problem(spec)
    try:
        values = tuple(float(v) for v in args.point.split(","))
        problem.design(values)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"bad --point {args.point!r}: {exc}") from exc
    result = problem.simulate(values)
    export_timeseries(result, args.out)
    print(f"terminal speed {result.terminal.motor_speed:.4g} rpm, "
          f"obfn {problem.score(result.terminal, values):.6g} -> {args.out}")
    return 0


COMMANDS = {"calibrate": _cmd_calibrate, "run": _cmd_run, "simulate": _cmd_simulate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"hydro-opt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MissingCalibrationError as exc:
        print(f"hydro-opt: error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except (CalibrationError, DivergedSimulationError, DomainError) as exc:
        print(f"hydro-opt: error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
