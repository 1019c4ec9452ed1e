"""Batch experiments, summary statistics and CSV export."""
from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Sequence

from .circuits import (CalibrationRecord, CircuitProblem, FaultConfig,
                       calibrate_fault)
from .hydraulics import BAR, LPM, P_TANK
from .pga import PGAConfig, pga_run
from .simcore import IntegratorConfig, SimulationResult
from .tabu import SolutionRecord, TabuConfig, tabu_search

log = logging.getLogger(__name__)

CALIBRATE_HINT = "hydro-opt calibrate --target-eff 0.75 --out calibration.json"

# Table column names (with units) for each circuit's design point.
POINT_COLUMNS = {
    "A": ("pump_disp_cc", "motor_disp_cc", "pipe_diameter_mm"),
    "B": ("pump1_disp_cc", "pm1_speed_rpm", "pump2_disp_cc", "pm2_speed_rpm"),
}
METHODS = ("tabu", "pga")


class MissingCalibrationError(FileNotFoundError):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    circuit: str = "A"
    method: str = "tabu"
    runs: int = 10
    base_seed: int = 0
    fault: bool = True
    calibration: str | None = None  # JSON path; required for circuit B
    tabu: TabuConfig = field(default_factory=TabuConfig)
    pga: PGAConfig = field(default_factory=PGAConfig)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)

    def __post_init__(self):
        object.__setattr__(self, "circuit", self.circuit.upper())
        object.__setattr__(self, "method", self.method.lower())
        if self.circuit not in POINT_COLUMNS:
            raise ValueError(f"circuit must be A or B, got {self.circuit!r}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")


@dataclass(frozen=True)
class RunRecord:
    run_index: int
    point: tuple[float, ...]
    obfn: float
    evals: int
    wall_time: float = 0.0


@dataclass(frozen=True)
class StatsTable:
    """Per-column mean and sample SD; SD entries are None when runs == 1."""

    columns: tuple[str, ...]
    mean: tuple[float, ...]
    sd: tuple[float | None, ...]


def summarize(values: Sequence[float]) -> tuple[float, float | None]:
    """Mean and sample (n - 1) standard deviation.

    The SD is None for a single value.
    """
    xs = [float(v) for v in values]
    if not xs:
        raise ValueError("cannot summarize an empty column")
    n = len(xs)
    mean = math.fsum(xs) / n
    if n == 1:
        return mean, None
    var = math.fsum((x - mean) ** 2 for x in xs) / (n - 1)
    return mean, math.sqrt(var)


def load_calibration(path: str | Path | None) -> CalibrationRecord:
    if path is None or not Path(path).is_file():
        where = f" ({path} not found)" if path is not None else ""
        raise MissingCalibrationError(
            f"circuit B needs a fault calibration file{where}; create one with "
            f"`{CALIBRATE_HINT}` and pass it with --calibration")
    return CalibrationRecord.load(path)


def make_problem(spec: ExperimentSpec) -> CircuitProblem:
    if spec.circuit == "B":
        cal = load_calibration(spec.calibration)
    elif spec.calibration is not None:
        cal = CalibrationRecord.load(spec.calibration)
    else:
        cal = CalibrationRecord()
    fault = FaultConfig(spec.fault, cal.target_eff_faulty if spec.fault
                        else cal.target_eff_nominal)
    return CircuitProblem(spec.circuit, cal, fault, spec.integrator)


def run_once(problem: CircuitProblem, spec: ExperimentSpec, seed: int) -> SolutionRecord:
    if spec.method == "tabu":
        return tabu_search(problem, problem.space, spec.tabu, seed=seed)
    return pga_run(problem, problem.space, spec.pga, seed=seed)


def run_experiment(spec: ExperimentSpec) -> tuple[list[RunRecord], StatsTable]:
    """Run ``spec.runs`` independent searches, run i seeded with base_seed + i."""
    problem = make_problem(spec)
    records = []
    for i in range(spec.runs):
        t0 = time.perf_counter()
        sol = run_once(problem, spec, spec.base_seed + i)
        rec = RunRecord(i + 1, sol.point, sol.obfn, sol.evals, time.perf_counter() - t0)
        log.info("run %d: %s obfn=%.6g evals=%d", rec.run_index, rec.point, rec.obfn, rec.evals)
        records.append(rec)
    return records, stats_table(records, spec.circuit)


def stats_table(records: Sequence[RunRecord], circuit: str) -> StatsTable:
    cols = POINT_COLUMNS[circuit.upper()] + ("obfn", "evals")
    table = [list(r.point) + [r.obfn, r.evals] for r in records]
    mean, sd = zip(*(summarize(col) for col in zip(*table)))
    return StatsTable(cols, tuple(mean), tuple(sd))


def _fmt(x: float | None) -> str:
    return "" if x is None else f"{x:.6g}"


def write_runs_csv(records: Sequence[RunRecord], stats: StatsTable, path: str | Path) -> None:
    """Run table with trailing Avg and SD rows. Wall time is left out so
    that repeated experiments give identical files."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("run",) + stats.columns)
        for r in records:
            w.writerow([r.run_index] + [_fmt(v) for v in r.point] + [_fmt(r.obfn), r.evals])
        w.writerow(["Avg"] + [_fmt(v) for v in stats.mean])
        w.writerow(["SD"] + [_fmt(v) for v in stats.sd])


def export_timeseries(result: SimulationResult, path: str | Path) -> None:
    """Speed response CSV, one row per retained sample."""
    if len(result) == 0:
        raise ValueError("empty simulation result")
    cols = [result.t, result.state("motor_speed") * 30.0 / math.pi,
            (result.state("p_supply") - P_TANK) / BAR]
    header = ["t_s", "motor_speed_rpm", "supply_pressure_bar", "relief_flow_lpm"]
    if "q_relief_main" in result.flow_names:
        cols += [result.flow("q_relief_main") / LPM, result.flow("q_relief_feeder") / LPM]
        header.append("feeder_relief_flow_lpm")
    else:
        cols.append(result.flow("q_relief") / LPM)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([f"{float(v):.6g}" for v in row])


def calibrate(target_eff: float, out_path: str | Path,
              nominal_eff: float | None = None,
              base: CalibrationRecord | None = None,
              integ: IntegratorConfig | None = None) -> CalibrationRecord:
    """Solve the circuit B motor slip for the faulty (and healthy) motor and
    write the resulting record as JSON."""
    cal = base or CalibrationRecord()
    cal = replace(cal, target_eff_faulty=float(target_eff))
    if nominal_eff is not None:
        cal = replace(cal, target_eff_nominal=float(nominal_eff))
    faulty = calibrate_fault(cal, FaultConfig(True, cal.target_eff_faulty), integ=integ)
    nominal = calibrate_fault(cal, FaultConfig(False, cal.target_eff_nominal), integ=integ)
    cal = replace(cal, motor_b_slip_faulty_lpm_per_bar=faulty,
                  motor_b_slip_nominal_lpm_per_bar=nominal)
    cal.save(out_path)
    return cal


def config_overrides(cls, data: dict):
    """Build a frozen config dataclass from a dict, rejecting unknown keys."""
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown {cls.__name__} fields: {sorted(unknown)}")
    conv = {k: tuple(v) if isinstance(v, list) else v for k, v in data.items()}
    return cls(**conv)
