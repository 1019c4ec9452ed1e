"""The two benchmark transmissions, their design spaces and objectives.

Circuit A is a simple transmission: a constant speed pump feeds a motor
driving an inertia load through a supply line; a relief valve vents the
supply line to tank and the return line joins the reservoir at the pump
inlet through a tank port.

Circuit B is a closed loop with a boost (feeder) pump. The main pump and
motor form the loop, a cross-port relief valve protects the supply line, and
the boost pump replenishes the return line through a check valve with its
own relief valve to tank. The motor can be given a high-slip fault.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numba as nb
import numpy as np

from . import hydraulics as hy
from .hydraulics import BAR, CC, LPM, P_TANK, RPM
from .simcore import (CircuitNetwork, DivergedSimulationError, IntegratorConfig,
                      SimulationResult, TerminalMetrics, integrate)
from .space import Param, Space

PENALTY = 1.0e9


class DomainError(ValueError):
    """A design point or argument lies outside its declared domain."""


class CalibrationError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Design spaces
# ---------------------------------------------------------------------------

SPACE_A = Space([
    Param("pump_disp", 10, 200, 1),
    Param("motor_disp", 10, 1000, 1),
    Param("pipe_diameter", 7, 60, 0.5),
])

SPACE_B = Space([
    Param("pump1_disp", 10, 750, 1),
    Param("pm1_speed", 100, 2000, 1),
    Param("pump2_disp", 10, 750, 1),
    Param("pm2_speed", 100, 2000, 1),
])


def _check_on_grid(space: Space, values) -> None:
    for p, v in zip(space.params, values):
        if not p.on_grid(v):
            raise DomainError(
                f"{p.name}={v} outside [{p.lower}, {p.upper}] step {p.step}")


@dataclass(frozen=True)
class DesignPointA:
    pump_disp: float  # cc/rev
    motor_disp: float  # cc/rev
    pipe_diameter: float  # mm

    space = SPACE_A

    def __post_init__(self):
        _check_on_grid(SPACE_A, self.astuple())

    def astuple(self) -> tuple[float, float, float]:
        return (self.pump_disp, self.motor_disp, self.pipe_diameter)


@dataclass(frozen=True)
class DesignPointB:
    pump1_disp: float  # boost pump, cc/rev
    pm1_speed: float  # rpm
    pump2_disp: float  # main pump, cc/rev
    pm2_speed: float  # rpm

    space = SPACE_B

    def __post_init__(self):
        _check_on_grid(SPACE_B, self.astuple())

    def astuple(self) -> tuple[float, float, float, float]:
        return (self.pump1_disp, self.pm1_speed, self.pump2_disp, self.pm2_speed)


# ---------------------------------------------------------------------------
# Configuration records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ObjectiveConfigA:
    desired_speed: float = 300.0  # rpm
    pump_upper_bound: float = 200.0  # cc/rev

    def __post_init__(self):
        if not self.desired_speed > 0:
            raise ValueError("desired_speed must be > 0")
        if self.pump_upper_bound != SPACE_A.params[0].upper:
            raise ValueError("pump_upper_bound must equal the pump_disp upper bound")


@dataclass(frozen=True)
class ObjectiveConfigB:
    desired_speed: float = 300.0  # rpm


@dataclass(frozen=True)
class FaultConfig:
    faulty: bool = True
    target_volumetric_eff: float = 0.75

    def __post_init__(self):
        if not 0.0 < self.target_volumetric_eff <= 1.0:
            raise ValueError("target_volumetric_eff must lie in (0, 1]")


@dataclass(frozen=True)
class CalibrationRecord:
    """Every physical constant that is not a design variable.

    Field suffixes give the units. Slip coefficients for the circuit B motor
    are solved by ``calibrate_fault``; the defaults are only starting values.
    """

    bulk_modulus_pa: float = 1.4e9
    pipe_length_m: float = 1.0
    port_volume_l: float = 1.5
    vapor_floor_pa: float = hy.VAPOR_FLOOR
    relief_cracking_bar: float = 100.0
    relief_gradient_lpm_per_bar: float = 10.0
    check_cracking_bar: float = 0.5
    check_gradient_lpm_per_bar: float = 50.0
    tank_port_lpm_per_bar: float = 10.0
    prime_mover_a_rpm: float = 1500.0
    pump_slip_lpm_per_bar: float = 0.05
    boost_pump_slip_lpm_per_bar: float = 0.005
    motor_slip_a_lpm_per_bar: float = 0.05
    motor_visc_friction_nm_per_rad_s: float = 0.0
    motor_press_friction_nm_per_bar: float = 0.0
    load_inertia_kgm2: float = 50.0
    load_stiction_nm: float = 20.0
    load_coulomb_nm: float = 10.0
    load_viscous_nm_per_rad_s: float = 1.0
    load_windage_nm_per_rad2_s2: float = 0.0
    load_applied_torque_nm: float = 0.0
    # circuit A runs a lighter load so that every relief-limited start-up
    # settles inside the simulated window (see load_a)
    load_a_inertia_kgm2: float = 1.0
    load_a_stiction_nm: float = 3.0
    load_a_coulomb_nm: float = 2.0
    load_a_viscous_nm_per_rad_s: float = 0.1
    motor_b_disp_cc: float = 473.0
    pipe_b_diameter_mm: float = 40.0
    motor_b_drain_ratio: float = 0.5
    motor_b_slip_faulty_lpm_per_bar: float = 4.0
    motor_b_slip_nominal_lpm_per_bar: float = 0.15
    target_eff_faulty: float = 0.75
    target_eff_nominal: float = 0.95

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "CalibrationRecord":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown calibration fields: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in data.items()})

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "CalibrationRecord":
        return cls.from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# Compiled kernels
# ---------------------------------------------------------------------------

# parameter vector layout, circuit A
_A_FIELDS = ("pm_omega", "pump_disp", "pump_slip", "motor_disp", "motor_slip",
             "motor_drain", "motor_visc", "motor_pfric", "beta", "vol_s", "vol_r",
             "floor", "p_tank", "rv_crack", "rv_grad", "tank_port", "unused",
             "inertia", "stiction", "coulomb", "viscous", "windage", "applied")


@nb.njit(cache=True)
def _core_a(x, p):
    ps = x[0]
    pr = x[1]
    w = x[2]
    dp = ps - pr
    q_pump = hy.k_pump_flow(p[1], p[2], p[0], dp)
    cross, drain = hy.k_motor_leakage(p[4], p[5], dp, 0.5 * (ps + pr) - p[12])
    q_motor = p[3] * w + cross + drain
    q_rv = hy.k_valve_flow(p[13], p[14], ps - p[12])
    q_mk = p[15] * (p[12] - pr)
    return q_pump, q_rv, q_motor, q_mk, drain


@nb.njit(cache=True)
def _flows_a(x, p, out):
    q_pump, q_rv, q_motor, q_mk, drain = _core_a(x, p)
    out[0] = q_pump
    out[1] = q_rv
    out[2] = q_motor
    out[3] = q_mk
    out[4] = drain


@nb.njit(cache=True)
def _rhs_a(t, x, p, out):
    q_pump, q_rv, q_motor, q_mk, drain = _core_a(x, p)
    ps = x[0]
    pr = x[1]
    w = x[2]
    out[0] = hy.k_pipe_rate(p[8], p[9], q_pump - q_motor - q_rv, ps, p[11])
    out[1] = hy.k_pipe_rate(p[8], p[10], q_motor - drain + q_mk - q_pump, pr, p[11])
    torque = hy.k_motor_torque(p[3], p[6], p[7], w, ps - pr)
    out[2] = hy.k_load_accel(p[17], p[18], p[19], p[20], p[21], p[22], torque, w)


_B_FIELDS = ("pm1_omega", "boost_disp", "boost_slip", "pm2_omega", "main_disp",
             "main_slip", "motor_disp", "motor_slip", "motor_drain", "motor_visc",
             "motor_pfric", "beta", "vol_s", "vol_r", "floor", "p_tank",
             "rvm_crack", "rvm_grad", "rvf_crack", "rvf_grad", "cv_crack", "cv_grad",
             "inertia", "stiction", "coulomb", "viscous", "windage", "applied")


@nb.njit(cache=True)
def _core_b(x, p):
    ps = x[0]
    pr = x[1]
    w = x[2]
    p_tank = p[15]
    dp = ps - pr
    q_main = hy.k_pump_flow(p[4], p[5], p[3], dp)
    cross, drain = hy.k_motor_leakage(p[7], p[8], dp, 0.5 * (ps + pr) - p_tank)
    q_motor = p[6] * w + cross + drain
    q_rvm = hy.k_valve_flow(p[16], p[17], dp)
    q_ideal = p[1] * p[0]
    pb = hy.k_solve_boost_node(q_ideal, p[2], p[18], p[19], p[20], p[21], p_tank, pr)
    q_boost = q_ideal - p[2] * (pb - p_tank)
    q_rvf = hy.k_valve_flow(p[18], p[19], pb - p_tank)
    q_cv = hy.k_valve_flow(p[20], p[21], pb - pr)
    return q_main, q_rvm, q_boost, q_rvf, q_cv, q_motor, drain, pb


@nb.njit(cache=True)
def _flows_b(x, p, out):
    q_main, q_rvm, q_boost, q_rvf, q_cv, q_motor, drain, pb = _core_b(x, p)
    out[0] = q_main
    out[1] = q_rvm
    out[2] = q_boost
    out[3] = q_rvf
    out[4] = q_cv
    out[5] = q_motor
    out[6] = drain
    out[7] = pb


@nb.njit(cache=True)
def _rhs_b(t, x, p, out):
    q_main, q_rvm, q_boost, q_rvf, q_cv, q_motor, drain, pb = _core_b(x, p)
    ps = x[0]
    pr = x[1]
    w = x[2]
    out[0] = hy.k_pipe_rate(p[11], p[12], q_main - q_motor - q_rvm, ps, p[14])
    out[1] = hy.k_pipe_rate(p[11], p[13], q_motor - drain + q_rvm + q_cv - q_main,
                            pr, p[14])
    torque = hy.k_motor_torque(p[6], p[9], p[10], w, ps - pr)
    out[2] = hy.k_load_accel(p[22], p[23], p[24], p[25], p[26], p[27], torque, w)


def _pack(names, values: dict) -> np.ndarray:
    return np.array([float(values[n]) for n in names], dtype=np.float64)


def _load(cal: CalibrationRecord) -> hy.LoadParams:
    return hy.LoadParams(
        inertia=cal.load_inertia_kgm2, stiction=cal.load_stiction_nm,
        coulomb=cal.load_coulomb_nm, viscous=cal.load_viscous_nm_per_rad_s,
        windage=cal.load_windage_nm_per_rad2_s2,
        applied_torque=cal.load_applied_torque_nm)


def _load_a(cal: CalibrationRecord) -> hy.LoadParams:
    return hy.LoadParams(
        inertia=cal.load_a_inertia_kgm2, stiction=cal.load_a_stiction_nm,
        coulomb=cal.load_a_coulomb_nm, viscous=cal.load_a_viscous_nm_per_rad_s,
        windage=cal.load_windage_nm_per_rad2_s2,
        applied_torque=cal.load_applied_torque_nm)


def _pipe(cal: CalibrationRecord, diameter: float) -> hy.PipeParams:
    return hy.PipeParams(diameter=diameter, length=cal.pipe_length_m,
                         bulk_modulus=cal.bulk_modulus_pa,
                         vapor_floor=cal.vapor_floor_pa)


def _load_fields(load: hy.LoadParams) -> dict:
    return dict(inertia=load.inertia, stiction=load.stiction, coulomb=load.coulomb,
                viscous=load.viscous, windage=load.windage, applied=load.applied_torque)


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------


def build_circuit_a(dp: DesignPointA, cal: CalibrationRecord | None = None) -> CircuitNetwork:
    cal = cal or CalibrationRecord()
    if not isinstance(dp, DesignPointA):
        dp = DesignPointA(*dp)
    pm = hy.PrimeMoverParams(cal.prime_mover_a_rpm)
    pump = hy.PumpParams(dp.pump_disp, cal.pump_slip_lpm_per_bar)
    motor = hy.MotorParams(dp.motor_disp, cal.motor_slip_a_lpm_per_bar,
                           cal.motor_visc_friction_nm_per_rad_s,
                           cal.motor_press_friction_nm_per_bar)
    relief = hy.ReliefValveParams(cal.relief_cracking_bar, cal.relief_gradient_lpm_per_bar)
    pipe = _pipe(cal, dp.pipe_diameter)
    vol = pipe.volume + cal.port_volume_l * 1e-3
    load = _load_a(cal)
    values = dict(
        pm_omega=pm.speed_si, pump_disp=pump.displacement_si, pump_slip=pump.slip_si,
        motor_disp=motor.displacement_si, motor_slip=motor.slip_si,
        motor_drain=motor.drain_ratio, motor_visc=motor.visc_friction,
        motor_pfric=motor.press_friction / BAR, beta=pipe.bulk_modulus,
        vol_s=vol, vol_r=vol, floor=pipe.vapor_floor, p_tank=P_TANK,
        rv_crack=relief.cracking_si, rv_grad=relief.gradient_si,
        tank_port=hy.lpm_per_bar_to_si(cal.tank_port_lpm_per_bar), unused=0.0,
        **_load_fields(load))
    return CircuitNetwork(
        name="A",
        state_names=("p_supply", "p_return", "motor_speed"),
        flow_names=("q_pump", "q_relief", "q_motor", "q_tank", "q_drain"),
        rhs=_rhs_a, flows=_flows_a,
        params=_pack(_A_FIELDS, values),
        init=np.array([P_TANK, P_TANK, 0.0]),
        lower=np.array([pipe.vapor_floor, pipe.vapor_floor, -np.inf]),
        speed_index=2,
        pump_flows={"main": "q_pump"},
        relief_flows={"main": "q_relief"},
        meta={"design": dp, "motor": motor, "pump": pump},
    )


def motor_b_params(cal: CalibrationRecord, fault: FaultConfig,
                   slip: float | None = None) -> hy.MotorParams:
    if slip is None:
        slip = (cal.motor_b_slip_faulty_lpm_per_bar if fault.faulty
                else cal.motor_b_slip_nominal_lpm_per_bar)
    return hy.MotorParams(cal.motor_b_disp_cc, slip,
                          cal.motor_visc_friction_nm_per_rad_s,
                          cal.motor_press_friction_nm_per_bar, cal.motor_b_drain_ratio)


def build_circuit_b(dp: DesignPointB, fault: FaultConfig | None = None,
                    cal: CalibrationRecord | None = None, *,
                    motor_slip: float | None = None) -> CircuitNetwork:
    """``motor_slip`` overrides the calibrated slip (used while calibrating)."""
    cal = cal or CalibrationRecord()
    fault = fault or FaultConfig()
    if not isinstance(dp, DesignPointB):
        dp = DesignPointB(*dp)
    pm1 = hy.PrimeMoverParams(dp.pm1_speed)
    pm2 = hy.PrimeMoverParams(dp.pm2_speed)
    boost = hy.PumpParams(dp.pump1_disp, cal.boost_pump_slip_lpm_per_bar)
    main = hy.PumpParams(dp.pump2_disp, cal.pump_slip_lpm_per_bar)
    motor = motor_b_params(cal, fault, motor_slip)
    rv_main = hy.ReliefValveParams(cal.relief_cracking_bar, cal.relief_gradient_lpm_per_bar)
    rv_feed = hy.ReliefValveParams(cal.relief_cracking_bar, cal.relief_gradient_lpm_per_bar)
    check = hy.CheckValveParams(cal.check_cracking_bar, cal.check_gradient_lpm_per_bar)
    pipe = _pipe(cal, cal.pipe_b_diameter_mm)
    vol = pipe.volume + cal.port_volume_l * 1e-3
    load = _load(cal)
    values = dict(
        pm1_omega=pm1.speed_si, boost_disp=boost.displacement_si, boost_slip=boost.slip_si,
        pm2_omega=pm2.speed_si, main_disp=main.displacement_si, main_slip=main.slip_si,
        motor_disp=motor.displacement_si, motor_slip=motor.slip_si,
        motor_drain=motor.drain_ratio, motor_visc=motor.visc_friction,
        motor_pfric=motor.press_friction / BAR, beta=pipe.bulk_modulus,
        vol_s=vol, vol_r=vol, floor=pipe.vapor_floor, p_tank=P_TANK,
        rvm_crack=rv_main.cracking_si, rvm_grad=rv_main.gradient_si,
        rvf_crack=rv_feed.cracking_si, rvf_grad=rv_feed.gradient_si,
        cv_crack=check.cracking_si, cv_grad=check.gradient_si, **_load_fields(load))
    return CircuitNetwork(
        name="B",
        state_names=("p_supply", "p_return", "motor_speed"),
        flow_names=("q_main", "q_relief_main", "q_boost", "q_relief_feeder",
                    "q_check", "q_motor", "q_drain", "p_boost"),
        rhs=_rhs_b, flows=_flows_b,
        params=_pack(_B_FIELDS, values),
        init=np.array([P_TANK, P_TANK, 0.0]),
        lower=np.array([pipe.vapor_floor, pipe.vapor_floor, -np.inf]),
        speed_index=2,
        pump_flows={"main": "q_main", "feeder": "q_boost"},
        relief_flows={"main": "q_relief_main", "feeder": "q_relief_feeder"},
        meta={"design": dp, "motor": motor, "fault": fault},
    )


# ---------------------------------------------------------------------------
# Objectives
# ---------------------------------------------------------------------------


def _relief_factor(relief: float, pump: float) -> float:
    return 1.0 + relief / pump


def objective_a(m: TerminalMetrics, dp: DesignPointA,
                cfg: ObjectiveConfigA | None = None) -> float:
    """Squared speed error scaled by pump-size and relief-flow penalties."""
    cfg = cfg or ObjectiveConfigA()
    q = m.pump_flow["main"]
    if not q > 0 or not math.isfinite(m.motor_speed):
        return PENALTY
    err = cfg.desired_speed - m.motor_speed
    return (err * err * (1.0 + dp.pump_disp / cfg.pump_upper_bound)
            * _relief_factor(m.relief_flow["main"], q))


def objective_b(m: TerminalMetrics, cfg: ObjectiveConfigB | None = None) -> float:
    """Squared speed error scaled by the main and feeder relief-flow ratios."""
    cfg = cfg or ObjectiveConfigB()
    q_main = m.pump_flow["main"]
    q_feed = m.pump_flow["feeder"]
    if not (q_main > 0 and q_feed > 0) or not math.isfinite(m.motor_speed):
        return PENALTY
    err = cfg.desired_speed - m.motor_speed
    return (err * err * _relief_factor(m.relief_flow["main"], q_main)
            * _relief_factor(m.relief_flow["feeder"], q_feed))


def lossless_speed(pm_speed: float, pump_disp: float, motor_disp: float) -> float:
    """Motor speed (rpm) of an ideal transmission."""
    if motor_disp <= 0:
        raise DomainError("motor displacement must be > 0")
    return pm_speed * pump_disp / motor_disp


# ---------------------------------------------------------------------------
# Fault calibration
# ---------------------------------------------------------------------------

REFERENCE_POINT_B = DesignPointB(43, 678, 696, 276)


def motor_volumetric_efficiency(result: SimulationResult, network: CircuitNetwork) -> float:
    """Ideal over actual motor intake flow at the end of a run."""
    w = result.final_state[network.speed_index]
    q_motor = result.flows[-1, network.flow_index("q_motor")]
    ideal = network.meta["motor"].displacement_si * w
    if q_motor <= 0:
        raise CalibrationError("motor intake flow is not positive at the reference point")
    return ideal / q_motor


def calibrate_fault(cal: CalibrationRecord, fault: FaultConfig,
                    ref_point: DesignPointB = REFERENCE_POINT_B,
                    integ: IntegratorConfig | None = None,
                    slip_max: float = 10.0, tol: float = 1e-5) -> float:
    """Motor slip coefficient ((L/min)/bar) giving the target volumetric
    efficiency at ``ref_point``, by bisection on ``[0, slip_max]``."""
    target = fault.target_volumetric_eff
    if target >= 1.0:
        return 0.0

    def eff(slip: float) -> float:
        net = build_circuit_b(ref_point, fault, cal, motor_slip=slip)
        try:
            res = integrate(net, cfg=integ)
        except DivergedSimulationError as exc:
            raise CalibrationError(f"reference point diverged at slip {slip}") from exc
        return motor_volumetric_efficiency(res, net)

    lo, hi = 0.0, slip_max
    e_hi = eff(hi)
    if e_hi > target:
        raise CalibrationError(
            f"slip {slip_max} (L/min)/bar still gives efficiency {e_hi:.4f} > {target}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        e = eff(mid)
        if abs(e - target) < tol:
            return mid
        if e > target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    return 0.5 * (lo + hi)


def calibrated(cal: CalibrationRecord | None = None,
               integ: IntegratorConfig | None = None) -> CalibrationRecord:
    """Return ``cal`` with both circuit B motor slip coefficients solved."""
    cal = cal or CalibrationRecord()
    faulty = calibrate_fault(cal, FaultConfig(True, cal.target_eff_faulty), integ=integ)
    nominal = calibrate_fault(cal, FaultConfig(False, cal.target_eff_nominal), integ=integ)
    return replace(cal, motor_b_slip_faulty_lpm_per_bar=faulty,
                   motor_b_slip_nominal_lpm_per_bar=nominal)


# ---------------------------------------------------------------------------
# Objective callables for the optimizers
# ---------------------------------------------------------------------------


class CircuitProblem:
    """Design-space objective for one circuit.

    Calling the problem with a tuple of grid values returns the objective.
    Simulation results are memoized per design point; the objective is a
    pure function of the point so this only saves time.
    """

    def __init__(self, circuit: str, cal: CalibrationRecord | None = None,
                 fault: FaultConfig | None = None,
                 integ: IntegratorConfig | None = None,
                 desired_speed: float = 300.0):
        circuit = circuit.upper()
        if circuit not in ("A", "B"):
            raise ValueError(f"unknown circuit {circuit!r}")
        self.circuit = circuit
        self.cal = cal or CalibrationRecord()
        self.fault = fault or FaultConfig()
        self.integ = integ or IntegratorConfig()
        self.desired_speed = desired_speed
        self.space = SPACE_A if circuit == "A" else SPACE_B
        self._cache: dict[tuple, float] = {}

    def design(self, values) -> DesignPointA | DesignPointB:
        return DesignPointA(*values) if self.circuit == "A" else DesignPointB(*values)

    def network(self, values) -> CircuitNetwork:
        dp = self.design(values)
        if self.circuit == "A":
            return build_circuit_a(dp, self.cal)
        return build_circuit_b(dp, self.fault, self.cal)

    def simulate(self, values, integ: IntegratorConfig | None = None) -> SimulationResult:
        return integrate(self.network(values), cfg=integ or self.integ)

    def score(self, metrics: TerminalMetrics, values) -> float:
        if self.circuit == "A":
            return objective_a(metrics, self.design(values),
                               ObjectiveConfigA(self.desired_speed))
        return objective_b(metrics, ObjectiveConfigB(self.desired_speed))

    def __call__(self, values) -> float:
        key = tuple(values)
        if key not in self._cache:
            try:
                res = self.simulate(key)
                self._cache[key] = self.score(res.terminal, key)
            except DivergedSimulationError:
                self._cache[key] = PENALTY
        return self._cache[key]
