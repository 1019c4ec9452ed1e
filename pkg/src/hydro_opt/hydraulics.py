"""Lumped component models for hydrostatic circuits.

Every model is an algebraic port law (flow or torque as a function of the
current pressures and speeds) except the pipe, which turns net inflow into a
pressure rate. Parameters are held in user units (cc/rev, bar, L/min, rpm);
the ``*_si`` properties and the ``k_*`` kernels work strictly in SI so they
can be called from compiled circuit derivative functions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba as nb

# Unit conversions (exact).
BAR = 1.0e5  # Pa
LPM = 1.0 / 60000.0  # m^3/s
RPM = math.pi / 30.0  # rad/s
CC = 1.0e-6  # m^3

P_TANK = 101325.0  # Pa absolute
VAPOR_FLOOR = 1000.0  # Pa absolute
STICTION_BAND = 1.0e-4  # rad/s


def cc_per_rev_to_si(disp_cc: float) -> float:
    """Displacement in cc/rev to m^3/rad."""
    return disp_cc * CC / (2.0 * math.pi)


def si_to_cc_per_rev(disp_si: float) -> float:
    return disp_si * 2.0 * math.pi / CC


def lpm_per_bar_to_si(coeff: float) -> float:
    """Flow coefficient in (L/min)/bar to m^3/(s*Pa)."""
    return coeff * LPM / BAR


# ---------------------------------------------------------------------------
# Parameter records
# ---------------------------------------------------------------------------


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


@dataclass(frozen=True)
class PumpParams:
    """Fixed displacement pump (PU01)."""

    displacement: float  # cc/rev
    slip_coeff: float = 0.0  # (L/min)/bar
    visc_friction: float = 0.0  # N*m/(rad/s)
    press_friction: float = 0.0  # N*m/bar

    def __post_init__(self):
        _require(self.displacement > 0, "pump displacement must be > 0")
        _require(self.slip_coeff >= 0, "slip_coeff must be >= 0")
        _require(self.visc_friction >= 0 and self.press_friction >= 0,
                 "friction coefficients must be >= 0")

    @property
    def displacement_si(self) -> float:
        return cc_per_rev_to_si(self.displacement)

    @property
    def slip_si(self) -> float:
        return lpm_per_bar_to_si(self.slip_coeff)


@dataclass(frozen=True)
class MotorParams:
    """Fixed displacement motor (MO01).

    Leakage has a cross-port part ``slip_coeff * dp`` and an external part
    to drain, ``drain_ratio * slip_coeff * p_mean`` where ``p_mean`` is the
    mean port pressure above tank.
    """

    displacement: float  # cc/rev
    slip_coeff: float = 0.0  # (L/min)/bar
    visc_friction: float = 0.0  # N*m/(rad/s)
    press_friction: float = 0.0  # N*m/bar
    drain_ratio: float = 0.0

    def __post_init__(self):
        _require(self.displacement > 0, "motor displacement must be > 0")
        _require(self.slip_coeff >= 0, "slip_coeff must be >= 0")
        _require(self.drain_ratio >= 0, "drain_ratio must be >= 0")
        _require(self.visc_friction >= 0 and self.press_friction >= 0,
                 "friction coefficients must be >= 0")

    @property
    def displacement_si(self) -> float:
        return cc_per_rev_to_si(self.displacement)

    @property
    def slip_si(self) -> float:
        return lpm_per_bar_to_si(self.slip_coeff)


@dataclass(frozen=True)
class ReliefValveParams:
    """Single stage relief valve (RV00)."""

    cracking_pressure: float = 100.0  # bar
    gradient: float = 10.0  # (L/min)/bar above cracking

    def __post_init__(self):
        _require(self.cracking_pressure > 0, "cracking_pressure must be > 0")
        _require(self.gradient > 0, "gradient must be > 0")

    @property
    def cracking_si(self) -> float:
        return self.cracking_pressure * BAR

    @property
    def gradient_si(self) -> float:
        return lpm_per_bar_to_si(self.gradient)


@dataclass(frozen=True)
class CheckValveParams:
    """Free or spring loaded check valve (CV00)."""

    cracking_pressure: float = 0.0  # bar
    gradient: float = 50.0  # (L/min)/bar

    def __post_init__(self):
        _require(self.cracking_pressure >= 0, "cracking_pressure must be >= 0")
        _require(self.gradient > 0, "gradient must be > 0")

    @property
    def cracking_si(self) -> float:
        return self.cracking_pressure * BAR

    @property
    def gradient_si(self) -> float:
        return lpm_per_bar_to_si(self.gradient)


@dataclass(frozen=True)
class PipeParams:
    """Frictionless constant volume compressible pipe (HP00)."""

    diameter: float  # mm
    length: float = 1.0  # m
    bulk_modulus: float = 1.4e9  # Pa
    vapor_floor: float = VAPOR_FLOOR  # Pa absolute

    def __post_init__(self):
        _require(self.diameter > 0, "pipe diameter must be > 0")
        _require(self.length > 0, "pipe length must be > 0")
        _require(self.bulk_modulus > 0, "bulk modulus must be > 0")

    @property
    def volume(self) -> float:
        """Internal volume in m^3."""
        r = 0.5 * self.diameter * 1e-3
        return math.pi * r * r * self.length


@dataclass(frozen=True)
class LoadParams:
    """Rotary inertia load (RL01)."""

    inertia: float = 50.0  # kg*m^2
    stiction: float = 0.0  # N*m
    coulomb: float = 0.0  # N*m
    viscous: float = 0.0  # N*m/(rad/s)
    windage: float = 0.0  # N*m/(rad/s)^2
    applied_torque: float = 0.0  # N*m

    def __post_init__(self):
        _require(self.inertia > 0, "inertia must be > 0")
        _require(min(self.stiction, self.coulomb, self.viscous, self.windage) >= 0,
                 "friction terms must be >= 0")


@dataclass(frozen=True)
class PrimeMoverParams:
    """Constant speed prime mover (PM01)."""

    speed: float = 1500.0  # rpm

    def __post_init__(self):
        _require(self.speed > 0, "prime mover speed must be > 0")

    @property
    def speed_si(self) -> float:
        return self.speed * RPM


# ---------------------------------------------------------------------------
# SI kernels, callable from compiled derivative functions
# ---------------------------------------------------------------------------


@nb.njit(cache=True)
def k_pump_flow(disp, slip, omega, dp):
    return disp * omega - slip * dp


@nb.njit(cache=True)
def k_motor_leakage(slip, drain_ratio, dp, p_mean_gauge):
    """Return (cross-port leak, drain leak) in m^3/s."""
    cross = slip * dp
    drain = drain_ratio * slip * p_mean_gauge
    if drain < 0.0:
        drain = 0.0
    return cross, drain


@nb.njit(cache=True)
def k_motor_torque(disp, visc, press_fric, omega, dp):
    t = disp * dp - visc * omega
    if omega > 0.0:
        t -= press_fric * abs(dp)
    elif omega < 0.0:
        t += press_fric * abs(dp)
    return t


@nb.njit(cache=True)
def k_valve_flow(cracking, gradient, dp):
    """Linear valve law shared by relief and check valves."""
    if dp <= cracking:
        return 0.0
    return gradient * (dp - cracking)


@nb.njit(cache=True)
def k_pipe_rate(beta, volume, q_net, pressure, floor):
    if pressure <= floor and q_net < 0.0:
        return 0.0
    return beta * q_net / volume


@nb.njit(cache=True)
def k_load_accel(inertia, stiction, coulomb, viscous, windage, applied,
                 torque, omega):
    drive = torque - applied
    if abs(omega) < STICTION_BAND:
        if abs(drive) <= stiction:
            return 0.0
        s = 1.0 if drive > 0.0 else -1.0
        return (drive - s * coulomb) / inertia
    s = 1.0 if omega > 0.0 else -1.0
    w = abs(omega)
    fric = coulomb + viscous * w + windage * w * w
    return (drive - s * fric) / inertia


@nb.njit(cache=True)
def k_solve_boost_node(q_ideal, slip, rv_crack, rv_grad, cv_crack, cv_grad,
                       p_tank, p_down):
    """Pressure of a zero-volume node fed by a pump and drained by a relief
    valve (to tank) and a check valve (to ``p_down``).

    Solves ``q_ideal - slip*(p - p_tank) - Qrv(p) - Qcv(p) = 0``; the
    residual is piecewise linear and non-increasing in ``p`` so the root is
    found exactly by locating the bracketing segment.
    """
    b1 = p_tank + rv_crack
    b2 = p_down + cv_crack
    lo = b1 if b1 < b2 else b2
    hi = b2 if b1 < b2 else b1

    def resid(p):
        r = q_ideal - slip * (p - p_tank)
        if p > b1:
            r -= rv_grad * (p - b1)
        if p > b2:
            r -= cv_grad * (p - b2)
        return r

    r_lo = resid(lo)
    if r_lo <= 0.0:
        if slip <= 0.0:
            return lo
        return lo + r_lo / slip
    r_hi = resid(hi)
    if r_hi <= 0.0:
        # root inside [lo, hi]; single valve open there
        return lo + r_lo * (hi - lo) / (r_lo - r_hi)
    return hi + r_hi / (slip + rv_grad + cv_grad)


# ---------------------------------------------------------------------------
# Parameter-level operations
# ---------------------------------------------------------------------------


def pump_flow(p: PumpParams, shaft_speed: float, dp: float) -> float:
    """Delivered flow (m^3/s) at shaft speed (rad/s) against dp (Pa)."""
    return k_pump_flow(p.displacement_si, p.slip_si, shaft_speed, dp)


def motor_behavior(m: MotorParams, shaft_speed: float, dp: float,
                   p_mean_gauge: float = 0.0) -> tuple[float, float]:
    """Return (intake flow m^3/s, shaft torque N*m).

    ``p_mean_gauge`` is only needed when the motor drains externally.
    """
    cross, drain = k_motor_leakage(m.slip_si, m.drain_ratio, dp, p_mean_gauge)
    q_in = m.displacement_si * shaft_speed + cross + drain
    torque = k_motor_torque(m.displacement_si, m.visc_friction,
                            m.press_friction / BAR, shaft_speed, dp)
    return q_in, torque


def volumetric_efficiency(m: MotorParams, shaft_speed: float, dp: float,
                          p_mean_gauge: float = 0.0) -> float:
    """Ideal displacement flow over actual intake flow."""
    q_in, _ = motor_behavior(m, shaft_speed, dp, p_mean_gauge)
    ideal = m.displacement_si * shaft_speed
    if q_in == 0.0:
        return 1.0
    return ideal / q_in


def relief_valve_flow(v: ReliefValveParams, p_upstream: float) -> float:
    """Flow (m^3/s) for a pressure (Pa) above the valve outlet."""
    return k_valve_flow(v.cracking_si, v.gradient_si, p_upstream)


def check_valve_flow(v: CheckValveParams, dp: float) -> float:
    return k_valve_flow(v.cracking_si, v.gradient_si, dp)


def pipe_pressure_rate(p: PipeParams, net_inflow: float, pressure: float,
                       extra_volume: float = 0.0) -> float:
    """dP/dt (Pa/s); ``extra_volume`` adds lumped port volume (m^3)."""
    return k_pipe_rate(p.bulk_modulus, p.volume + extra_volume, net_inflow,
                       pressure, p.vapor_floor)


def load_acceleration(l: LoadParams, net_torque: float, speed: float) -> float:
    return k_load_accel(l.inertia, l.stiction, l.coulomb, l.viscous,
                        l.windage, l.applied_torque, net_torque, speed)
