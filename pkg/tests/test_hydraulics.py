import math

import pytest
from hypothesis import given, settings, strategies as st

from hydro_opt import hydraulics as hy
from hydro_opt.hydraulics import BAR, LPM, RPM


def test_unit_conversions():
    assert hy.cc_per_rev_to_si(2 * math.pi) == pytest.approx(1e-6)
    assert hy.si_to_cc_per_rev(hy.cc_per_rev_to_si(324.0)) == pytest.approx(324.0)
    assert hy.lpm_per_bar_to_si(60000.0) == pytest.approx(1e-5)


def test_pump_flow_hand_arithmetic():
    # 100 cc/rev at 1500 rpm = 150 L/min, minus 1 (L/min)/bar * 10 bar
    p = hy.PumpParams(100.0, slip_coeff=1.0)
    q = hy.pump_flow(p, 1500 * RPM, 10 * BAR)
    assert q / LPM == pytest.approx(140.0)


def test_motor_flow_torque_and_efficiency():
    m = hy.MotorParams(200.0, slip_coeff=0.5, drain_ratio=0.5)
    q, torque = hy.motor_behavior(m, 300 * RPM, 20 * BAR, p_mean_gauge=10 * BAR)
    # 60 ideal + 10 cross-port + 0.5 * 0.5 * 10 drain
    assert q / LPM == pytest.approx(72.5)
    assert torque == pytest.approx(200e-6 / (2 * math.pi) * 20e5)
    eta = hy.volumetric_efficiency(m, 300 * RPM, 20 * BAR, 10 * BAR)
    assert eta == pytest.approx(60.0 / 72.5)


def test_motor_friction_opposes_motion():
    m = hy.MotorParams(100.0, visc_friction=2.0, press_friction=1.0)
    _, t_fwd = hy.motor_behavior(m, 10.0, 10 * BAR)
    ideal = 100e-6 / (2 * math.pi) * 10 * BAR
    assert t_fwd == pytest.approx(ideal - 20.0 - 10.0)


def test_relief_valve_law():
    v = hy.ReliefValveParams(100.0, 10.0)
    assert hy.relief_valve_flow(v, 99.0 * BAR) == 0.0
    assert hy.relief_valve_flow(v, 100.0 * BAR) == 0.0
    assert hy.relief_valve_flow(v, 105.0 * BAR) / LPM == pytest.approx(50.0)


def test_check_valve_law():
    v = hy.CheckValveParams(0.5, 50.0)
    assert hy.check_valve_flow(v, -1.0 * BAR) == 0.0
    assert hy.check_valve_flow(v, 1.5 * BAR) / LPM == pytest.approx(50.0)


def test_pipe_volume_and_rate():
    p = hy.PipeParams(20.0, length=1.0, bulk_modulus=1.4e9)
    assert p.volume == pytest.approx(math.pi * 0.01 ** 2)
    rate = hy.pipe_pressure_rate(p, 1e-4, 50 * BAR)
    assert rate == pytest.approx(1.4e9 * 1e-4 / p.volume)
    rate2 = hy.pipe_pressure_rate(p, 1e-4, 50 * BAR, extra_volume=p.volume)
    assert rate2 == pytest.approx(rate / 2)


def test_pipe_vapor_floor_blocks_further_drop():
    p = hy.PipeParams(20.0)
    assert hy.pipe_pressure_rate(p, -1e-4, p.vapor_floor) == 0.0
    assert hy.pipe_pressure_rate(p, 1e-4, p.vapor_floor) > 0.0


def test_load_stiction_and_friction():
    load = hy.LoadParams(inertia=10.0, stiction=20.0, coulomb=10.0, viscous=1.0,
                         windage=0.5)
    assert hy.load_acceleration(load, 15.0, 0.0) == 0.0
    assert hy.load_acceleration(load, 30.0, 0.0) == pytest.approx((30.0 - 10.0) / 10.0)
    # moving at 2 rad/s: friction 10 + 2 + 0.5 * 4
    assert hy.load_acceleration(load, 30.0, 2.0) == pytest.approx((30.0 - 14.0) / 10.0)
    assert hy.load_acceleration(load, 0.0, -2.0) == pytest.approx(14.0 / 10.0)


def test_applied_torque_subtracts():
    load = hy.LoadParams(inertia=2.0, applied_torque=5.0)
    assert hy.load_acceleration(load, 9.0, 1.0) == pytest.approx(2.0)


@pytest.mark.parametrize("factory", [
    lambda: hy.PumpParams(0.0), lambda: hy.PumpParams(10.0, slip_coeff=-1.0),
    lambda: hy.MotorParams(-1.0), lambda: hy.MotorParams(10.0, drain_ratio=-0.1),
    lambda: hy.ReliefValveParams(0.0), lambda: hy.ReliefValveParams(100.0, 0.0),
    lambda: hy.CheckValveParams(-1.0), lambda: hy.PipeParams(0.0),
    lambda: hy.LoadParams(inertia=0.0), lambda: hy.LoadParams(coulomb=-1.0),
    lambda: hy.PrimeMoverParams(0.0),
])
def test_parameter_validation(factory):
    with pytest.raises(ValueError):
        factory()


def _residual(p, q, slip, rc, rg, cc, cg, pt, pd):
    r = q - slip * (p - pt)
    r -= hy.k_valve_flow(rc, rg, p - pt)
    r -= hy.k_valve_flow(cc, cg, p - pd)
    return r


@settings(max_examples=200, deadline=None)
@given(q=st.floats(0.0, 1e-2), slip=st.floats(1e-12, 1e-9),
       rc=st.floats(1e5, 2e7), cc=st.floats(0.0, 1e5),
       pd=st.floats(1e3, 2e7))
def test_boost_node_root_is_exact(q, slip, rc, cc, pd):
    rg, cg = hy.lpm_per_bar_to_si(10.0), hy.lpm_per_bar_to_si(50.0)
    pt = hy.P_TANK
    p = hy.k_solve_boost_node(q, slip, rc, rg, cc, cg, pt, pd)
    scale = max(q, 1e-9)
    assert abs(_residual(p, q, slip, rc, rg, cc, cg, pt, pd)) <= 1e-6 * scale
