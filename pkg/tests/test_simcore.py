import math

import numba as nb
import numpy as np
import pytest

from hydro_opt.simcore import (CircuitNetwork, DivergedSimulationError,
                               IntegratorConfig, derivative, integrate)


@nb.njit
def _decay_rhs(t, x, p, out):
    out[0] = -p[0] * x[0]


@nb.njit
def _zero_rhs(t, x, p, out):
    out[0] = 0.0


@nb.njit
def _blowup_rhs(t, x, p, out):
    out[0] = x[0] * x[0]


@nb.njit
def _echo_flows(x, p, out):
    out[0] = 2.0 * x[0]


def _scalar(rhs, x0=1.0, rate=1.0, flows=_echo_flows):
    return CircuitNetwork(
        name="scalar", state_names=("x",), flow_names=("twice_x",),
        rhs=rhs, flows=flows, params=np.array([rate]), init=np.array([x0]),
        lower=np.array([-np.inf]), speed_index=0)


def test_rk4_exponential_decay_matches_closed_form():
    cfg = IntegratorConfig(dt=0.01, duration=1.0, sample_every=1)
    res = integrate(_scalar(_decay_rhs), cfg=cfg)
    assert abs(res.final_state[0] - math.exp(-1.0)) < 1e-8


def test_euler_is_first_order():
    cfg = IntegratorConfig(method="euler", dt=0.01, duration=1.0, sample_every=1)
    res = integrate(_scalar(_decay_rhs), cfg=cfg)
    assert res.final_state[0] == pytest.approx(0.99 ** 100, rel=1e-12)


def test_zero_derivative_holds_state():
    res = integrate(_scalar(_zero_rhs, x0=5.0), cfg=IntegratorConfig(duration=4.0))
    assert res.final_state[0] == 5.0


def test_sample_grid_and_first_row():
    cfg = IntegratorConfig(dt=1e-3, duration=4.0, sample_every=10)
    res = integrate(_scalar(_decay_rhs), cfg=cfg)
    assert len(res) == 401 == cfg.n_samples
    assert res.t[0] == 0.0 and res.states[0, 0] == 1.0
    assert res.t[-1] == pytest.approx(4.0, abs=5e-4)
    assert np.all(np.diff(res.t) > 0)


def test_flows_follow_states():
    res = integrate(_scalar(_decay_rhs), cfg=IntegratorConfig(duration=1.0))
    np.testing.assert_array_equal(res.flow("twice_x"), 2.0 * res.state("x"))
    assert res.terminal.motor_speed == pytest.approx(res.final_state[0] * 30 / math.pi)


def test_deterministic():
    net = _scalar(_decay_rhs)
    a = integrate(net)
    b = integrate(net)
    np.testing.assert_array_equal(a.states, b.states)


def test_python_callables_match_compiled():
    def rhs(t, x, p, out):
        out[0] = -p[0] * x[0]

    def flows(x, p, out):
        out[0] = 2.0 * x[0]

    cfg = IntegratorConfig(dt=0.01, duration=1.0)
    a = integrate(_scalar(_decay_rhs), cfg=cfg)
    b = integrate(_scalar(rhs, flows=flows), cfg=cfg)
    np.testing.assert_array_equal(a.states, b.states)


def test_divergence_reports_time():
    cfg = IntegratorConfig(dt=0.01, duration=4.0, sample_every=1)
    with pytest.raises(DivergedSimulationError) as info:
        integrate(_scalar(_blowup_rhs, x0=10.0), cfg=cfg)
    # x' = x^2 from 10 blows up at t = 0.1
    assert 0.05 < info.value.time < 0.5


def test_lower_bound_is_enforced():
    net = _scalar(_decay_rhs, x0=1.0, rate=1.0)
    net.lower = np.array([0.5])
    res = integrate(net, cfg=IntegratorConfig(duration=2.0))
    assert res.states[:, 0].min() == 0.5


def test_derivative_helper():
    out = derivative(_scalar(_decay_rhs, rate=3.0), np.array([2.0]))
    assert out[0] == -6.0
    with pytest.raises(ValueError):
        derivative(_scalar(_decay_rhs), np.array([1.0, 2.0]))


def test_bad_initial_state_shape():
    with pytest.raises(ValueError):
        integrate(_scalar(_decay_rhs), init=np.zeros(2))


@pytest.mark.parametrize("kwargs", [
    dict(method="rk45"), dict(dt=0.0), dict(duration=-1.0), dict(sample_every=0),
    dict(dt=0.3, duration=1.0), dict(dt=1e-3, duration=4.0, sample_every=7),
])
def test_integrator_config_validation(kwargs):
    with pytest.raises(ValueError):
        IntegratorConfig(**kwargs)


def test_network_layout_validation():
    with pytest.raises(ValueError):
        CircuitNetwork("bad", ("x", "x"), (), _zero_rhs, _echo_flows, np.zeros(1),
                       np.zeros(2), np.zeros(2), 0)
