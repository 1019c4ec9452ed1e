"""Fixed step integration of circuit networks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numba.core.dispatcher import Dispatcher
import numba as nb

from .hydraulics import LPM, RPM

METHODS = ("rk4", "euler")


class DivergedSimulationError(RuntimeError):
    """A state value became non-finite during integration."""

    def __init__(self, time: float, message: str | None = None):
        self.time = time
        super().__init__(message or f"simulation diverged at t = {time:.6g} s")


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk4"
    dt: float = 1.0e-3
    duration: float = 4.0
    sample_every: int = 10

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if not self.duration > 0:
            raise ValueError("duration must be > 0")
        if self.sample_every < 1:
            raise ValueError("sample_every must be >= 1")
        n = self.duration / self.dt
        if abs(n - round(n)) > 1e-6 * max(1.0, n):
            raise ValueError("duration must be an integer number of steps")
        if round(n) % self.sample_every:
            raise ValueError("step count must be a multiple of sample_every")

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))

    @property
    def n_samples(self) -> int:
        return self.n_steps // self.sample_every + 1


@dataclass(frozen=True)
class TerminalMetrics:
    """Values at the end of the run in table units (rpm, L/min)."""

    motor_speed: float
    pump_flow: dict[str, float]
    relief_flow: dict[str, float]


@dataclass
class CircuitNetwork:
    """A circuit reduced to compiled kernels over a flat parameter vector.

    ``rhs(t, x, params, out)`` writes dx/dt into ``out``.
    ``flows(x, params, out)`` writes the derived port flows (SI) into ``out``.
    ``metrics`` maps a final state and its derived flows to TerminalMetrics.
    """

    name: str
    state_names: tuple[str, ...]
    flow_names: tuple[str, ...]
    rhs: Callable
    flows: Callable
    params: np.ndarray
    init: np.ndarray
    lower: np.ndarray
    speed_index: int
    pump_flows: dict[str, str] = field(default_factory=dict)
    relief_flows: dict[str, str] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.state_names)) != len(self.state_names):
            raise ValueError("state names must be unique")
        n = len(self.state_names)
        if self.init.shape != (n,) or self.lower.shape != (n,):
            raise ValueError("init/lower must match the state layout")

    def state_index(self, name: str) -> int:
        return self.state_names.index(name)

    def flow_index(self, name: str) -> int:
        return self.flow_names.index(name)

    def derivative(self, state: np.ndarray, t: float = 0.0) -> np.ndarray:
        return derivative(self, state, t)

    def derived_flows(self, state: np.ndarray) -> np.ndarray:
        out = np.zeros(len(self.flow_names))
        self.flows(np.asarray(state, dtype=np.float64), self.params, out)
        return out

    def terminal_metrics(self, state: np.ndarray, flows: np.ndarray) -> TerminalMetrics:
        speed = float(state[self.speed_index]) / RPM
        pf = {k: float(flows[self.flow_index(v)]) / LPM for k, v in self.pump_flows.items()}
        rf = {k: float(flows[self.flow_index(v)]) / LPM for k, v in self.relief_flows.items()}
        return TerminalMetrics(speed, pf, rf)


@dataclass
class SimulationResult:
    t: np.ndarray  # (n_samples,)
    states: np.ndarray  # (n_samples, n_states)
    flows: np.ndarray  # (n_samples, n_flows)
    state_names: tuple[str, ...]
    flow_names: tuple[str, ...]
    terminal: TerminalMetrics

    def __len__(self) -> int:
        return len(self.t)

    def state(self, name: str) -> np.ndarray:
        return self.states[:, self.state_names.index(name)]

    def flow(self, name: str) -> np.ndarray:
        return self.flows[:, self.flow_names.index(name)]

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


def _step_loop(rhs, flows, x0, params, lower, dt, n_steps, every, method, n_flows):
    m = x0.shape[0]
    x = x0.copy()
    k1 = np.zeros(m)
    k2 = np.zeros(m)
    k3 = np.zeros(m)
    k4 = np.zeros(m)
    tmp = np.zeros(m)
    n_samples = n_steps // every + 1
    xs = np.zeros((n_samples, m))
    fs = np.zeros((n_samples, n_flows))
    fbuf = np.zeros(n_flows)
    xs[0, :] = x
    flows(x, params, fbuf)
    fs[0, :] = fbuf
    j = 1
    for i in range(n_steps):
        t = i * dt
        rhs(t, x, params, k1)
        if method == 0:
            for q in range(m):
                tmp[q] = x[q] + 0.5 * dt * k1[q]
            rhs(t + 0.5 * dt, tmp, params, k2)
            for q in range(m):
                tmp[q] = x[q] + 0.5 * dt * k2[q]
            rhs(t + 0.5 * dt, tmp, params, k3)
            for q in range(m):
                tmp[q] = x[q] + dt * k3[q]
            rhs(t + dt, tmp, params, k4)
            for q in range(m):
                x[q] += dt / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q])
        else:
            for q in range(m):
                x[q] += dt * k1[q]
        for q in range(m):
            if not math.isfinite(x[q]):
                return xs, fs, i + 1
            if x[q] < lower[q]:
                x[q] = lower[q]
        if (i + 1) % every == 0:
            xs[j, :] = x
            flows(x, params, fbuf)
            fs[j, :] = fbuf
            j += 1
    return xs, fs, -1


_step_loop_jit = nb.njit(cache=True)(_step_loop)


def integrate(network: CircuitNetwork, init: np.ndarray | None = None,
              cfg: IntegratorConfig | None = None) -> SimulationResult:
    """Integrate ``network`` from ``init`` (defaults to the network's own
    initial state) over ``[0, cfg.duration]``.

    Compiled kernels run through the compiled loop; plain Python callables
    go through the identical interpreted loop.
    """
    cfg = cfg or IntegratorConfig()
    x0 = np.array(network.init if init is None else init, dtype=np.float64)
    if x0.shape != (len(network.state_names),):
        raise ValueError(
            f"initial state has shape {x0.shape}, network expects "
            f"({len(network.state_names)},)")
    method = METHODS.index(cfg.method)
    compiled = isinstance(network.rhs, Dispatcher) and isinstance(network.flows, Dispatcher)
    loop = _step_loop_jit if compiled else _step_loop
    xs, fs, fail = loop(network.rhs, network.flows, x0, network.params,
                        network.lower, cfg.dt, cfg.n_steps, cfg.sample_every,
                        method, len(network.flow_names))
    if fail >= 0:
        raise DivergedSimulationError(fail * cfg.dt)
    t = np.arange(cfg.n_samples) * (cfg.dt * cfg.sample_every)
    terminal = network.terminal_metrics(xs[-1], fs[-1])
    return SimulationResult(t, xs, fs, network.state_names, network.flow_names, terminal)


def derivative(network: CircuitNetwork, state: np.ndarray, t: float = 0.0) -> np.ndarray:
    x = np.asarray(state, dtype=np.float64)
    if x.shape != (len(network.state_names),):
        raise ValueError("state does not match network layout")
    out = np.zeros_like(x)
    network.rhs(t, x, network.params, out)
    return out
