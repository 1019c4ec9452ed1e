"""Tabu search over a gridded parameter space.

The local engine is a Hooke-Jeeves style pattern search modified to always
take the best allowable move, uphill included. Recently accepted points are
held in a FIFO tabu list and never re-evaluated; the best points found so
far form an intermediate memory from which diversification restarts are
assembled coordinate by coordinate.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .space import Space

log = logging.getLogger(__name__)

Point = tuple  # tuple of grid indices


@dataclass(frozen=True)
class TabuConfig:
    tabu_size: int = 8
    intermediate_size: int = 6
    pattern_factor: float = 1.0
    initial_step: float = 0.1  # fraction of each parameter range
    step_reduction: float = 0.5
    min_step: float = 0.005
    stall_before_reduce: int = 3
    stall_before_diversify: int = 2
    max_evals: int = 2000

    def __post_init__(self):
        if self.tabu_size < 1 or self.intermediate_size < 1:
            raise ValueError("tabu_size and intermediate_size must be >= 1")
        if not 0 < self.step_reduction < 1:
            raise ValueError("step_reduction must lie in (0, 1)")
        if not self.min_step < self.initial_step:
            raise ValueError("min_step must be smaller than initial_step")
        if not self.pattern_factor > 0:
            raise ValueError("pattern_factor must be > 0")
        if self.max_evals < 1:
            raise ValueError("max_evals must be >= 1")


@dataclass(frozen=True)
class SolutionRecord:
    point: tuple[float, ...]  # parameter values
    obfn: float
    evals: int  # evaluations used by the whole run
    evals_at_best: int = 0
    index: Point = ()


class TabuViolation(AssertionError):
    pass


class BudgetExhausted(Exception):
    """Raised by an Evaluator asked for a new value after its last one."""


class Evaluator:
    """Counts objective invocations and remembers every value seen.

    A point whose value is already known is never re-evaluated. ``forbid``
    is consulted before every real invocation so that a tabu point can never
    reach the objective.
    """

    def __init__(self, objective: Callable[[Sequence[float]], float], space: Space,
                 forbid: Callable[[Point], bool] | None = None,
                 on_value: Callable[[Point, float], None] | None = None,
                 budget: int | None = None):
        self.objective = objective
        self.budget = budget
        self.space = space
        self.forbid = forbid
        self.on_value = on_value
        self.evals = 0
        self.values: dict[Point, float] = {}

    def known(self, p: Point) -> bool:
        return p in self.values

    def __call__(self, p: Point) -> float:
        if p in self.values:
            return self.values[p]
        if self.forbid is not None and self.forbid(p):
            raise TabuViolation(f"attempted to evaluate tabu point {p}")
        if self.budget is not None and self.evals >= self.budget:
            raise BudgetExhausted
        v = float(self.objective(self.space.values(p)))
        self.evals += 1
        self.values[p] = v
        if self.on_value is not None:
            self.on_value(p, v)
        return v


@dataclass
class TabuState:
    base: Point
    base_value: float
    tabu_size: int
    intermediate_size: int
    step: np.ndarray
    tabu_list: deque = field(default_factory=deque)
    intermediate: list = field(default_factory=list)  # (point, value), ascending
    evals: int = 0
    best: tuple = ((), float("inf"))
    evals_at_best: int = 0


def is_tabu(p: Point, state: TabuState) -> bool:
    return tuple(p) in state.tabu_list


def record_accepted(p: Point, state: TabuState) -> TabuState:
    state.tabu_list.append(tuple(p))
    while len(state.tabu_list) > state.tabu_size:
        state.tabu_list.popleft()
    return state


def update_intermediate(p: Point, v: float, state: TabuState) -> TabuState:
    """Insert ``p`` if it is a new best; the oldest entry (which is also the
    worst, since entries arrive in improving order) is dropped at capacity."""
    mem = state.intermediate
    if mem and not v < mem[0][1]:
        return state
    mem.insert(0, (tuple(p), v))
    del mem[state.intermediate_size:]
    if v < state.best[1]:
        state.best = (tuple(p), v)
        state.evals_at_best = state.evals
    return state


def step_units(step: np.ndarray, space: Space) -> np.ndarray:
    """Step fractions to whole grid units (at least one)."""
    return np.maximum(1, np.rint(step * space.upper_index)).astype(int)


def neighbours(base: Point, units: Sequence[int], space: Space) -> list[Point]:
    out = []
    for j, u in enumerate(units):
        for sign in (1, -1):
            q = list(base)
            q[j] += sign * int(u)
            q = space.clamp(q)
            if q != tuple(base) and q not in out:
                out.append(q)
    return out


def best_neighbour(base: Point, units: Sequence[int], space: Space,
                   evaluate: Callable[[Point], float],
                   skip: Callable[[Point], bool] = lambda p: False):
    """Lowest-valued non-skipped neighbour as (point, value), or None."""
    best = None
    for q in neighbours(base, units, space):
        if skip(q):
            continue
        v = evaluate(q)
        if best is None or v < best[1]:
            best = (q, v)
    return best


def explore(state: TabuState, evaluate: Callable[[Point], float], space: Space):
    """Best allowable move from the base point; may be uphill.

    Returns None when every neighbour is tabu or clamped onto the base.
    """
    return best_neighbour(state.base, step_units(state.step, space), space, evaluate,
                          skip=lambda q: is_tabu(q, state))


def pattern_move(old_base: Point, new_base: Point, k: float,
                 space: Space | None = None) -> Point:
    """Extend the move old -> new by ``k`` times its length."""
    p = tuple(int(round(n + k * (n - o))) for o, n in zip(old_base, new_base))
    return space.clamp(p) if space is not None else p


def diversify(state: TabuState, rng: np.random.Generator, space: Space) -> Point:
    """New base with each coordinate drawn from the intermediate memory."""
    if not state.intermediate:
        return space.random_index(rng)
    pts = [p for p, _ in state.intermediate]
    return tuple(int(pts[rng.integers(len(pts))][j]) for j in range(len(space)))


def tabu_search(objective: Callable[[Sequence[float]], float], space: Space,
                cfg: TabuConfig | None = None, seed: int | None = None,
                start: Sequence[float] | None = None,
                trace: list | None = None) -> SolutionRecord:
    """Minimize ``objective`` over ``space``.

    ``start`` is a point in parameter values; by default a random grid point
    is drawn from the seeded generator. ``trace``, if given, receives one
    (event, point, value) tuple per accepted base.
    """
    cfg = cfg or TabuConfig()
    rng = np.random.default_rng(seed)
    state = TabuState(base=(), base_value=float("inf"), tabu_size=cfg.tabu_size,
                      intermediate_size=cfg.intermediate_size,
                      step=np.full(len(space), cfg.initial_step))

    def on_value(p, v):
        state.evals = ev.evals
        update_intermediate(p, v, state)

    ev = Evaluator(objective, space, forbid=lambda p: is_tabu(p, state),
                   on_value=on_value, budget=cfg.max_evals)

    def accept(p, v, event):
        state.base, state.base_value = p, v
        record_accepted(p, state)
        if trace is not None:
            trace.append((event, p, v))

    p0 = space.indices(start) if start is not None else space.random_index(rng)
    accept(p0, ev(p0), "start")

    stall = 0
    reductions_since_best = 0
    best_at_reduction = state.best[1]
    reset_done = False

    def restart(event):
        p = diversify(state, rng, space)
        accept(p, ev(p), event)

    try:
        # Moves between already-known points cost nothing, so a cycle longer
        # than the tabu list could otherwise run forever; cap the iterations.
        iterations = 0
        while ev.evals < cfg.max_evals and iterations < 10 * cfg.max_evals:
            if not np.any(state.step >= cfg.min_step):
                if reset_done:
                    break
                # the single step reset is still owed; spend it before stopping
                state.step = np.full(len(space), cfg.initial_step)
                reset_done = True
                restart("diversify")
                continue
            iterations += 1
            known = set(ev.values)
            move = explore(state, ev, space)
            if move is None:
                restart("stalled")
                continue
            new, v = move
            downhill = v < state.base_value
            if downhill:
                pat = pattern_move(state.base, new, cfg.pattern_factor, space)
                if pat != new and not is_tabu(pat, state):
                    vp = ev(pat)
                    if vp < v:
                        new, v = pat, vp
            accept(new, v, "move")
            # A downhill move back onto an already known point is not progress;
            # otherwise a cycle through cached points would never end.
            if downhill and new not in known:
                stall = 0
            else:
                stall += 1

            if stall >= cfg.stall_before_reduce:
                stall = 0
                state.step = state.step * cfg.step_reduction
                if state.best[1] < best_at_reduction:
                    reductions_since_best = 0
                else:
                    reductions_since_best += 1
                best_at_reduction = state.best[1]
                if reductions_since_best >= cfg.stall_before_diversify:
                    reductions_since_best = 0
                    if not reset_done:
                        state.step = np.full(len(space), cfg.initial_step)
                        reset_done = True
                    restart("diversify")
    except BudgetExhausted:
        pass

    best_p, best_v = state.best
    log.debug("tabu search finished: %d evals, best %.6g", ev.evals, best_v)
    return SolutionRecord(space.values(best_p), best_v, ev.evals, state.evals_at_best, best_p)


def hill_climb(evaluate: Callable[[Point], float], space: Space, start: Point,
               start_value: float, initial_units: float = 2.0,
               reduction: float = 0.5, min_units: float = 1.0,
               k: float = 1.0) -> tuple[Point, float]:
    """Plain descent with the same exploration and pattern moves, no tabu
    list; the step (in grid units) shrinks whenever no neighbour improves."""
    base, base_v = tuple(start), start_value
    step = float(initial_units)
    while step >= min_units:
        units = [max(1, int(round(step)))] * len(space)
        move = best_neighbour(base, units, space, evaluate)
        if move is None or not move[1] < base_v:
            step *= reduction
            continue
        new, v = move
        pat = pattern_move(base, new, k, space)
        if pat != new:
            vp = evaluate(pat)
            if vp < v:
                new, v = pat, vp
        base, base_v = new, v
    return base, base_v
