"""Island-model genetic algorithm with binary genomes.

Eight sub-populations evolve side by side, each with its own crossover and
mutation rates, and swap their best members around a ring every few
generations. After a fixed number of generations the best point found is
polished with a short Hooke-Jeeves descent.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .space import Space
from .tabu import Evaluator, SolutionRecord, hill_climb

log = logging.getLogger(__name__)


def _default_pc() -> tuple[float, ...]:
    return tuple(float(x) for x in np.linspace(0.60, 0.95, 8))


def _default_pm() -> tuple[float, ...]:
    return tuple(float(x) for x in np.geomspace(0.001, 0.05, 8))


@dataclass(frozen=True)
class PGAConfig:
    subpop_count: int = 8
    subpop_size: int = 20
    generations: int = 42
    migration_interval: int = 3
    migrant_count: int = 4
    bits_per_param: int = 10
    pc_per_island: tuple[float, ...] = field(default_factory=_default_pc)
    pm_per_island: tuple[float, ...] = field(default_factory=_default_pm)
    elitism: int = 1
    tournament_size: int = 2
    polish: bool = True

    def __post_init__(self):
        if self.subpop_count < 1 or self.subpop_size < 2:
            raise ValueError("need at least one island of two members")
        if len(self.pc_per_island) != self.subpop_count:
            raise ValueError("pc_per_island needs one rate per island")
        if len(self.pm_per_island) != self.subpop_count:
            raise ValueError("pm_per_island needs one rate per island")
        for r in (*self.pc_per_island, *self.pm_per_island):
            if not 0.0 <= r <= 1.0:
                raise ValueError("probabilities must lie in [0, 1]")
        if not 0 <= self.migrant_count < self.subpop_size:
            raise ValueError("migrant_count must be smaller than subpop_size")
        if not 0 <= self.elitism < self.subpop_size:
            raise ValueError("elitism must be smaller than subpop_size")
        if self.bits_per_param < 1 or self.generations < 0:
            raise ValueError("bits_per_param >= 1 and generations >= 0 required")
        if self.migration_interval < 1 or self.tournament_size < 1:
            raise ValueError("migration_interval and tournament_size must be >= 1")


@dataclass
class Subpopulation:
    genomes: np.ndarray  # (size, length) uint8
    fitness: np.ndarray  # (size,)
    island_index: int = 0

    def __len__(self) -> int:
        return len(self.fitness)

    def order(self) -> np.ndarray:
        """Member indices from best to worst (ties keep position order)."""
        return np.argsort(self.fitness, kind="stable")

    def best(self) -> tuple[np.ndarray, float]:
        i = int(self.order()[0])
        return self.genomes[i], float(self.fitness[i])


def decode(bits: np.ndarray, space: Space, bits_per_param: int) -> tuple[int, ...]:
    """Genome to grid indices.

    Each field maps linearly onto its parameter range and is then snapped to
    the nearest grid point, so all-zeros and all-ones hit the bounds exactly.
    """
    bits = np.asarray(bits)
    if bits.shape != (bits_per_param * len(space),):
        raise ValueError(f"genome length {bits.size} does not match "
                         f"{len(space)} x {bits_per_param} bits")
    weights = 1 << np.arange(bits_per_param - 1, -1, -1, dtype=np.int64)
    full = (1 << bits_per_param) - 1
    out = []
    for j, n in enumerate(space.upper_index):
        field_ = bits[j * bits_per_param:(j + 1) * bits_per_param].astype(np.int64)
        k = int(field_ @ weights)
        out.append(int(round(k / full * int(n))))
    return tuple(out)


def select_parent(sub: Subpopulation, rng: np.random.Generator,
                  size: int = 2) -> np.ndarray:
    """Tournament selection, drawing with replacement; lower fitness wins."""
    picks = rng.integers(0, len(sub), size=size)
    winner = picks[int(np.argmin(sub.fitness[picks]))]
    return sub.genomes[winner]


def crossover(a: np.ndarray, b: np.ndarray, pc: float, rng: np.random.Generator,
              cut: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Single-point crossover applied with probability ``pc``."""
    if a.shape != b.shape:
        raise ValueError("parents must have equal length")
    if len(a) < 2 or rng.random() >= pc:
        return a.copy(), b.copy()
    if cut is None:
        cut = int(rng.integers(1, len(a)))
    return (np.concatenate([a[:cut], b[cut:]]),
            np.concatenate([b[:cut], a[cut:]]))


def mutate(g: np.ndarray, pm: float, rng: np.random.Generator) -> np.ndarray:
    """Flip each bit independently with probability ``pm``."""
    flips = rng.random(len(g)) < pm
    return np.where(flips, 1 - g, g).astype(g.dtype)


def migrate(islands: Sequence[Subpopulation], count: int = 4) -> list[Subpopulation]:
    """Ring migration: island i sends copies of its ``count`` best to island
    i+1, where they replace the ``count`` worst.

    All emigrants are chosen from the state before any island is changed.
    """
    n = len(islands)
    if count == 0 or n < 2:
        return list(islands)
    sent = []
    for isl in islands:
        best = isl.order()[:count]
        sent.append((isl.genomes[best].copy(), isl.fitness[best].copy()))
    out = []
    for i, isl in enumerate(islands):
        genomes, fitness = isl.genomes.copy(), isl.fitness.copy()
        worst = isl.order()[::-1][:count]
        g_in, f_in = sent[(i - 1) % n]
        genomes[worst] = g_in
        fitness[worst] = f_in
        out.append(Subpopulation(genomes, fitness, isl.island_index))
    return out


def pga_run(objective: Callable[[Sequence[float]], float], space: Space,
            cfg: PGAConfig | None = None, seed: int | None = None,
            history: list | None = None) -> SolutionRecord:
    """Minimize ``objective`` over ``space``.

    Every member of every generation costs one objective call, so the GA
    part uses subpop_count * subpop_size * (generations + 1) evaluations;
    migrants keep the fitness they arrived with. ``history``, if given,
    receives the best value after each generation.
    """
    cfg = cfg or PGAConfig()
    rng = np.random.default_rng(seed)
    length = cfg.bits_per_param * len(space)
    evals = 0
    best: tuple[tuple[int, ...], float] = ((), float("inf"))
    evals_at_best = 0
    seen: dict[tuple[int, ...], float] = {}

    def evaluate(g: np.ndarray) -> float:
        nonlocal evals, best, evals_at_best
        idx = decode(g, space, cfg.bits_per_param)
        v = float(objective(space.values(idx)))
        evals += 1
        seen[idx] = v
        if v < best[1]:
            best, evals_at_best = (idx, v), evals
        return v

    islands = []
    for i in range(cfg.subpop_count):
        genomes = rng.integers(0, 2, size=(cfg.subpop_size, length), dtype=np.uint8)
        fitness = np.array([evaluate(g) for g in genomes])
        islands.append(Subpopulation(genomes, fitness, i))

    for gen in range(1, cfg.generations + 1):
        nxt = []
        for isl in islands:
            pc = cfg.pc_per_island[isl.island_index]
            pm = cfg.pm_per_island[isl.island_index]
            keep = isl.order()[:cfg.elitism]
            genomes = [isl.genomes[k].copy() for k in keep]
            while len(genomes) < cfg.subpop_size:
                a = select_parent(isl, rng, cfg.tournament_size)
                b = select_parent(isl, rng, cfg.tournament_size)
                for child in crossover(a, b, pc, rng):
                    if len(genomes) == cfg.subpop_size:
                        break
                    genomes.append(mutate(child, pm, rng))
            # the whole generation is scored, carried elites included
            fitness = [evaluate(g) for g in genomes]
            nxt.append(Subpopulation(np.array(genomes), np.array(fitness),
                                     isl.island_index))
        islands = nxt
        if gen % cfg.migration_interval == 0:
            islands = migrate(islands, cfg.migrant_count)
        if history is not None:
            history.append(best[1])

    if cfg.polish and best[0]:
        ev = Evaluator(objective, space)
        ev.values.update(seen)
        p, v = hill_climb(ev, space, best[0], best[1],
                          initial_units=2.0, reduction=0.5, min_units=1.0)
        if ev.evals and v < best[1]:
            evals_at_best = evals + ev.evals
            best = (p, v)
        evals += ev.evals

    log.debug("pga finished: %d evals, best %.6g", evals, best[1])
    return SolutionRecord(space.values(best[0]), best[1], evals, evals_at_best, best[0])
