from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hydro_opt.pga import (PGAConfig, Subpopulation, crossover, decode, migrate,
                           mutate, pga_run, select_parent)
from hydro_opt.space import Param, Space

MOTOR = Space([Param("motor", 10, 1000, 1)])
CUBE = Space([Param(f"x{i}", -1.0, 1.0, 0.01) for i in range(3)])


def bits(s):
    return np.array([int(c) for c in s], dtype=np.uint8)


def sphere(v):
    return sum(x * x for x in v)


def test_decode_place_value_example():
    g = np.zeros(10, dtype=np.uint8)
    g[0] = 1  # 512
    # 10 + 512 / 1023 * 990 = 505.48, nearest grid value 505
    assert MOTOR.values(decode(g, MOTOR, 10)) == (505.0,)


def test_decode_bounds():
    assert MOTOR.values(decode(np.zeros(10, np.uint8), MOTOR, 10)) == (10.0,)
    assert MOTOR.values(decode(np.ones(10, np.uint8), MOTOR, 10)) == (1000.0,)
    with pytest.raises(ValueError):
        decode(np.zeros(9, np.uint8), MOTOR, 10)


def test_crossover_splice():
    a, b = crossover(bits("1111"), bits("0000"), 1.0, np.random.default_rng(0), cut=2)
    assert "".join(map(str, a)) == "1100" and "".join(map(str, b)) == "0011"


def test_crossover_identity_cases():
    rng = np.random.default_rng(1)
    a, b = bits("101100"), bits("010011")
    c, d = crossover(a, b, 0.0, rng)
    assert np.array_equal(c, a) and np.array_equal(d, b)
    c, d = crossover(a, a, 1.0, rng)
    assert np.array_equal(c, a) and np.array_equal(d, a)


def test_mutate_extremes_and_rate():
    rng = np.random.default_rng(2)
    g = bits("1010110000")
    assert np.array_equal(mutate(g, 0.0, rng), g)
    assert np.array_equal(mutate(g, 1.0, rng), 1 - g)
    z = np.zeros(30, dtype=np.uint8)
    flips = np.mean([mutate(z, 0.01, rng).sum() for _ in range(10_000)])
    assert flips == pytest.approx(0.3, abs=0.02)


def test_tournament_win_rate():
    rng = np.random.default_rng(3)
    sub = Subpopulation(np.array([bits("1"), bits("0")]), np.array([1.0, 5.0]))
    wins = sum(select_parent(sub, rng)[0] == 1 for _ in range(10_000))
    assert wins / 10_000 == pytest.approx(0.75, abs=0.02)
    single = Subpopulation(np.array([bits("1")]), np.array([3.0]))
    assert select_parent(single, rng)[0] == 1


def _islands(rng, n=8, size=20, length=12):
    return [Subpopulation(rng.integers(0, 2, (size, length), dtype=np.uint8),
                          rng.random(size), i) for i in range(n)]


def test_migration_between_uniform_islands_changes_nothing():
    g = bits("110010101011")
    isl = [Subpopulation(np.tile(g, (20, 1)), np.full(20, 2.0), i) for i in range(8)]
    out = migrate(isl, 4)
    for a, b in zip(isl, out):
        assert np.array_equal(a.genomes, b.genomes)
        assert np.array_equal(a.fitness, b.fitness)


def test_migration_keeps_identical_islands_identical():
    rng = np.random.default_rng(4)
    one = _islands(rng, n=1)[0]
    isl = [Subpopulation(one.genomes.copy(), one.fitness.copy(), i) for i in range(8)]
    out = migrate(isl, 4)
    for s in out[1:]:
        assert np.array_equal(s.genomes, out[0].genomes)


def test_super_fit_genome_spreads_around_ring():
    rng = np.random.default_rng(5)
    isl = _islands(rng)
    star = np.ones(12, dtype=np.uint8)
    isl[0].genomes[0], isl[0].fitness[0] = star, -1.0
    for _ in range(7):
        isl = migrate(isl, 4)
    assert all(any(np.array_equal(g, star) for g in s.genomes) for s in isl)


def test_sphere_budget_and_optimum():
    r = pga_run(sphere, CUBE, seed=0)
    assert max(abs(x) for x in r.point) <= 0.01 + 1e-12
    ga = 8 * 20 * 43
    assert ga <= r.evals <= 7100


def test_same_seed_same_result():
    cfg = PGAConfig(generations=5)
    assert pga_run(sphere, CUBE, cfg, seed=11) == pga_run(sphere, CUBE, cfg, seed=11)


def test_counter_equals_objective_calls():
    calls = []

    def f(v):
        calls.append(v)
        return sphere(v)

    cfg = PGAConfig(generations=4, polish=False)
    r = pga_run(f, CUBE, cfg, seed=2)
    assert r.evals == len(calls) == 8 * 20 * 5


def test_island_best_never_worsens_between_migrations():
    hist = []
    pga_run(sphere, CUBE, PGAConfig(generations=12, polish=False), seed=3, history=hist)
    assert all(b <= a for a, b in zip(hist, hist[1:]))


def test_default_rate_ladders():
    cfg = PGAConfig()
    assert cfg.pc_per_island[0] == pytest.approx(0.60)
    assert cfg.pc_per_island[-1] == pytest.approx(0.95)
    assert cfg.pm_per_island[0] == pytest.approx(0.001)
    assert cfg.pm_per_island[-1] == pytest.approx(0.05)


@pytest.mark.parametrize("kwargs", [
    dict(migrant_count=20), dict(pc_per_island=(0.5,) * 7),
    dict(pm_per_island=(1.5,) * 8), dict(subpop_size=1),
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        PGAConfig(**kwargs)


# ---------------------------------------------------------------------------
# properties
# ---------------------------------------------------------------------------


@settings(max_examples=150, deadline=None)
@given(nbits=st.integers(1, 12), lo=st.integers(-50, 50), span=st.integers(1, 400),
       a=st.integers(0, 2 ** 12 - 1), b=st.integers(0, 2 ** 12 - 1))
def test_decode_hits_bounds_and_is_monotone(nbits, lo, span, a, b):
    sp = Space([Param("p", lo, lo + span, 1)])
    full = (1 << nbits) - 1
    a, b = sorted((a & full, b & full))

    def enc(k):
        return np.array([(k >> s) & 1 for s in range(nbits - 1, -1, -1)], dtype=np.uint8)

    assert sp.values(decode(enc(0), sp, nbits)) == (lo,)
    assert sp.values(decode(enc(full), sp, nbits)) == (lo + span,)
    assert decode(enc(a), sp, nbits) <= decode(enc(b), sp, nbits)


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(2, 8),
       size=st.integers(5, 20), count=st.integers(0, 4))
def test_migration_conserves_sizes_and_genomes(seed, n, size, count):
    rng = np.random.default_rng(seed)
    isl = _islands(rng, n=n, size=size)
    out = migrate(isl, count)
    assert [len(s) for s in out] == [len(s) for s in isl]
    before = {bytes(g) for s in isl for g in s.genomes}
    assert all(bytes(g) in before for s in out for g in s.genomes)
    for i, s in enumerate(out):
        # receiver keeps everything except its worst `count`
        kept = isl[i].order()[:size - count]
        assert Counter(map(bytes, isl[i].genomes[kept])) <= Counter(map(bytes, s.genomes))
