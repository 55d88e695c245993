import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bcddo import core
from bcddo.core import (
    PHI,
    Bounds,
    CddoParams,
    Drawing,
    PatternMemory,
    creativity_update,
    golden_ratio,
    init_population,
    optimize,
    pattern_memory_sample,
    pattern_memory_store,
    random_hand_pressure,
    select_hand_pressure,
    select_lw_indices,
    skill_update,
)

unit = st.floats(0, 1, allow_nan=False)


def drawing(x, lbest=None):
    x = np.asarray(x, dtype=float)
    lb = x.copy() if lbest is None else np.asarray(lbest, dtype=float)
    return Drawing(x, lb, 0.0, 0.0)


def sphere(x):
    return float(np.sum(x * x))


# --- population / hand pressure -------------------------------------------------

def test_init_population_table3_size():
    pop = init_population(CddoParams(), 4, np.random.default_rng(0))
    assert len(pop) == 30
    for d in pop:
        assert d.position.shape == (4,)
        assert np.all((d.position >= 0) & (d.position <= 1))
        np.testing.assert_array_equal(d.personal_best_position, d.position)


def test_init_population_degenerate_range():
    pop = init_population(CddoParams(population_size=1, bounds=Bounds(5, 5.001)), 1, np.random.default_rng(0))
    assert len(pop) == 1
    assert 5 <= pop[0].position[0] <= 5.001


def test_init_population_deterministic():
    a = init_population(CddoParams(), 6, np.random.default_rng(42))
    b = init_population(CddoParams(), 6, np.random.default_rng(42))
    for x, y in zip(a, b):
        assert x.position.tobytes() == y.position.tobytes()


def test_init_population_rejects_zero_dimension():
    with pytest.raises(ValueError):
        init_population(CddoParams(), 0, np.random.default_rng(0))


def test_bounds_must_be_ordered():
    with pytest.raises(ValueError):
        Bounds(1.0, 1.0)


def test_random_hand_pressure_range(rng):
    for _ in range(1000):
        assert 0 <= random_hand_pressure(Bounds(0, 1), rng) <= 1


def test_random_hand_pressure_degenerate(rng):
    assert random_hand_pressure(Bounds(3, 3 + 1e-12), rng) == pytest.approx(3)


def test_random_hand_pressure_mean():
    r = np.random.default_rng(7)
    b = Bounds(0, 1)
    mean = sum(random_hand_pressure(b, r) for _ in range(10**6)) / 10**6
    assert 0.49 <= mean <= 0.51


def test_hand_pressure_single_dimension(rng):
    assert select_hand_pressure(drawing([0.7]), rng) == 0.7


def test_hand_pressure_all_equal(rng):
    assert select_hand_pressure(drawing([0.3, 0.3, 0.3]), rng) == 0.3


def test_hand_pressure_uniform_choice(rng):
    d = drawing([0.2, 0.8])
    n = 10**4
    picks = sum(select_hand_pressure(d, rng) == 0.2 for _ in range(n))
    assert abs(picks / n - 0.5) <= 0.05


def test_lw_indices_dimension_one(rng):
    assert select_lw_indices(1, rng) == (0, 0)


def test_lw_indices_uniform_pairs(rng):
    n = 10**4
    counts = {}
    for _ in range(n):
        pair = select_lw_indices(4, rng)
        counts[pair] = counts.get(pair, 0) + 1
    assert set(counts) == set(itertools.product(range(4), repeat=2))
    for c in counts.values():
        assert abs(c / n - 1 / 16) <= 0.01


def test_lw_indices_in_range(rng):
    for _ in range(1000):
        length, width = select_lw_indices(126, rng)
        assert 0 <= length < 126 and 0 <= width < 126


# --- golden ratio, skill, creativity -----------------------------------------------

def test_golden_ratio_equal_components():
    assert golden_ratio(np.array([1.0, 1.0]), 0, 1) == 2.0


def test_golden_ratio_direct():
    assert golden_ratio(np.array([1.0, 0.618]), 0, 1) == pytest.approx(1.618)


def test_golden_ratio_zero_length():
    # hand evaluation: x_L -> 1e-9, so (1e-9 + 0.5) / 1e-9 = 0.5 / 1e-9 + 1
    assert golden_ratio(np.array([0.0, 0.5]), 0, 1) == pytest.approx(0.5 / 1e-9 + 1, rel=1e-12)


def test_golden_ratio_small_negative_length_keeps_sign():
    gr = golden_ratio(np.array([-1e-12, 0.5]), 0, 1)
    assert gr == pytest.approx((-1e-9 + 0.5) / -1e-9, rel=1e-12)
    assert gr < 0


def test_skill_update_all_equal_gives_gr():
    x = np.array([0.3, 0.6])
    np.testing.assert_array_equal(skill_update(drawing(x), x, 0.0, 0.9, 0.01), [0.0, 0.0])


def test_skill_update_direct():
    out = skill_update(drawing([0, 0], lbest=[1, 1]), np.array([1.0, 1.0]), 0.0, 0.9, 0.01)
    np.testing.assert_allclose(out, [0.91, 0.91], rtol=0, atol=1e-15)


def test_skill_update_gr_only():
    d = drawing([0.1, 0.9, 0.4], lbest=[0.5, 0.5, 0.5])
    np.testing.assert_array_equal(skill_update(d, np.zeros(3), 1.618, 0.0, 0.0), [1.618] * 3)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(unit, unit, unit), min_size=1, max_size=12), unit, unit,
       st.floats(-5, 5, allow_nan=False))
def test_skill_update_linear_in_gr(cols, sr, lr, gr):
    x, lb, gb = (np.array(c) for c in zip(*cols))
    d = drawing(x, lb)
    diff = skill_update(d, gb, gr, sr, lr) - skill_update(d, gb, 0.0, sr, lr)
    np.testing.assert_allclose(diff, gr, rtol=0, atol=1e-12)


def test_creativity_update_cases():
    p = np.array([0.25, 0.75])
    np.testing.assert_array_equal(creativity_update(p, np.array([1.0, 1.0]), 0.0), p)
    np.testing.assert_allclose(creativity_update([0.5], [1.0], 0.1), [0.6])
    np.testing.assert_array_equal(creativity_update(np.zeros(3), np.zeros(3), 0.1), np.zeros(3))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(unit, unit), min_size=1, max_size=12))
def test_creativity_identity_at_zero_rate(cols):
    p, g = (np.array(c) for c in zip(*cols))
    assert creativity_update(p, g, 0.0).tobytes() == p.tobytes()


# --- pattern memory ------------------------------------------------------------------

def test_pattern_memory_capacity_one():
    pm = pattern_memory_store(pattern_memory_store(PatternMemory(1), [1.0]), [2.0])
    assert len(pm) == 1
    np.testing.assert_array_equal(pm.entries[0], [2.0])


def test_pattern_memory_holds_ten():
    pm = PatternMemory(10)
    for i in range(10):
        pm = pattern_memory_store(pm, [float(i)])
    assert sorted(e[0] for e in pm.entries) == list(range(10))


def test_pattern_memory_evicts_oldest():
    pm = PatternMemory(10)
    for i in range(11):
        pm = pattern_memory_store(pm, [float(i)])
    assert len(pm) == 10
    assert 0.0 not in [e[0] for e in pm.entries]
    assert 10.0 in [e[0] for e in pm.entries]


def test_pattern_memory_store_copies():
    v = np.array([0.5])
    pm = pattern_memory_store(PatternMemory(2), v)
    v[0] = 9.0
    assert pm.entries[0][0] == 0.5


def test_pattern_memory_sample_single(rng):
    pm = pattern_memory_store(PatternMemory(5), [0.4, 0.2])
    np.testing.assert_array_equal(pattern_memory_sample(pm, rng), [0.4, 0.2])


def test_pattern_memory_sample_uniform(rng):
    pm = PatternMemory(10)
    for i in range(10):
        pm = pattern_memory_store(pm, [float(i)])
    n = 10**4
    counts = np.bincount([int(pattern_memory_sample(pm, rng)[0]) for _ in range(n)], minlength=10)
    assert np.all(np.abs(counts / n - 0.1) <= 0.02)


def test_pattern_memory_sample_empty(rng):
    with pytest.raises(core.EmptyPatternMemory):
        pattern_memory_sample(PatternMemory(3), rng)


# --- step / optimize -------------------------------------------------------------------

def _started(params, dim, fn, seed):
    r = np.random.default_rng(seed)
    pop = core.evaluate_population(init_population(params, dim, r), fn)
    gb = core.best_of(pop)
    return pop, pattern_memory_store(PatternMemory(params.pattern_size), gb.position), gb, r


def test_step_never_worsens_global_best():
    params = CddoParams()
    pop, pm, gb, r = _started(params, 5, sphere, 3)
    for _ in range(20):
        before = gb.fitness
        pop, pm, gb, _ = core.step(pop, pm, gb, params, sphere, r)
        assert gb.fitness <= before


def test_step_deterministic():
    params = CddoParams()
    out = []
    for _ in range(2):
        pop, pm, gb, r = _started(params, 5, sphere, 11)
        pop, pm, gb, n = core.step(pop, pm, gb, params, sphere, r)
        out.append((np.stack([d.position for d in pop]).tobytes(), gb.fitness, n))
    assert out[0] == out[1]


def test_step_reports_failing_drawing():
    params = CddoParams(population_size=4)
    pop, pm, gb, r = _started(params, 3, sphere, 0)

    def bad(x):
        raise ZeroDivisionError("boom")

    with pytest.raises(core.FitnessEvaluationError) as info:
        for _ in range(10):
            pop, pm, gb, _ = core.step(pop, pm, gb, params, bad, r)
    assert 0 <= info.value.index < 4


def test_empty_memory_falls_back_to_gbest():
    # gr_tolerance large enough that every non-skill drawing takes the creativity branch
    params = CddoParams(population_size=8, gr_tolerance=1e12, cr=0.0)
    pop, _, gb, r = _started(params, 3, sphere, 5)
    pop2, _, _, _ = core.step(pop, PatternMemory(3), gb, params, sphere, r)
    moved = [d for d, e in zip(pop2, pop) if not np.array_equal(d.position, e.position)]
    assert moved


def test_target_point_improves_in_most_runs():
    target = np.array([0.2, 0.7, 0.4, 0.9])

    def fn(x):
        return float(np.sum((x - target) ** 2))

    improved = 0
    for seed in range(100):
        params = CddoParams(seed=seed)
        res = optimize(params, 4, fn)
        init = init_population(params, 4, np.random.default_rng(seed))
        improved += res.best_fitness < min(fn(d.position) for d in init)
    assert improved >= 95


def test_optimize_single_iteration():
    res = optimize(CddoParams(max_iterations=1), 3, sphere)
    assert len(res.fitness_history) == 1


def test_optimize_sphere_defaults():
    finals = [optimize(CddoParams(seed=s), 10, sphere).best_fitness for s in range(10)]
    assert sum(f <= 0.05 for f in finals) >= 8


def test_optimize_flat_landscape():
    res = optimize(CddoParams(max_iterations=15), 4, lambda x: 1.0)
    assert np.all(res.fitness_history == 1.0)


def test_optimize_counts_evaluations():
    calls = []

    def fn(x):
        calls.append(1)
        return sphere(x)

    res = optimize(CddoParams(max_iterations=10), 4, fn)
    assert res.evaluations == len(calls)
    assert 30 <= res.evaluations <= 30 * 11


@pytest.mark.parametrize("policy", core.BOUNDARY_POLICIES)
def test_every_boundary_policy_stays_in_box(policy):
    seen = []

    def cb(t, pop, gb):
        seen.append(np.stack([d.position for d in pop]))

    optimize(CddoParams(max_iterations=20, boundary=policy, bounds=Bounds(-2, 3)), 5, sphere, callback=cb)
    allpos = np.concatenate(seen)
    assert allpos.min() >= -2 and allpos.max() <= 3


def test_reflect_and_wrap():
    b = Bounds(0, 1)
    np.testing.assert_allclose(b.reflect(np.array([1.25, -0.25, 2.5, 0.5])), [0.75, 0.25, 0.5, 0.5])
    np.testing.assert_allclose(b.wrap(np.array([1.25, -0.25, 0.5])), [0.25, 0.75, 0.5])


def test_fixed_rates_changes_trajectory():
    a = optimize(CddoParams(seed=2, max_iterations=30), 6, sphere)
    b = optimize(CddoParams(seed=2, max_iterations=30, fixed_rates=True), 6, sphere)
    assert not np.array_equal(a.best_position, b.best_position) or a.evaluations != b.evaluations


def test_personal_best_never_worse_than_history():
    history = {}

    def cb(t, pop, gb):
        for i, d in enumerate(pop):
            history.setdefault(i, []).append(d.current_fitness)
            assert d.personal_best_fitness <= d.current_fitness
            assert d.personal_best_fitness <= min(history[i])

    optimize(CddoParams(max_iterations=30, seed=4), 4, sphere, callback=cb)


def test_pattern_memory_only_holds_global_bests(monkeypatch):
    stored, reported, memories = [], [], []
    orig = core.pattern_memory_store

    def spy(pm, pos):
        stored.append(np.array(pos).tobytes())
        out = orig(pm, pos)
        memories.append(out)
        return out

    monkeypatch.setattr(core, "pattern_memory_store", spy)
    res = optimize(CddoParams(max_iterations=25, seed=9), 3, sphere,
                   callback=lambda t, pop, gb: reported.append(gb.position.tobytes()))
    # one store for the initial best, then one per iteration with that iteration's global best
    assert stored[1:] == reported
    assert stored[-1] == res.best_position.tobytes()
    known = set(stored)
    for pm in memories:
        assert len(pm) <= 10
        assert all(e.tobytes() in known for e in pm.entries)


def test_phi_constant():
    assert PHI == pytest.approx(1.6180339887, abs=1e-10)
    assert math.isclose(PHI * PHI, PHI + 1)
