import numpy as np
import pytest
from hypothesis import given, strategies as st

from evoniche.benchmarks import sphere
from evoniche.diff_evolution import (
    BoundPolicy,
    DEConfig,
    apply_bounds,
    de_step,
    pick_donors,
    recombine,
    run_de,
    trial_symbols,
    trial_vector,
)
from evoniche.ea_core import Individual, MaxEvaluations, MoveString, RealVector
from evoniche.ea_core.engine import Evaluator
from evoniche.exceptions import ConfigError, InvalidInputError

B2 = [[-10.0, 10.0]] * 2


def rv(*vals, bounds=None):
    return RealVector(list(vals), bounds or [[-10.0, 10.0]] * len(vals))


def pop_of(genomes, f):
    return [Individual.evaluated_with(g, f(g)) for g in genomes]


def neg_sphere(g):
    return -float(np.sum(g.values ** 2))


def test_trial_vector_arithmetic(rng):
    population = [rv(0, 0), rv(1, 1), rv(3, 3), rv(2, 2)]
    t = trial_vector(population, 0, 0.5, rng, donors=(1, 2, 3))
    assert t.values.tolist() == [1.5, 1.5]
    t0 = trial_vector(population, 0, 0.0, rng, donors=(1, 2, 3))
    assert t0 == population[1]


def test_pick_donors_distinct(rng):
    for n in (4, 5, 10):
        for target in range(n):
            for _ in range(50):
                r = pick_donors(n, target, rng)
                assert len(set(r)) == 3 and target not in r and all(0 <= x < n for x in r)
    with pytest.raises(InvalidInputError):
        pick_donors(3, 0, rng)


def test_recombine_extremes(rng):
    target, trial = rv(0, 0, 0, 0), rv(1, 1, 1, 1)
    assert recombine(target, trial, 1.0, rng) == trial
    for _ in range(50):
        child = recombine(target, trial, 0.0, rng)
        assert np.count_nonzero(child.values != target.values) == 1
    with pytest.raises(InvalidInputError):
        recombine(rv(0, 0), rv(0, 0, 0), 0.5, rng)


def test_recombine_take_rate(rng):
    d, trials, cr = 11, 10_000, 0.3
    target, trial = RealVector(np.zeros(d), [[0, 1]] * d), RealVector(np.ones(d), [[0, 1]] * d)
    taken = 0
    for _ in range(trials):
        child = recombine(target, trial, cr, rng)
        # discount the forced index: exactly one forced position per call
        taken += child.values.sum()
    # E[taken] = trials * (1 + (d - 1) * cr)
    rate = (taken / trials - 1) / (d - 1)
    assert abs(rate - cr) <= 0.01


def test_apply_bounds():
    b = np.array([[0.0, 1.0]])
    assert apply_bounds([1.2], b, "clamp").tolist() == [1.0]
    np.testing.assert_allclose(apply_bounds([1.2], b, "reflect"), [0.8])
    np.testing.assert_allclose(apply_bounds([-0.3], b, "reflect"), [0.3])
    np.testing.assert_allclose(apply_bounds([2.5], b, "reflect"), [0.5])


def test_de_step_all_worse_keeps_population(rng):
    population = pop_of([rv(0, 0), rv(1, 1), rv(2, 2), rv(3, 3)], neg_sphere)
    nxt = de_step(population, DEConfig(), lambda g: -1e9, rng)
    assert all(a is b for a, b in zip(nxt, population))


def test_de_step_size_constant(rng):
    population = pop_of([RealVector(rng.uniform(-5, 5, 2), B2) for _ in range(10)], neg_sphere)
    for _ in range(5):
        population = de_step(population, DEConfig(), neg_sphere, rng)
        assert len(population) == 10


def test_config_validation():
    with pytest.raises(ConfigError):
        DEConfig(scale_factor=0).validate()
    with pytest.raises(ConfigError):
        DEConfig(crossover_rate=1.5).validate()
    with pytest.raises(ConfigError):
        DEConfig(bound_policy="wrap").validate()


def test_sphere_convergence():
    problem = sphere(5).as_problem()
    hits = 0
    for seed in range(20):
        _, log = run_de(problem, DEConfig(0.5, 0.9), 30, MaxEvaluations(30_000), np.random.default_rng(seed))
        assert log[-1].evaluations <= 30_000
        hits += -log[-1].best_fitness < 1e-6
    assert hits >= 19


def test_determinism():
    problem = sphere(3).as_problem()
    runs = [run_de(problem, DEConfig(), 10, MaxEvaluations(500), np.random.default_rng(3)) for _ in range(2)]
    assert runs[0][1] == runs[1][1]
    assert all(a.genome == b.genome for a, b in zip(runs[0][0], runs[1][0]))


def test_trial_symbols_closure(rng):
    population = [Individual.evaluated_with(MoveString("".join(rng.choice(list("FLRUD"), 6))), 0.0)
                  for _ in range(6)]
    for i in range(6):
        t = trial_symbols(population, i, 0.5, rng)
        assert len(t) == 6 and set(t.moves) <= set("FLRUD")


@given(st.integers(0, 2**32 - 1), st.floats(0.05, 2.0), st.floats(0, 1),
       st.sampled_from(list(BoundPolicy)), st.integers(4, 12), st.integers(1, 4))
def test_de_step_invariants(seed, F, CR, policy, n, dim):
    rng = np.random.default_rng(seed)
    bounds = [[-1.0, 2.0]] * dim
    population = pop_of([RealVector(rng.uniform(-1, 2, dim), bounds) for _ in range(n)], neg_sphere)
    before = max(m.fitness for m in population)
    nxt = de_step(population, DEConfig(F, CR, policy), Evaluator(neg_sphere), rng)
    assert len(nxt) == n
    assert max(m.fitness for m in nxt) >= before
    for m in nxt:
        assert np.all(m.genome.values >= -1.0) and np.all(m.genome.values <= 2.0)
