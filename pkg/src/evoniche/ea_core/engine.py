"""Generational evolutionary loop, termination conditions and survival."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .._validation import check_positive, check_positive_int, check_probability, check_random_state
from ..exceptions import ConfigError, InitializationError, InvalidInputError
from .genome import Individual, fitness_array
from .selection import SelectionScheme, select
from .variation import CROSSOVERS, MUTATIONS, apply_crossover, apply_mutation


@dataclass
class Problem:
    """What an optimizer needs to know about a search problem.

    ``evaluate`` returns a fitness to maximize, or ``None`` when the genome
    is rejected outright (the Delete policy for infeasible HP chains).
    ``sample`` draws one random genome from the search space.
    """

    evaluate: Callable
    sample: Callable
    name: str = "problem"
    metric: str = "euclidean"
    known_peaks: Optional[list] = None
    representation: str = "real"


class BudgetExhausted(Exception):
    """Raised by :class:`Evaluator` once the evaluation budget is spent."""


class Evaluator:
    """Counts fitness calls and enforces an optional evaluation budget."""

    def __init__(self, fn, budget=None):
        self.fn = fn
        self.budget = budget
        self.count = 0

    @property
    def remaining(self):
        return math.inf if self.budget is None else self.budget - self.count

    @property
    def exhausted(self):
        return self.remaining <= 0

    def __call__(self, genome):
        if self.exhausted:
            raise BudgetExhausted
        self.count += 1
        value = self.fn(genome)
        if value is None:
            return None
        value = float(value)
        if not math.isfinite(value):
            raise InvalidInputError(f"fitness function returned {value!r}")
        return value


def as_evaluator(fitness) -> Evaluator:
    return fitness if isinstance(fitness, Evaluator) else Evaluator(fitness)


# -- termination -------------------------------------------------------------

@dataclass(frozen=True)
class MaxGenerations:
    n: int

    def __post_init__(self):
        check_positive_int(self.n, "n")


@dataclass(frozen=True)
class MaxEvaluations:
    n: int

    def __post_init__(self):
        check_positive_int(self.n, "n")


@dataclass(frozen=True)
class MaxWallClockSeconds:
    s: float

    def __post_init__(self):
        check_positive(self.s, "s")


@dataclass(frozen=True)
class MinImprovement:
    epsilon: float
    window: int

    def __post_init__(self):
        check_positive(self.epsilon, "epsilon", strict=False)
        check_positive_int(self.window, "window")


TerminationCondition = Union[MaxGenerations, MaxEvaluations, MaxWallClockSeconds, MinImprovement]


@dataclass
class RunState:
    generation: int = 0
    evaluations: int = 0
    elapsed: float = 0.0
    best_history: list = field(default_factory=list)


def check_termination(state: RunState, cond) -> bool:
    """True iff ``cond`` (or any condition in a list of them) is met."""
    if isinstance(cond, (list, tuple)):
        return any(check_termination(state, c) for c in cond)
    if isinstance(cond, MaxGenerations):
        return state.generation >= cond.n
    if isinstance(cond, MaxEvaluations):
        return state.evaluations >= cond.n
    if isinstance(cond, MaxWallClockSeconds):
        return state.elapsed >= cond.s
    if isinstance(cond, MinImprovement):
        hist = state.best_history
        if len(hist) < cond.window:
            return False
        return hist[-1] - hist[-cond.window] < cond.epsilon
    raise InvalidInputError(f"unknown termination condition {cond!r}")


def evaluation_budget(cond) -> Optional[int]:
    conds = cond if isinstance(cond, (list, tuple)) else [cond]
    budgets = [c.n for c in conds if isinstance(c, MaxEvaluations)]
    return min(budgets) if budgets else None


# -- configuration -------------------------------------------------------------

@dataclass
class RunConfig:
    """Parameters of a (mu/rho +, lambda) generational run.

    ``overlapping=True`` is the plus strategy (survivors drawn from parents
    and offspring); ``False`` is the comma strategy (offspring only).
    """

    population_size: int = 50
    offspring_size: int = 50
    breeding_size: int = 2
    overlapping: bool = False
    parent_scheme: SelectionScheme = SelectionScheme.BINARY_TOURNAMENT
    survival_scheme: SelectionScheme = SelectionScheme.TRUNCATION
    crossover: str = "one-point"
    crossover_params: dict = field(default_factory=dict)
    crossover_rate: float = 0.9
    mutation: str = "random"
    mutation_params: dict = field(default_factory=dict)
    termination: object = field(default_factory=lambda: MaxGenerations(100))
    seed: Optional[int] = None
    max_retries: int = 20
    sharing_radius: Optional[float] = None
    sharing_alpha: float = 1.0

    def validate(self) -> "RunConfig":
        try:
            check_positive_int(self.population_size, "population_size")
            check_positive_int(self.offspring_size, "offspring_size")
            check_positive_int(self.breeding_size, "breeding_size")
            check_positive_int(self.max_retries, "max_retries")
            check_probability(self.crossover_rate, "crossover_rate")
        except InvalidInputError as exc:
            raise ConfigError(str(exc)) from None
        self.parent_scheme = SelectionScheme.parse(self.parent_scheme)
        self.survival_scheme = SelectionScheme.parse(self.survival_scheme)
        if self.breeding_size > self.population_size:
            raise ConfigError("breeding_size must not exceed population_size")
        if self.breeding_size > 2:
            raise ConfigError("only breeding sizes 1 (mutation only) and 2 (pairwise crossover) are supported")
        if not self.overlapping and self.offspring_size < self.population_size:
            raise ConfigError("non-overlapping survival needs offspring_size >= population_size")
        if self.crossover not in CROSSOVERS:
            raise ConfigError(f"unknown crossover {self.crossover!r}")
        if self.mutation not in MUTATIONS:
            raise ConfigError(f"unknown mutation {self.mutation!r}")
        if self.sharing_radius is not None and self.sharing_radius <= 0:
            raise ConfigError("sharing_radius must be > 0")
        return self


@dataclass
class GenerationStats:
    generation: int
    evaluations: int
    best_fitness: float
    mean_fitness: float


def population_stats(generation, population, evaluations) -> GenerationStats:
    f = fitness_array(population)
    return GenerationStats(generation, evaluations, float(f.max()), float(f.mean()))


# -- building blocks -------------------------------------------------------------

def initialize_population(problem: Problem, size: int, evaluator: Evaluator, rng, max_retries=1000):
    """Sample and evaluate ``size`` individuals, resampling rejected genomes."""
    population = []
    for _ in range(size):
        for _ in range(max_retries):
            genome = problem.sample(rng)
            fit = evaluator(genome)
            if fit is not None:
                population.append(Individual.evaluated_with(genome, fit))
                break
        else:
            raise InitializationError(f"no acceptable genome after {max_retries} draws")
    return population


def survival_select(parents, offspring, config: RunConfig, rng) -> list:
    """Choose the next ``population_size`` members.

    The union ``parents + offspring`` is used when ``config.overlapping``;
    otherwise only the offspring compete.  Survivors keep their pool order.
    """
    mu = config.population_size
    if config.overlapping:
        pool = list(parents) + list(offspring)
    else:
        if len(offspring) < mu:
            raise ConfigError(f"non-overlapping survival needs >= {mu} offspring, got {len(offspring)}")
        pool = list(offspring)
    idx = np.sort(select(pool, config.survival_scheme, mu, rng))
    return [pool[i] for i in idx]


def _parent_fitness(population, config):
    if config.sharing_radius is None:
        return population
    from ..multimodal import shared_fitness

    return shared_fitness(population, config.sharing_radius, config.sharing_alpha)


def _evaluate_child(child, fallback, evaluator, config, rng):
    """Evaluate a child; on rejection re-mutate it, finally fall back to a parent copy."""
    for _ in range(config.max_retries):
        genome = apply_mutation(config.mutation, child, rng, **config.mutation_params)
        fit = evaluator(genome)
        if fit is not None:
            return Individual.evaluated_with(genome, fit)
    return Individual.evaluated_with(fallback.genome, fallback.fitness)


def breed(population, n_children, config: RunConfig, evaluator, rng, mate_pool=None):
    """Parent selection, crossover, mutation and evaluation of ``n_children``.

    ``mate_pool`` optionally maps a first-parent index to the indices it may
    pair with (used to forbid inter-species crossover).
    """
    selectable = _parent_fitness(population, config)
    children = []
    while len(children) < n_children:
        need = n_children - len(children)
        if config.breeding_size == 1:
            for i in select(selectable, config.parent_scheme, need, rng):
                children.append(_evaluate_child(population[i].genome, population[i], evaluator, config, rng))
            continue
        firsts = select(selectable, config.parent_scheme, (need + 1) // 2, rng)
        for i in firsts:
            if mate_pool is None:
                j = int(select(selectable, config.parent_scheme, 1, rng)[0])
            else:
                pool = mate_pool(int(i))
                sub = [selectable[m] for m in pool]
                j = pool[int(select(sub, config.parent_scheme, 1, rng)[0])]
            a, b = population[i], population[j]
            if len(a.genome) >= 2 and rng.random() < config.crossover_rate:
                kids = apply_crossover(config.crossover, a.genome, b.genome, rng, **config.crossover_params)
            else:
                kids = [a.genome, b.genome]
            for kid, parent in zip(kids, (a, b)):
                if len(children) < n_children:
                    children.append(_evaluate_child(kid, parent, evaluator, config, rng))
    return children


def run_generational(config: RunConfig, problem: Problem, rng=None, callback=None):
    """Initialize, then loop parent selection, crossover, mutation,
    evaluation and survival until the termination condition holds.

    Returns
    -------
    population : list of Individual
    log : list of GenerationStats
        One entry for the initial population (generation 0) and one per
        completed generation.
    """
    config.validate()
    rng = check_random_state(config.seed if rng is None else rng)
    evaluator = Evaluator(problem.evaluate, evaluation_budget(config.termination))
    start = time.perf_counter()
    population = initialize_population(problem, config.population_size, evaluator, rng)
    state = RunState(0, evaluator.count, 0.0, [float(fitness_array(population).max())])
    log = [population_stats(0, population, evaluator.count)]
    if callback is not None:
        callback(population, log[-1])
    while not check_termination(state, config.termination):
        if evaluator.remaining < config.offspring_size:
            break
        offspring = breed(population, config.offspring_size, config, evaluator, rng)
        population = survival_select(population, offspring, config, rng)
        state.generation += 1
        state.evaluations = evaluator.count
        state.elapsed = time.perf_counter() - start
        state.best_history.append(float(fitness_array(population).max()))
        log.append(population_stats(state.generation, population, evaluator.count))
        if callback is not None:
            callback(population, log[-1])
    return population, log


def canonical_ga_config(n_bits: int, population_size=50, generations=100, seed=None, p_mutation=None) -> RunConfig:
    """The textbook GA: bit strings, roulette wheel, one-point crossover,
    bitflip mutation and full generational replacement."""
    return RunConfig(
        population_size=population_size,
        offspring_size=population_size,
        breeding_size=2,
        overlapping=False,
        parent_scheme=SelectionScheme.FITNESS_PROPORTIONAL,
        survival_scheme=SelectionScheme.UNIFORM_DETERMINISTIC,
        crossover="one-point",
        mutation="bitflip",
        mutation_params={"p": p_mutation if p_mutation is not None else 1.0 / n_bits},
        termination=MaxGenerations(generations),
        seed=seed,
    )


def run_stepwise(problem: Problem, population_size: int, step, termination, rng, callback=None,
                 max_init_retries=1000):
    """Drive a population-update function until ``termination`` holds.

    ``step(population, evaluator, rng)`` returns the next population.  The
    loop also stops once the evaluation budget implied by ``termination``
    is spent, so logged evaluation counts never exceed it.
    """
    evaluator = Evaluator(problem.evaluate, evaluation_budget(termination))
    start = time.perf_counter()
    population = initialize_population(problem, population_size, evaluator, rng, max_init_retries)
    state = RunState(0, evaluator.count, 0.0, [float(fitness_array(population).max())])
    log = [population_stats(0, population, evaluator.count)]
    if callback is not None:
        callback(population, log[-1])
    while not check_termination(state, termination) and not evaluator.exhausted:
        before = evaluator.count
        population = step(population, evaluator, rng)
        if evaluator.count == before:
            break
        state.generation += 1
        state.evaluations = evaluator.count
        state.elapsed = time.perf_counter() - start
        state.best_history.append(float(fitness_array(population).max()))
        log.append(population_stats(state.generation, population, evaluator.count))
        if callback is not None:
            callback(population, log[-1])
    return population, log
