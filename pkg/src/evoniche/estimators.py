"""Estimator-style wrappers around the optimizers.

Each class stores its hyperparameters verbatim in ``__init__`` (so
``get_params``/``set_params``/``clone`` work) and does all validation in
``fit``.  ``fit`` takes a :class:`~evoniche.ea_core.Problem` or a
:class:`~evoniche.benchmarks.BenchmarkFunction` instead of a data matrix.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_random_state
from .diff_evolution import DEConfig, run_de
from .ea_core.engine import MaxEvaluations, Problem, RunConfig, run_generational
from .ea_core.genome import fitness_array
from .exceptions import InvalidInputError
from .multimodal import CrowdingVariant, NichingConfig, SpeciesConfig, ease_run, peak_metrics, run_crowding_de


def _as_problem(problem) -> Problem:
    if isinstance(problem, Problem):
        return problem
    if hasattr(problem, "as_problem"):
        return problem.as_problem()
    raise InvalidInputError(f"expected a Problem or benchmark function, got {type(problem).__name__}")


class _OptimizerMixin:
    """Shared fitted attributes and helpers."""

    def _store(self, population, log, problem):
        fits = fitness_array(population)
        self.population_ = population
        self.log_ = log
        self.best_ = population[int(np.argmax(fits))]
        self.best_fitness_ = float(fits.max())
        self.n_evaluations_ = log[-1].evaluations
        self.n_generations_ = log[-1].generation
        self.problem_ = problem
        return self

    def predict(self, X=None):
        """Return the best genome found."""
        check_is_fitted(self, "best_")
        return self.best_.genome

    def score(self, X=None, y=None):
        """Best fitness found (higher is better)."""
        check_is_fitted(self, "best_")
        return self.best_fitness_

    def peak_ratio(self, known_peaks=None, value_tol=1e-4, dist_tol=0.01):
        """Fraction of known peaks certified by the final population."""
        check_is_fitted(self, "population_")
        peaks = known_peaks if known_peaks is not None else self.problem_.known_peaks
        if not peaks:
            raise InvalidInputError("no known peaks for this problem")
        return peak_metrics(self.population_, peaks, value_tol, dist_tol)[1]


class GeneticAlgorithm(_OptimizerMixin, BaseEstimator):
    """Generational EA with configurable selection and variation.

    Parameters
    ----------
    population_size, offspring_size : int
    overlapping : bool
        Plus strategy when True, comma strategy otherwise.
    parent_scheme, survival_scheme : str
    crossover, mutation : str
        Operator names from the variation catalog.
    crossover_rate : float
    mutation_params : dict or None
    max_evaluations : int
    sharing_radius : float or None
        Enables fitness sharing for parent selection.
    random_state : int, Generator or None
    """

    def __init__(self, population_size=50, offspring_size=50, overlapping=False,
                 parent_scheme="binary-tournament", survival_scheme="truncation",
                 crossover="one-point", mutation="random", crossover_rate=0.9,
                 mutation_params=None, max_evaluations=10000, sharing_radius=None,
                 random_state=None):
        self.population_size = population_size
        self.offspring_size = offspring_size
        self.overlapping = overlapping
        self.parent_scheme = parent_scheme
        self.survival_scheme = survival_scheme
        self.crossover = crossover
        self.mutation = mutation
        self.crossover_rate = crossover_rate
        self.mutation_params = mutation_params
        self.max_evaluations = max_evaluations
        self.sharing_radius = sharing_radius
        self.random_state = random_state

    def _config(self):
        return RunConfig(
            population_size=self.population_size, offspring_size=self.offspring_size,
            overlapping=self.overlapping, parent_scheme=self.parent_scheme,
            survival_scheme=self.survival_scheme, crossover=self.crossover,
            mutation=self.mutation, crossover_rate=self.crossover_rate,
            mutation_params=dict(self.mutation_params or {}),
            termination=MaxEvaluations(self.max_evaluations), sharing_radius=self.sharing_radius,
        )

    def fit(self, problem, y=None):
        problem = _as_problem(problem)
        pop, log = run_generational(self._config(), problem, check_random_state(self.random_state))
        return self._store(pop, log, problem)


class DifferentialEvolution(_OptimizerMixin, BaseEstimator):
    """DE/rand/1/bin with greedy one-to-one replacement."""

    def __init__(self, population_size=50, scale_factor=0.5, crossover_rate=0.9,
                 bound_policy="reflect", max_evaluations=10000, random_state=None):
        self.population_size = population_size
        self.scale_factor = scale_factor
        self.crossover_rate = crossover_rate
        self.bound_policy = bound_policy
        self.max_evaluations = max_evaluations
        self.random_state = random_state

    def _de_config(self):
        return DEConfig(scale_factor=self.scale_factor, crossover_rate=self.crossover_rate,
                        bound_policy=self.bound_policy)

    def fit(self, problem, y=None):
        problem = _as_problem(problem)
        pop, log = run_de(problem, self._de_config(), self.population_size,
                          MaxEvaluations(self.max_evaluations), check_random_state(self.random_state))
        return self._store(pop, log, problem)


class CrowdingDE(DifferentialEvolution):
    """Crowding DE with optional spatial and temporal locality.

    Parameters
    ----------
    variant : {"plain", "sl", "tl", "stl"}
    sl_floor : float
        Roulette floor for spatial locality, as a fraction of the largest
        distance.
    tl_discount : float
        Discount applied to the stored improvement vector.
    """

    def __init__(self, variant="stl", population_size=50, scale_factor=0.5, crossover_rate=0.9,
                 bound_policy="reflect", sl_floor=0.05, tl_discount=0.5, max_evaluations=10000,
                 random_state=None):
        super().__init__(population_size, scale_factor, crossover_rate, bound_policy,
                         max_evaluations, random_state)
        self.variant = variant
        self.sl_floor = sl_floor
        self.tl_discount = tl_discount

    def fit(self, problem, y=None):
        problem = _as_problem(problem)
        niching = NichingConfig(tl_discount=self.tl_discount, sl_floor=self.sl_floor)
        pop, log = run_crowding_de(problem, self._de_config(), niching, CrowdingVariant(self.variant),
                                   self.population_size, MaxEvaluations(self.max_evaluations),
                                   check_random_state(self.random_state))
        return self._store(pop, log, problem)


class EASE(GeneticAlgorithm):
    """Two-stage EA with species conservation and species-specific explosion."""

    def __init__(self, population_size=50, offspring_size=50, crossover="blend", mutation="gaussian",
                 crossover_rate=0.9, mutation_params=None, species_radius=0.1, explosion_copies=5,
                 stage_switch_fraction=0.5, random_injection_count=5, max_evaluations=10000,
                 random_state=None):
        super().__init__(population_size=population_size, offspring_size=offspring_size,
                         crossover=crossover, mutation=mutation, crossover_rate=crossover_rate,
                         mutation_params=mutation_params, max_evaluations=max_evaluations,
                         random_state=random_state)
        self.species_radius = species_radius
        self.explosion_copies = explosion_copies
        self.stage_switch_fraction = stage_switch_fraction
        self.random_injection_count = random_injection_count

    def fit(self, problem, y=None):
        problem = _as_problem(problem)
        species = SpeciesConfig(species_radius=self.species_radius, explosion_copies=self.explosion_copies,
                                stage_switch_fraction=self.stage_switch_fraction,
                                random_injection_count=self.random_injection_count)
        pop, seeds, log = ease_run(self._config(), species, problem, check_random_state(self.random_state))
        self.seeds_ = seeds
        return self._store(pop, log, problem)
