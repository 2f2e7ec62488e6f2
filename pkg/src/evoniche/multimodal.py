"""Niching for multimodal optimization.

Crowding replacement, fitness sharing, species seeds with species-specific
explosion (SCGA / EASE) and crowding differential evolution with spatial
locality (SL), temporal locality (TL) or both (STL).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from ._validation import check_positive, check_positive_int, check_probability, check_random_state
from .diff_evolution import (BoundPolicy, DEConfig, apply_bounds, evaluate_offspring, make_offspring,
                             pick_donors)
from .ea_core.engine import (BudgetExhausted, MaxGenerations, RunConfig, as_evaluator, breed,
                             evaluation_budget, initialize_population, run_stepwise)
from .ea_core.genome import Individual, MoveString, RealVector, check_compatible
from .ea_core.variation import apply_mutation
from .exceptions import ConfigError, ContractViolation, InvalidInputError

logger = logging.getLogger(__name__)


class DistanceMetric(str, Enum):
    EUCLIDEAN = "euclidean"
    HAMMING = "hamming"


def _genome(member):
    return member.genome if isinstance(member, Individual) else member


def default_metric(genome) -> DistanceMetric:
    return DistanceMetric.EUCLIDEAN if isinstance(genome, RealVector) else DistanceMetric.HAMMING


def genome_vector(genome, metric) -> np.ndarray:
    """Numeric row used for distance computations."""
    if DistanceMetric(metric) is DistanceMetric.EUCLIDEAN:
        if not isinstance(genome, RealVector):
            raise InvalidInputError("euclidean distance needs real vector genomes")
        return genome.values
    if isinstance(genome, MoveString):
        return genome.codes()
    if isinstance(genome, RealVector):
        return genome.values
    return np.asarray(genome.bits, dtype=np.uint8)


def genome_matrix(population, metric) -> np.ndarray:
    return np.stack([genome_vector(_genome(m), metric) for m in population])


def _row_distances(matrix, vec, metric) -> np.ndarray:
    if metric == DistanceMetric.EUCLIDEAN:
        diff = matrix - vec
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))
    return np.count_nonzero(matrix != vec, axis=1).astype(float)


def distance(a, b, metric=None) -> float:
    """Euclidean distance between real vectors or Hamming distance between
    symbol genomes (number of differing positions)."""
    a, b = _genome(a), _genome(b)
    check_compatible(a, b)
    metric = DistanceMetric(metric or default_metric(a))
    va, vb = genome_vector(a, metric), genome_vector(b, metric)
    return float(_row_distances(va[None, :], vb, metric)[0])


def nearest_member(population, candidate, metric=None) -> int:
    """Index of the member closest to ``candidate``; ties go to the lower index."""
    if len(population) == 0:
        raise InvalidInputError("population is empty")
    cand = _genome(candidate)
    metric = DistanceMetric(metric or default_metric(cand))
    d = _row_distances(genome_matrix(population, metric), genome_vector(cand, metric), metric)
    return int(np.argmin(d))


def crowding_replace(population, offspring: Individual, metric=None):
    """Offspring competes with its nearest member and replaces it only if
    strictly fitter.

    Returns
    -------
    population : list of Individual
        A new list; the input is not modified.
    replaced : bool
    """
    if not offspring.evaluated:
        raise InvalidInputError("offspring must be evaluated")
    nn = nearest_member(population, offspring, metric)
    out = list(population)
    if offspring.fitness > population[nn].fitness:
        out[nn] = offspring
        return out, True
    return out, False


def sharing_denominators(population, sigma_share, alpha=1.0, metric=None) -> np.ndarray:
    """Niche counts ``sum_j sh(d_ij)`` with ``sh(d) = 1 - (d/sigma)^alpha`` for
    ``d < sigma`` and 0 otherwise."""
    check_positive(sigma_share, "sigma_share")
    check_positive(alpha, "alpha")
    metric = DistanceMetric(metric or default_metric(_genome(population[0])))
    m = genome_matrix(population, metric)
    d = np.stack([_row_distances(m, row, metric) for row in m])
    sh = np.where(d < sigma_share, 1.0 - (d / sigma_share) ** alpha, 0.0)
    return sh.sum(axis=1)


def shared_fitness(population, sigma_share, alpha=1.0, metric=None) -> np.ndarray:
    """Raw fitness divided by the niche count of each member."""
    f = np.array([ind.fitness for ind in population], dtype=float)
    if np.any(f <= 0):
        raise ContractViolation("fitness sharing needs strictly positive fitness")
    return f / sharing_denominators(population, sigma_share, alpha, metric)


def select_species_seeds(population, sigma_s, metric=None) -> list:
    """Scan members best first; keep a member as a seed when it is at least
    ``sigma_s`` away from every seed chosen so far."""
    check_positive(sigma_s, "sigma_s")
    metric = DistanceMetric(metric or default_metric(_genome(population[0])))
    f = np.array([ind.fitness for ind in population], dtype=float)
    m = genome_matrix(population, metric)
    seeds = []
    for i in np.argsort(-f, kind="stable"):
        if not seeds or np.all(_row_distances(m[seeds], m[i], metric) >= sigma_s):
            seeds.append(int(i))
    return seeds


def assign_species(population, seeds, sigma_s, metric=None) -> np.ndarray:
    """Label each member with its nearest seed within ``sigma_s``; members
    outside every seed radius are their own singleton species."""
    metric = DistanceMetric(metric or default_metric(_genome(population[0])))
    labels = np.arange(len(population))
    if not seeds:
        return labels
    m = genome_matrix(population, metric)
    seed_rows = m[seeds]
    for i in range(len(population)):
        d = _row_distances(seed_rows, m[i], metric)
        k = int(np.argmin(d))
        if d[k] < sigma_s or i == seeds[k]:
            labels[i] = seeds[k]
    return labels


def mutator(name, **params):
    """Bind a named mutation operator into a ``(genome, rng) -> genome`` callable."""
    def mutate(genome, rng):
        return apply_mutation(name, genome, rng, **params)
    return mutate


def species_explosion(seed: Individual, copies, mutate, fitness, rng) -> Individual:
    """Evaluate ``copies`` mutated clones of ``seed`` and return the fittest of
    the seed and its clones (the seed wins ties)."""
    check_positive_int(copies, "copies")
    evaluator = as_evaluator(fitness)
    best = seed
    for _ in range(copies):
        genome = mutate(seed.genome, rng)
        if genome == seed.genome:
            continue
        fit = evaluator(genome)
        if fit is not None and fit > best.fitness:
            best = Individual.evaluated_with(genome, fit)
    return best


# -- configs -------------------------------------------------------------------

@dataclass
class NichingConfig:
    sharing_radius: float = 0.1
    sharing_alpha: float = 1.0
    tl_discount: float = 0.5
    sl_floor: float = 0.05
    metric: Optional[DistanceMetric] = None

    def validate(self) -> "NichingConfig":
        try:
            check_positive(self.sharing_radius, "sharing_radius")
            check_positive(self.sharing_alpha, "sharing_alpha")
            check_positive(self.sl_floor, "sl_floor")
            if not 0.0 <= self.tl_discount < 1.0:
                raise InvalidInputError(f"tl_discount must lie in [0, 1), got {self.tl_discount}")
            if self.metric is not None:
                self.metric = DistanceMetric(self.metric)
        except (InvalidInputError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        return self


@dataclass
class SpeciesConfig:
    species_radius: float = 0.1
    explosion_copies: int = 5
    stage_switch_fraction: float = 0.5
    random_injection_count: int = 5
    explosion_mutation: str = "gaussian"
    explosion_params: dict = field(default_factory=lambda: {"p": 1.0})
    metric: Optional[DistanceMetric] = None

    def validate(self) -> "SpeciesConfig":
        try:
            check_positive(self.species_radius, "species_radius")
            check_positive_int(self.explosion_copies, "explosion_copies")
            check_positive_int(self.random_injection_count, "random_injection_count", minimum=0)
            if not 0.0 < self.stage_switch_fraction <= 1.0:
                raise InvalidInputError("stage_switch_fraction must lie in (0, 1]")
            if self.metric is not None:
                self.metric = DistanceMetric(self.metric)
        except (InvalidInputError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        return self


# -- EASE ----------------------------------------------------------------------

class _EaseStep:
    """One EASE generation; keeps the stage and the current seed list."""

    def __init__(self, config, species, problem, switch_evals, switch_generation):
        self.config = config
        self.species = species
        self.problem = problem
        self.switch_evals = switch_evals
        self.switch_generation = switch_generation
        self.generation = 0
        self.seeds = []
        self.stage = "exploration"
        self.mutate = None
        self.metric = species.metric

    def _explosion_mutator(self, genome):
        name = self.species.explosion_mutation
        params = dict(self.species.explosion_params)
        if not isinstance(genome, RealVector) and name in ("gaussian", "delta"):
            # step mutations need vector arithmetic; resample symbols instead
            logger.info("explosion mutation %s needs real vectors; using random resampling", name)
            return mutator("random", p=1.0 / max(len(genome), 1))
        if name == "gaussian":
            params.setdefault("sigma", self.species.species_radius / 10.0)
        return mutator(name, **params)

    def _in_species_stage(self, evaluator):
        if self.species.stage_switch_fraction >= 1.0:
            return False
        if self.switch_evals is not None:
            return evaluator.count >= self.switch_evals
        if self.switch_generation is not None:
            return self.generation >= self.switch_generation
        return False

    def __call__(self, population, evaluator, rng):
        mu = self.config.population_size
        sigma = self.species.species_radius
        if self.mutate is None:
            self.mutate = self._explosion_mutator(population[0].genome)
        metric = self.metric or default_metric(population[0].genome)
        seeds = select_species_seeds(population, sigma, metric)
        seeds = seeds[: max(1, mu // 2)]
        self.stage = "species" if self._in_species_stage(evaluator) else "exploration"
        inject = self.species.random_injection_count if self.stage == "exploration" else 0
        inject = min(inject, mu - len(seeds))
        n_children = mu - len(seeds) - inject
        try:
            kept = [species_explosion(population[s], self.species.explosion_copies, self.mutate, evaluator, rng)
                    for s in seeds]
            if self.stage == "species":
                labels = assign_species(population, seeds, sigma, metric)
                groups = {lab: np.flatnonzero(labels == lab).tolist() for lab in np.unique(labels)}
                children = breed(population, n_children, self.config, evaluator, rng,
                                 mate_pool=lambda i: groups[labels[i]])
            else:
                children = breed(population, n_children, self.config, evaluator, rng)
            fresh = initialize_population(self.problem, inject, evaluator, rng)
        except BudgetExhausted:
            return population
        self.generation += 1
        nxt = kept + children + fresh
        self.seeds = select_species_seeds(nxt, sigma, metric)
        return nxt


def ease_run(config: RunConfig, species: SpeciesConfig, problem, rng=None, callback=None):
    """Evolutionary algorithm with species-specific explosion.

    The exploration stage runs the generational loop with random injection
    while seeds bypass variation; once ``stage_switch_fraction`` of the
    evaluation budget (or of the generation limit) is used, selection and
    crossover are confined to members of the same species.  Seeds are
    exploded every generation in both stages.

    Returns
    -------
    population : list of Individual
    seeds : list of Individual
    log : list of GenerationStats
    """
    config.validate()
    species.validate()
    rng = check_random_state(config.seed if rng is None else rng)
    budget = evaluation_budget(config.termination)
    conds = config.termination if isinstance(config.termination, (list, tuple)) else [config.termination]
    gens = [c.n for c in conds if isinstance(c, MaxGenerations)]
    switch_evals = None if budget is None else species.stage_switch_fraction * budget
    switch_generation = None if not gens else species.stage_switch_fraction * min(gens)
    step = _EaseStep(config, species, problem, switch_evals, switch_generation)
    population, log = run_stepwise(problem, config.population_size, step, config.termination, rng, callback)
    metric = species.metric or default_metric(population[0].genome)
    seeds = [population[i] for i in select_species_seeds(population, species.species_radius, metric)]
    return population, seeds, log


# -- crowding DE with locality ---------------------------------------------------

class CrowdingVariant(str, Enum):
    PLAIN = "plain"
    SL = "sl"
    TL = "tl"
    STL = "stl"

    @property
    def spatial(self):
        return self in (CrowdingVariant.SL, CrowdingVariant.STL)

    @property
    def temporal(self):
        return self in (CrowdingVariant.TL, CrowdingVariant.STL)


def sl_weights(distances, parent_index, delta) -> np.ndarray:
    """Roulette weights ``(d_max - d_j) + delta * d_max``; the parent gets 0.

    All candidates share equal weight when they coincide with the parent.
    """
    d = np.asarray(distances, dtype=float)
    mask = np.ones(d.shape[0], dtype=bool)
    mask[parent_index] = False
    d_max = d[mask].max()
    if d_max <= 0:
        w = mask.astype(float)
    else:
        w = np.where(mask, (d_max - d) + delta * d_max, 0.0)
    return w


def sl_pick_indices(population, parent_index, metric=None, delta=0.05, rng=None, matrix=None):
    """Three distinct donor indices drawn by distance roulette around the parent.

    Closer candidates get larger slices.  Draws are sequential without
    replacement.
    """
    n = len(population)
    if n < 4:
        raise InvalidInputError(f"spatial locality needs a population of at least 4, got {n}")
    rng = check_random_state(rng)
    metric = DistanceMetric(metric or default_metric(_genome(population[0])))
    m = genome_matrix(population, metric) if matrix is None else matrix
    w = sl_weights(_row_distances(m, m[parent_index], metric), parent_index, delta)
    cum = np.cumsum(w)
    total = cum[-1]
    picks = []
    # redrawing duplicates from the full wheel is the same law as sequential
    # draws from the wheel with earlier picks removed
    while len(picks) < 3:
        j = min(int(np.searchsorted(cum, rng.random() * total, side="right")), n - 1)
        if w[j] > 0 and j not in picks:
            picks.append(j)
    return tuple(picks)


def tl_update(offspring: Individual, nn: Individual, gamma, fitness, bound_policy=BoundPolicy.REFLECT):
    """Temporal-locality step after ``offspring`` beats its nearest neighbour.

    The offspring's delta becomes ``(x_off - x_nn) + gamma * delta_nn``; a
    second offspring ``x_off + delta_off`` is evaluated and installed instead
    of the first when strictly fitter.  Both candidates carry ``delta_off``.
    """
    if not isinstance(offspring.genome, RealVector):
        raise InvalidInputError("temporal locality needs real vector genomes")
    x_off, x_nn = offspring.genome.values, nn.genome.values
    nn_delta = np.zeros_like(x_off) if nn.delta is None else nn.delta
    delta_off = (x_off - x_nn) + gamma * nn_delta
    first = Individual.evaluated_with(offspring.genome, offspring.fitness, delta_off)
    if not delta_off.any():
        return first
    bounds = offspring.genome.bounds
    second_genome = offspring.genome.clipped(apply_bounds(x_off + delta_off, bounds, bound_policy))
    evaluator = as_evaluator(fitness)
    try:
        fit = evaluator(second_genome)
    except BudgetExhausted:
        return first
    if fit is not None and fit > offspring.fitness:
        return Individual.evaluated_with(second_genome, fit, delta_off)
    return first


def crowding_de_step(population, de_config: DEConfig, niching: NichingConfig, variant, fitness, rng):
    """One pass of CrowdingDE over every target index, in index order.

    Trial donors are uniform (plain, TL) or drawn by distance roulette (SL,
    STL).  Each offspring competes with its nearest member, which is not
    necessarily its parent, and replaces it only when strictly fitter.
    Replacements take effect immediately for later targets.
    """
    variant = CrowdingVariant(variant)
    evaluator = as_evaluator(fitness)
    pop = list(population)
    if len(pop) < 4:
        raise InvalidInputError("CrowdingDE needs a population of at least 4")
    real = isinstance(pop[0].genome, RealVector)
    temporal = variant.temporal
    if temporal and not real:
        logger.warning("temporal locality needs real vectors; running %s without it", variant.value)
        temporal = False
    metric = DistanceMetric(niching.metric or default_metric(pop[0].genome))
    matrix = genome_matrix(pop, metric)
    if metric is DistanceMetric.EUCLIDEAN:
        matrix = matrix.astype(float)
    for i in range(len(pop)):
        if variant.spatial:
            def donors():
                return sl_pick_indices(pop, i, metric, niching.sl_floor, rng, matrix)
        else:
            def donors():
                return pick_donors(len(pop), i, rng)
        try:
            child = evaluate_offspring(lambda: make_offspring(pop, i, de_config, rng, donors()),
                                       evaluator, de_config.max_retries)
        except BudgetExhausted:
            break
        if child is None:
            continue
        row = genome_vector(child.genome, metric)
        nn = int(np.argmin(_row_distances(matrix, row, metric)))
        if child.fitness > pop[nn].fitness:
            if temporal:
                child = tl_update(child, pop[nn], niching.tl_discount, evaluator, de_config.bound_policy)
                row = genome_vector(child.genome, metric)
            pop[nn] = child
            matrix[nn] = row
    return pop


def run_crowding_de(problem, de_config: DEConfig, niching: NichingConfig, variant, population_size,
                    termination, rng, callback=None):
    de_config.validate()
    niching.validate()
    if population_size < 4:
        raise ConfigError("CrowdingDE needs population_size >= 4")

    def step(population, evaluator, rng):
        return crowding_de_step(population, de_config, niching, variant, evaluator, rng)

    return run_stepwise(problem, population_size, step, termination, rng, callback)


# -- evaluation harness ------------------------------------------------------------

def peak_metrics(population, known_peaks, value_tol, dist_tol):
    """Count known peaks certified by the population.

    A member certifies a peak when it lies within ``dist_tol`` of the peak
    location and within ``value_tol`` of the peak value.  Each member
    certifies at most one peak (maximum bipartite matching).

    Returns
    -------
    found : int
    ratio : float
    """
    if not known_peaks:
        raise InvalidInputError("known_peaks must be non-empty")
    locs = np.array([np.atleast_1d(np.asarray(loc, dtype=float)) for loc, _ in known_peaks])
    vals = np.array([float(v) for _, v in known_peaks])
    if len(population) == 0:
        return 0, 0.0
    xs = np.stack([np.atleast_1d(_genome(m).values) for m in population])
    fs = np.array([m.fitness for m in population], dtype=float)
    d = np.sqrt(((locs[:, None, :] - xs[None, :, :]) ** 2).sum(axis=-1))
    ok = (d <= dist_tol) & (np.abs(fs[None, :] - vals[:, None]) <= value_tol)
    if not ok.any():
        return 0, 0.0
    match = maximum_bipartite_matching(csr_matrix(ok.astype(np.int8)), perm_type="column")
    found = int(np.count_nonzero(match >= 0))
    return found, found / len(known_peaks)
