"""DE/rand/1 trial vectors, binomial recombination and greedy one-to-one
replacement.

Real vectors use the usual arithmetic ``x_r1 + F * (x_r2 - x_r3)``.  Symbol
genomes (move strings, bit strings) use a discrete analogue: where the two
difference donors disagree, the base takes the first donor's symbol with
probability ``F``, followed by a light random resampling so a converged
population can still move.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from ._validation import check_positive, check_positive_int, check_probability
from .ea_core.engine import BudgetExhausted, as_evaluator, run_stepwise
from .ea_core.genome import BitString, Individual, MoveString, RealVector, check_compatible
from .exceptions import ConfigError, InvalidInputError


class BoundPolicy(str, Enum):
    REFLECT = "reflect"
    CLAMP = "clamp"


@dataclass
class DEConfig:
    scale_factor: float = 0.5
    crossover_rate: float = 0.9
    bound_policy: BoundPolicy = BoundPolicy.REFLECT
    seed: Optional[int] = None
    # per-position resampling rate for symbol genomes; None means 1/length
    symbol_mutation_rate: Optional[float] = None
    max_retries: int = 20

    def validate(self) -> "DEConfig":
        try:
            check_positive(self.scale_factor, "scale_factor")
            check_probability(self.crossover_rate, "crossover_rate")
            check_positive_int(self.max_retries, "max_retries")
            if self.symbol_mutation_rate is not None:
                check_probability(self.symbol_mutation_rate, "symbol_mutation_rate")
            self.bound_policy = BoundPolicy(self.bound_policy)
        except (InvalidInputError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        return self


def apply_bounds(values, bounds, policy=BoundPolicy.REFLECT) -> np.ndarray:
    """Bring ``values`` back inside ``bounds`` by clamping or by folding the
    overshoot back into the interval (repeatedly, for large overshoots)."""
    values = np.asarray(values, dtype=float)
    lo, hi = bounds[:, 0], bounds[:, 1]
    if BoundPolicy(policy) is BoundPolicy.CLAMP:
        return np.clip(values, lo, hi)
    width = hi - lo
    outside = (values < lo) | (values > hi)
    if not outside.any():
        return values
    out = np.array(values, copy=True)
    w = np.where(width > 0, width, 1.0)
    t = np.mod(values - lo, 2.0 * w)
    folded = lo + np.where(t > w, 2.0 * w - t, t)
    folded = np.where(width > 0, folded, lo)
    out[outside] = np.clip(folded[outside], lo[outside], hi[outside])
    return out


def _genome(member):
    return member.genome if isinstance(member, Individual) else member


def pick_donors(n, target_index, rng):
    """Three distinct indices, none equal to ``target_index``."""
    if n < 4:
        raise InvalidInputError(f"DE/rand/1 needs a population of at least 4, got {n}")
    picks = []
    while len(picks) < 3:
        j = int(rng.integers(0, n - 1))
        j += j >= target_index
        if j not in picks:
            picks.append(j)
    return tuple(picks)


def trial_vector(population, target_index, F, rng, bound_policy=BoundPolicy.REFLECT, donors=None) -> RealVector:
    """DE/rand/1 mutant ``x_r1 + F * (x_r2 - x_r3)`` for ``target_index``."""
    n = len(population)
    r1, r2, r3 = pick_donors(n, target_index, rng) if donors is None else donors
    base, a, b = (_genome(population[r]) for r in (r1, r2, r3))
    if not isinstance(base, RealVector):
        raise InvalidInputError("trial_vector needs real vector genomes; use trial_symbols")
    raw = base.values + F * (a.values - b.values)
    return base.clipped(apply_bounds(raw, base.bounds, bound_policy))


def _codes(g):
    if isinstance(g, MoveString):
        return g.codes()
    return np.asarray(g.bits, dtype=np.uint8)


def _from_codes(template, codes):
    if isinstance(template, MoveString):
        return MoveString(codes.tobytes().decode("ascii"), template.alphabet)
    return BitString(tuple(int(c) for c in codes))


def _alphabet_codes(g):
    if isinstance(g, MoveString):
        return np.frombuffer(g.alphabet.encode("ascii"), dtype=np.uint8)
    return np.array([0, 1], dtype=np.uint8)


def trial_symbols(population, target_index, F, rng, mutation_rate=None, donors=None):
    """Discrete DE/rand/1 analogue for move strings and bit strings."""
    n = len(population)
    r1, r2, r3 = pick_donors(n, target_index, rng) if donors is None else donors
    base = _genome(population[r1])
    if isinstance(base, RealVector):
        raise InvalidInputError("trial_symbols needs symbol genomes; use trial_vector")
    t = _codes(base).copy()
    a, b = _codes(_genome(population[r2])), _codes(_genome(population[r3]))
    length = t.shape[0]
    take = (a != b) & (rng.random(length) < min(F, 1.0))
    t[take] = a[take]
    pm = 1.0 / max(length, 1) if mutation_rate is None else mutation_rate
    hit = rng.random(length) < pm
    if hit.any():
        alpha = _alphabet_codes(base)
        t[hit] = alpha[rng.integers(0, alpha.shape[0], size=int(hit.sum()))]
    return _from_codes(base, t)


def recombine(target, trial, CR, rng):
    """Binomial recombination: each gene from ``trial`` with probability
    ``CR``, plus one uniformly chosen gene always taken from ``trial``."""
    check_compatible(target, trial)
    d = len(target)
    mask = rng.random(d) < CR
    mask[rng.integers(0, d)] = True
    if isinstance(target, RealVector):
        return RealVector._trusted(np.where(mask, trial.values, target.values), target.bounds)
    return _from_codes(target, np.where(mask, _codes(trial), _codes(target)))


def make_offspring(population, target_index, config: DEConfig, rng, donors=None):
    """Trial generation followed by recombination with the target."""
    target = _genome(population[target_index])
    if isinstance(target, RealVector):
        trial = trial_vector(population, target_index, config.scale_factor, rng, config.bound_policy, donors)
    else:
        trial = trial_symbols(population, target_index, config.scale_factor, rng,
                              config.symbol_mutation_rate, donors)
    return recombine(target, trial, config.crossover_rate, rng)


def evaluate_offspring(make, evaluator, max_retries):
    """Call ``make()`` until the evaluator accepts the genome (Delete policy)."""
    for _ in range(max_retries):
        genome = make()
        fit = evaluator(genome)
        if fit is not None:
            return Individual.evaluated_with(genome, fit)
    return None


def de_step(population, config: DEConfig, fitness, rng):
    """One generation of DE with greedy one-to-one replacement.

    Donors are drawn from the current generation; the returned transient
    population holds, per index, the offspring if it is strictly fitter than
    the target and the target otherwise.  If a budgeted evaluator runs dry
    mid-generation the remaining targets are carried over unchanged.
    """
    evaluator = as_evaluator(fitness)
    nxt = list(population)
    for i, target in enumerate(population):
        try:
            child = evaluate_offspring(lambda: make_offspring(population, i, config, rng),
                                       evaluator, config.max_retries)
        except BudgetExhausted:
            break
        if child is not None and child.fitness > target.fitness:
            nxt[i] = child
    return nxt


def run_de(problem, config: DEConfig, population_size, termination, rng, callback=None):
    config.validate()
    if population_size < 4:
        raise ConfigError("DE needs population_size >= 4")

    def step(population, evaluator, rng):
        return de_step(population, config, evaluator, rng)

    return run_stepwise(problem, population_size, step, termination, rng, callback)
