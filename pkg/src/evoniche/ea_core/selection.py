"""Parent and survival selection schemes.

Every scheme maps a fitness vector to a list of member indices.  Fitness is
maximized.  Deterministic ties always go to the lower population index.
"""
from __future__ import annotations

from enum import Enum

import numpy as np
from scipy.stats import rankdata

from ..exceptions import ContractViolation, InvalidInputError
from .genome import fitness_array


class SelectionScheme(str, Enum):
    FITNESS_PROPORTIONAL = "fitness-proportional"
    RANK_PROPORTIONAL = "rank-proportional"
    UNIFORM_DETERMINISTIC = "uniform-deterministic"
    UNIFORM_STOCHASTIC = "uniform-stochastic"
    BINARY_TOURNAMENT = "binary-tournament"
    TRUNCATION = "truncation"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        try:
            return cls(key)
        except ValueError:
            choices = ", ".join(s.value for s in cls)
            raise InvalidInputError(f"unknown selection scheme {value!r}; choose from {choices}") from None


def selection_probabilities(population, scheme) -> np.ndarray:
    """Per-member draw probability for the roulette-style schemes."""
    scheme = SelectionScheme.parse(scheme)
    f = fitness_array(population)
    n = f.shape[0]
    if scheme is SelectionScheme.FITNESS_PROPORTIONAL:
        if np.any(f <= 0):
            raise ContractViolation(
                "fitness-proportional selection needs strictly positive fitness; "
                "wrap the problem with shift_fitness() first"
            )
        return f / f.sum()
    if scheme is SelectionScheme.RANK_PROPORTIONAL:
        ranks = rankdata(f, method="average")  # worst = 1, best = n
        return ranks / ranks.sum()
    if scheme is SelectionScheme.UNIFORM_STOCHASTIC:
        return np.full(n, 1.0 / n)
    raise InvalidInputError(f"{scheme.value} has no per-draw probability vector")


def _tournament(f, k, rng):
    n = f.shape[0]
    if n == 1:
        return np.zeros(k, dtype=int)
    a = rng.integers(0, n, size=k)
    b = rng.integers(0, n - 1, size=k)
    b = b + (b >= a)
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    # ties go to the lower index
    return np.where(f[hi] > f[lo], hi, lo)


def select(population, scheme, k, rng) -> np.ndarray:
    """Select ``k`` member indices from ``population``.

    Parameters
    ----------
    population : sequence of Individual or array-like of fitness values
    scheme : SelectionScheme or str
    k : int
        Number of indices to return.
    rng : numpy.random.Generator

    Returns
    -------
    indices : ndarray of int, shape (k,)
        Stochastic schemes sample with replacement.  Truncation returns the
        ``k`` fittest members ordered best first.
    """
    scheme = SelectionScheme.parse(scheme)
    f = fitness_array(population)
    n = f.shape[0]
    if k < 0:
        raise InvalidInputError(f"k must be non-negative, got {k}")
    if scheme is SelectionScheme.TRUNCATION:
        if k > n:
            raise InvalidInputError(f"truncation cannot select {k} of {n} members")
        return np.argsort(-f, kind="stable")[:k]
    if scheme is SelectionScheme.UNIFORM_DETERMINISTIC:
        return np.arange(k) % n
    if scheme is SelectionScheme.BINARY_TOURNAMENT:
        return _tournament(f, k, rng)
    p = selection_probabilities(f, scheme)
    return rng.choice(n, size=k, p=p)


def shift_fitness(fitness, margin=1e-12):
    """Affine shift making every value strictly positive.

    Fitness-proportional selection refuses non-positive values instead of
    shifting them silently; callers who accept the altered selection
    pressure can apply this explicitly.
    """
    f = np.asarray(fitness, dtype=float)
    low = f.min()
    if low > 0:
        return f.copy()
    return f - low + max(margin, margin * (f.max() - low))
