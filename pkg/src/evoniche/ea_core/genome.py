"""Genome representations and the Individual container.

Three fixed-length linear genomes are supported: bit strings, bounded real
vectors and move strings over a finite alphabet.  All of them are immutable
values; operators build new genomes through :meth:`with_genes`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .._validation import check_bounds
from ..exceptions import InvalidInputError


@dataclass(frozen=True)
class BitString:
    bits: tuple

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise InvalidInputError("bit string entries must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_str(cls, text: str) -> "BitString":
        if set(text) - {"0", "1"}:
            raise InvalidInputError(f"not a bit string: {text!r}")
        return cls(tuple(int(c) for c in text))

    @property
    def genes(self):
        return self.bits

    def with_genes(self, genes) -> "BitString":
        return BitString(tuple(genes))

    def domain_sample(self, rng, size):
        return rng.integers(0, 2, size=size)

    def __len__(self):
        return len(self.bits)

    def __str__(self):
        return "".join(map(str, self.bits))


@dataclass(frozen=True)
class MoveString:
    moves: str
    alphabet: str = "FLRUD"

    def __post_init__(self):
        moves = "".join(self.moves)
        if len(set(self.alphabet)) != len(self.alphabet) or not self.alphabet:
            raise InvalidInputError(f"alphabet must be non-empty with unique symbols: {self.alphabet!r}")
        bad = set(moves) - set(self.alphabet)
        if bad:
            raise InvalidInputError(f"symbols {sorted(bad)} not in alphabet {self.alphabet!r}")
        object.__setattr__(self, "moves", moves)

    @property
    def genes(self):
        return self.moves

    def with_genes(self, genes) -> "MoveString":
        return MoveString("".join(genes), self.alphabet)

    def domain_sample(self, rng, size):
        idx = rng.integers(0, len(self.alphabet), size=size)
        return [self.alphabet[i] for i in idx]

    def codes(self) -> np.ndarray:
        """ASCII codes of the moves, handy for vectorized Hamming distances."""
        return np.frombuffer(self.moves.encode("ascii"), dtype=np.uint8)

    def __len__(self):
        return len(self.moves)

    def __str__(self):
        return self.moves


@dataclass(frozen=True, eq=False)
class RealVector:
    values: np.ndarray
    bounds: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        bounds = check_bounds(self.bounds, dim=values.shape[0])
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("real vector values must be finite")
        if np.any(values < bounds[:, 0]) or np.any(values > bounds[:, 1]):
            raise InvalidInputError(f"values {values} outside bounds")
        values.flags.writeable = False
        bounds = bounds.copy()
        bounds.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "bounds", bounds)

    @property
    def genes(self):
        return self.values

    @property
    def lower(self):
        return self.bounds[:, 0]

    @property
    def upper(self):
        return self.bounds[:, 1]

    @classmethod
    def _trusted(cls, values, bounds) -> "RealVector":
        """Skip validation; callers guarantee finite in-bounds values and
        already-validated read-only bounds."""
        obj = object.__new__(cls)
        values = np.asarray(values, dtype=float)
        values.flags.writeable = False
        object.__setattr__(obj, "values", values)
        object.__setattr__(obj, "bounds", bounds)
        return obj

    def with_genes(self, genes) -> "RealVector":
        return RealVector(np.asarray(genes, dtype=float), self.bounds)

    def clipped(self, values) -> "RealVector":
        values = np.asarray(values, dtype=float)
        if not np.isfinite(values).all():
            raise InvalidInputError("real vector values must be finite")
        return RealVector._trusted(np.clip(values, self.bounds[:, 0], self.bounds[:, 1]), self.bounds)

    def domain_sample(self, rng, size=None):
        return rng.uniform(self.lower, self.upper)

    def __len__(self):
        return self.values.shape[0]

    def __eq__(self, other):
        if not isinstance(other, RealVector):
            return NotImplemented
        return np.array_equal(self.values, other.values) and np.array_equal(self.bounds, other.bounds)

    __hash__ = None

    def __repr__(self):
        return f"RealVector({self.values.tolist()})"


Genome = Union[BitString, RealVector, MoveString]


def check_compatible(a: Genome, b: Genome, min_length: int = 1) -> None:
    """Raise unless ``a`` and ``b`` are the same variant with the same length."""
    if type(a) is not type(b):
        raise InvalidInputError(f"genome variants differ: {type(a).__name__} vs {type(b).__name__}")
    if len(a) != len(b):
        raise InvalidInputError(f"genome lengths differ: {len(a)} vs {len(b)}")
    if len(a) < min_length:
        raise InvalidInputError(f"genome length must be >= {min_length}, got {len(a)}")
    if isinstance(a, MoveString) and a.alphabet != b.alphabet:
        raise InvalidInputError("move strings use different alphabets")
    if isinstance(a, RealVector) and a.bounds is not b.bounds and not np.array_equal(a.bounds, b.bounds):
        raise InvalidInputError("real vectors have different bounds")


@dataclass
class Individual:
    """A genome plus its cached fitness (maximization convention).

    ``delta`` holds the temporal-locality history used by CrowdingDE-TL; it
    stays ``None`` for every other algorithm.
    """

    genome: Genome
    fitness: float = math.nan
    evaluated: bool = False
    delta: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.evaluated and not math.isfinite(self.fitness):
            raise InvalidInputError(f"evaluated individual has non-finite fitness {self.fitness!r}")
        if self.delta is not None:
            self.delta = np.asarray(self.delta, dtype=float)
            if self.delta.shape != (len(self.genome),):
                raise InvalidInputError("delta must have the genome's dimension")

    @classmethod
    def evaluated_with(cls, genome: Genome, fitness: float, delta=None) -> "Individual":
        return cls(genome, float(fitness), True, delta)


Population = list  # list[Individual]; order is meaningful for tie-breaking


def fitness_array(population: Sequence) -> np.ndarray:
    """Fitness values of a population as a float array.

    Accepts a sequence of evaluated :class:`Individual` or plain numbers.
    """
    if len(population) == 0:
        raise InvalidInputError("population is empty")
    first = population[0]
    if isinstance(first, Individual):
        if not all(ind.evaluated for ind in population):
            raise InvalidInputError("population contains unevaluated members")
        return np.fromiter((ind.fitness for ind in population), dtype=float, count=len(population))
    return np.asarray(population, dtype=float)
