"""Real-valued test functions with known peaks, in maximization form.

Evaluators are vectorized: they take an array whose last axis is the
dimension and return one value per point.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._validation import check_bounds, check_random_state
from .ea_core.engine import Problem
from .ea_core.genome import RealVector
from .exceptions import InvalidInputError


@dataclass(eq=False)
class BenchmarkFunction:
    name: str
    dimension: int
    bounds: np.ndarray
    evaluator: Callable
    known_peaks: Optional[list] = None
    description: str = ""
    _oracle_peaks: Optional[list] = field(default=None, repr=False)

    def __post_init__(self):
        self.bounds = check_bounds(self.bounds, self.dimension)

    def __call__(self, x) -> float:
        x = np.asarray(getattr(x, "values", x), dtype=float)
        return float(self.evaluator(x.reshape(1, self.dimension))[0])

    def evaluate_many(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, self.dimension)
        return np.asarray(self.evaluator(pts), dtype=float)

    @property
    def peaks(self) -> list:
        """Shipped peak list, or the grid oracle's answer when none is shipped."""
        if self.known_peaks is not None:
            return self.known_peaks
        if self._oracle_peaks is None:
            self._oracle_peaks = grid_peak_oracle(self)
        return self._oracle_peaks

    def sample(self, rng) -> RealVector:
        rng = check_random_state(rng)
        return RealVector(rng.uniform(self.bounds[:, 0], self.bounds[:, 1]), self.bounds)

    def as_problem(self) -> Problem:
        peaks = self.peaks if (self.known_peaks is not None or self.dimension <= 2) else None
        return Problem(evaluate=self, sample=self.sample, name=f"bench:{self.name}",
                       metric="euclidean", known_peaks=peaks, representation="real")


def _equal_maxima(x):
    return np.sin(5.0 * np.pi * x[..., 0]) ** 6


def _uneven_decreasing_maxima(x):
    t = x[..., 0]
    envelope = np.exp(-2.0 * np.log(2.0) * ((t - 0.08) / 0.854) ** 2)
    return envelope * np.sin(5.0 * np.pi * (np.abs(t) ** 0.75 - 0.05)) ** 6


def _himmelblau(x):
    a, b = x[..., 0], x[..., 1]
    return -((a ** 2 + b - 11.0) ** 2 + (a + b ** 2 - 7.0) ** 2)


def _six_hump_camel(x):
    a, b = x[..., 0], x[..., 1]
    return -((4.0 - 2.1 * a ** 2 + a ** 4 / 3.0) * a ** 2 + a * b + (-4.0 + 4.0 * b ** 2) * b ** 2)


def _sphere(x):
    return -np.sum(x ** 2, axis=-1)


CAMEL_OPTIMUM = 1.0316284534898774


def equal_maxima() -> BenchmarkFunction:
    peaks = [(np.array([x]), 1.0) for x in (0.1, 0.3, 0.5, 0.7, 0.9)]
    return BenchmarkFunction("equal-maxima", 1, [[0.0, 1.0]], _equal_maxima, peaks,
                             "sin^6(5 pi x) on [0, 1]; five equal peaks")


def uneven_decreasing_maxima() -> BenchmarkFunction:
    return BenchmarkFunction("uneven-decreasing-maxima", 1, [[0.0, 1.0]], _uneven_decreasing_maxima, None,
                             "uneven peak spacing under a decaying envelope; peaks from the grid oracle")


def himmelblau() -> BenchmarkFunction:
    peaks = [
        (np.array([3.0, 2.0]), 0.0),
        (np.array([-2.805118094255692, 3.1313125109184394]), 0.0),
        (np.array([-3.7793102639198293, -3.2831860010764564]), 0.0),
        (np.array([3.5844283332831157, -1.8481265327069945]), 0.0),
    ]
    return BenchmarkFunction("himmelblau", 2, [[-6.0, 6.0], [-6.0, 6.0]], _himmelblau, peaks,
                             "negated Himmelblau; four global optima")


def six_hump_camel() -> BenchmarkFunction:
    peaks = [
        (np.array([0.08984200651937332, -0.7126564084370965]), CAMEL_OPTIMUM),
        (np.array([-0.08984201943108247, 0.7126563966263553]), CAMEL_OPTIMUM),
    ]
    return BenchmarkFunction("six-hump-camel", 2, [[-3.0, 3.0], [-2.0, 2.0]], _six_hump_camel, peaks,
                             "negated six-hump camel back; two global optima")


def sphere(dim=2) -> BenchmarkFunction:
    peaks = [(np.zeros(dim), 0.0)]
    return BenchmarkFunction("sphere", dim, [[-5.12, 5.12]] * dim, _sphere, peaks,
                             "negated sphere; unimodal control")


_FACTORIES = {
    "equal-maxima": equal_maxima,
    "uneven-decreasing-maxima": uneven_decreasing_maxima,
    "himmelblau": himmelblau,
    "six-hump-camel": six_hump_camel,
    "sphere": sphere,
}


def builtin_suite() -> list:
    return [factory() for factory in _FACTORIES.values()]


def get_benchmark(name, dim=None) -> BenchmarkFunction:
    key = str(name).strip().lower().replace("_", "-")
    if key not in _FACTORIES:
        raise InvalidInputError(f"unknown benchmark {name!r}; choose from {sorted(_FACTORIES)}")
    if dim is not None:
        if key != "sphere":
            raise InvalidInputError(f"benchmark {key} has a fixed dimension")
        return sphere(int(dim))
    return _FACTORIES[key]()


def benchmark_names() -> list:
    return sorted(_FACTORIES)


# -- grid oracle ---------------------------------------------------------------

def _is_local_max(values):
    """Interior grid points no lower than any neighbour and higher than one."""
    ndim = values.ndim
    inner = tuple(slice(1, -1) for _ in range(ndim))
    centre = values[inner]
    ge = np.ones(centre.shape, dtype=bool)
    gt = np.zeros(centre.shape, dtype=bool)
    for offset in np.ndindex(*([3] * ndim)):
        if all(o == 1 for o in offset):
            continue
        sl = tuple(slice(o, values.shape[k] - 2 + o) for k, o in enumerate(offset))
        nb = values[sl]
        ge &= centre >= nb
        gt |= centre > nb
    mask = np.zeros(values.shape, dtype=bool)
    mask[inner] = ge & gt
    return mask


def _bisect_coordinate(f, x, k, lo, hi, iters=60):
    """Bisection on the sign of a central-difference slope along axis ``k``."""
    eps = 1e-9 * max(1.0, hi - lo)

    def slope(t):
        a, b = x.copy(), x.copy()
        a[k], b[k] = t - eps, t + eps
        return f(b) - f(a)

    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if slope(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def grid_peak_oracle(f: BenchmarkFunction, resolution=1000, max_sweeps=200):
    """Locate local maxima on a regular grid, then polish each one by
    coordinate-wise bisection.

    Returns
    -------
    peaks : list of (location ndarray, value)
        Sorted by location.
    """
    if f.dimension > 2:
        raise InvalidInputError("the grid oracle handles at most two dimensions")
    if resolution < 1000:
        raise InvalidInputError("resolution must be at least 1000 points per dimension")
    axes = [np.linspace(lo, hi, resolution) for lo, hi in f.bounds]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    values = f.evaluate_many(mesh.reshape(-1, f.dimension)).reshape(mesh.shape[:-1])
    steps = np.array([ax[1] - ax[0] for ax in axes])
    peaks = []
    for idx in zip(*np.nonzero(_is_local_max(values))):
        x = mesh[idx].astype(float).copy()
        for _ in range(max_sweeps):
            prev = x.copy()
            for k in range(f.dimension):
                lo = max(f.bounds[k, 0], x[k] - steps[k])
                hi = min(f.bounds[k, 1], x[k] + steps[k])
                x[k] = _bisect_coordinate(f, x, k, lo, hi)
            if np.max(np.abs(x - prev)) < 1e-13:
                break
        if all(np.linalg.norm(x - p) > np.min(steps) for p, _ in peaks):
            peaks.append((x, f(x)))
    peaks.sort(key=lambda p: tuple(p[0]))
    return peaks
