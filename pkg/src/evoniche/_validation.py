"""Small argument-checking helpers in the spirit of ``sklearn.utils.validation``."""
import numbers

import numpy as np

from .exceptions import InvalidInputError


def check_random_state(seed):
    """Turn ``seed`` into a :class:`numpy.random.Generator`.

    ``None`` gives a fresh unseeded generator, an int seeds a new PCG64
    stream and an existing Generator is passed through untouched.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None or isinstance(seed, (numbers.Integral, np.integer)):
        return np.random.default_rng(None if seed is None else int(seed))
    raise InvalidInputError(f"{seed!r} cannot be used to seed a numpy Generator")


def check_probability(value, name):
    if not isinstance(value, numbers.Real) or not 0.0 <= value <= 1.0:
        raise InvalidInputError(f"{name} must be a probability in [0, 1], got {value!r}")
    return float(value)


def check_positive(value, name, strict=True):
    if not isinstance(value, numbers.Real) or np.isnan(value):
        raise InvalidInputError(f"{name} must be a real number, got {value!r}")
    if (strict and value <= 0) or (not strict and value < 0):
        bound = "> 0" if strict else ">= 0"
        raise InvalidInputError(f"{name} must be {bound}, got {value!r}")
    return value


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, (numbers.Integral, np.integer)):
        raise InvalidInputError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise InvalidInputError(f"{name} must be >= {minimum}, got {value!r}")
    return int(value)


def check_bounds(bounds, dim=None):
    """Return bounds as a float array of shape (dim, 2) with lo <= hi."""
    arr = np.asarray(bounds, dtype=float)
    if arr.ndim == 1 and arr.shape[0] == 2:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidInputError(f"bounds must have shape (dim, 2), got {arr.shape}")
    if dim is not None:
        if arr.shape[0] == 1 and dim > 1:
            arr = np.repeat(arr, dim, axis=0)
        elif arr.shape[0] != dim:
            raise InvalidInputError(f"expected {dim} bound pairs, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)) or np.any(arr[:, 0] > arr[:, 1]):
        raise InvalidInputError("bounds must be finite with lo <= hi")
    return arr
