"""Binary decoding, crossover and mutation operators.

Crossover operators are representation agnostic where the idea allows it:
cut-point and uniform crossover work on bit strings, move strings and real
vectors alike.  Blend crossover and the step mutations are real-valued only.
"""
from __future__ import annotations

import numpy as np

from .._validation import check_positive, check_probability
from ..exceptions import InvalidInputError
from .genome import BitString, MoveString, RealVector, check_compatible


def decode_binary_integer(bits) -> int:
    """Unsigned big-endian value of a bit string ('10011' -> 19)."""
    text = str(bits) if isinstance(bits, BitString) else "".join(str(int(b)) for b in bits)
    if not text:
        raise InvalidInputError("cannot decode an empty bit string")
    if set(text) - {"0", "1"}:
        raise InvalidInputError(f"not a bit string: {text!r}")
    return int(text, 2)


def decode_binary_vector(bits, field_widths) -> list:
    """Split ``bits`` into consecutive fields and decode each one."""
    text = str(bits) if isinstance(bits, BitString) else "".join(str(int(b)) for b in bits)
    widths = [int(w) for w in field_widths]
    if any(w <= 0 for w in widths):
        raise InvalidInputError("field widths must be positive")
    if sum(widths) != len(text):
        raise InvalidInputError(f"field widths sum to {sum(widths)} but bit string has length {len(text)}")
    out, pos = [], 0
    for w in widths:
        out.append(decode_binary_integer(text[pos:pos + w]))
        pos += w
    return out


def _splice(a, b, mask):
    """Children taking genes from ``b`` where mask is True (and vice versa)."""
    ga, gb = list(a.genes), list(b.genes)
    ca = [y if m else x for x, y, m in zip(ga, gb, mask)]
    cb = [x if m else y for x, y, m in zip(ga, gb, mask)]
    return a.with_genes(ca), b.with_genes(cb)


def crossover_one_point(a, b, rng, cut=None):
    """Swap the tails after a cut drawn uniformly from 1..len-1."""
    check_compatible(a, b, min_length=2)
    n = len(a)
    if cut is None:
        cut = int(rng.integers(1, n))
    elif not 1 <= cut <= n - 1:
        raise InvalidInputError(f"cut must lie in 1..{n - 1}, got {cut}")
    mask = np.arange(n) >= cut
    return _splice(a, b, mask)


def crossover_two_point(a, b, rng, cuts=None):
    """Swap the segment between two distinct interior cuts c1 < c2."""
    check_compatible(a, b, min_length=3)
    n = len(a)
    if cuts is None:
        c1, c2 = np.sort(rng.choice(np.arange(1, n), size=2, replace=False))
    else:
        c1, c2 = cuts
        if not 1 <= c1 < c2 <= n - 1:
            raise InvalidInputError(f"cuts must satisfy 1 <= c1 < c2 <= {n - 1}, got {cuts}")
    idx = np.arange(n)
    return _splice(a, b, (idx >= c1) & (idx < c2))


def crossover_uniform(a, b, rng, p_swap=0.5):
    check_compatible(a, b)
    p_swap = check_probability(p_swap, "p_swap")
    mask = rng.random(len(a)) < p_swap
    return _splice(a, b, mask)


def crossover_blend(a: RealVector, b: RealVector, w=0.5) -> RealVector:
    """Weighted average ``w*a + (1-w)*b``, clamped to the bounds."""
    check_compatible(a, b)
    if not isinstance(a, RealVector):
        raise InvalidInputError("blend crossover needs real vectors")
    w = check_probability(w, "w")
    if w == 1.0:
        return a
    return a.clipped(w * a.values + (1.0 - w) * b.values)


def mutate_bitflip(g: BitString, p, rng) -> BitString:
    p = check_probability(p, "p")
    if not isinstance(g, BitString):
        raise InvalidInputError("bitflip mutation needs a bit string")
    flip = rng.random(len(g)) < p
    return g.with_genes(b ^ int(f) for b, f in zip(g.bits, flip))


def mutate_random(g, p, rng):
    """Resample each position uniformly from its domain with probability ``p``."""
    p = check_probability(p, "p")
    n = len(g)
    hit = rng.random(n) < p
    if not hit.any():
        return g
    fresh = g.domain_sample(rng, n)
    genes = list(g.genes)
    for i in np.flatnonzero(hit):
        genes[i] = fresh[i]
    return g.with_genes(genes)


def mutate_delta(g: RealVector, p, step, rng) -> RealVector:
    """Add +step or -step (fair coin) to each component with probability ``p``."""
    p = check_probability(p, "p")
    check_positive(step, "step")
    if not isinstance(g, RealVector):
        raise InvalidInputError("delta mutation needs a real vector")
    n = len(g)
    hit = rng.random(n) < p
    sign = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    return g.clipped(g.values + hit * sign * step)


def mutate_gaussian(g: RealVector, p, sigma, rng) -> RealVector:
    p = check_probability(p, "p")
    check_positive(sigma, "sigma")
    if not isinstance(g, RealVector):
        raise InvalidInputError("gaussian mutation needs a real vector")
    n = len(g)
    hit = rng.random(n) < p
    noise = rng.normal(0.0, sigma, size=n)
    return g.clipped(g.values + hit * noise)


CROSSOVERS = {
    "one-point": crossover_one_point,
    "two-point": crossover_two_point,
    "uniform": crossover_uniform,
    "blend": crossover_blend,
}

MUTATIONS = {
    "bitflip": mutate_bitflip,
    "random": mutate_random,
    "delta": mutate_delta,
    "gaussian": mutate_gaussian,
}


def apply_crossover(name, a, b, rng, **params):
    """Run crossover ``name`` and always return a list of children."""
    if name not in CROSSOVERS:
        raise InvalidInputError(f"unknown crossover {name!r}; choose from {sorted(CROSSOVERS)}")
    if name == "blend":
        w = params.get("w", 0.5)
        return [crossover_blend(a, b, w), crossover_blend(b, a, w)]
    return list(CROSSOVERS[name](a, b, rng, **params))


def apply_mutation(name, g, rng, p=None, step=0.1, sigma=0.1):
    """Run mutation ``name``; ``p`` defaults to one expected change per genome."""
    if name not in MUTATIONS:
        raise InvalidInputError(f"unknown mutation {name!r}; choose from {sorted(MUTATIONS)}")
    if p is None:
        p = 1.0 / max(len(g), 1)
    if name == "bitflip":
        return mutate_bitflip(g, p, rng)
    if name == "random":
        return mutate_random(g, p, rng)
    if name == "delta":
        return mutate_delta(g, p, step, rng)
    return mutate_gaussian(g, p, sigma, rng)


def is_valid_genome(g) -> bool:
    """Closure check used by property tests."""
    if isinstance(g, RealVector):
        return bool(np.all(g.values >= g.lower) and np.all(g.values <= g.upper))
    if isinstance(g, MoveString):
        return set(g.moves) <= set(g.alphabet)
    if isinstance(g, BitString):
        return all(b in (0, 1) for b in g.bits)
    return False
