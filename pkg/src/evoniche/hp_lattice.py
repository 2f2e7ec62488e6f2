"""3D cubic-lattice HP protein model.

Move-string encodings (absolute and relative internal coordinates), decoding
to lattice conformations, contact energy, infeasibility policies and an
exhaustive enumeration oracle for short sequences.

Relative moves are read in a local frame carried along the chain: a forward
vector ``f`` and an up vector ``u`` (initially +x and +z) with left
``l = u x f``.  F, L, R, U and D step along ``f``, ``l``, ``-l``, ``u`` and
``-u``.  After the step the new forward is the step direction; the up vector
is kept for F/L/R, becomes ``-f`` after U and ``f`` after D.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Optional, Union

import numpy as np

from ._validation import check_positive, check_positive_int, check_random_state
from .ea_core.engine import Problem
from .ea_core.genome import MoveString
from .exceptions import InitializationError, InvalidInputError, ParseError

RELATIVE_ALPHABET = "FLRUD"
ABSOLUTE_ALPHABET = "UDLRFB"

ABSOLUTE_DIRECTIONS = {
    "L": (-1, 0, 0),
    "R": (1, 0, 0),
    "F": (0, 1, 0),
    "B": (0, -1, 0),
    "U": (0, 0, 1),
    "D": (0, 0, -1),
}

_NEIGHBOUR_STEPS = tuple(ABSOLUTE_DIRECTIONS.values())


def _neg(v):
    return (-v[0], -v[1], -v[2])


def _cross(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def _relative_step(frame, move):
    f, u = frame
    if move == "F":
        d, u2 = f, u
    elif move == "L":
        d, u2 = _cross(u, f), u
    elif move == "R":
        d, u2 = _neg(_cross(u, f)), u
    elif move == "U":
        d, u2 = u, _neg(f)
    elif move == "D":
        d, u2 = _neg(u), f
    else:
        raise InvalidInputError(f"unknown relative move {move!r}")
    return d, (d, u2)


def _build_frame_table():
    axes = list(ABSOLUTE_DIRECTIONS.values())
    table = {}
    for f in axes:
        for u in axes:
            if sum(a * b for a, b in zip(f, u)) == 0:
                table[(f, u)] = {m: _relative_step((f, u), m) for m in RELATIVE_ALPHABET}
    return table


_FRAMES = _build_frame_table()  # 24 orthonormal (forward, up) frames
_START_FRAME = ((1, 0, 0), (0, 0, 1))


# -- types ---------------------------------------------------------------------

@dataclass(frozen=True)
class HPSequence:
    residues: str

    def __post_init__(self):
        res = self.residues.strip().upper()
        if not res:
            raise InvalidInputError("an HP sequence needs at least one residue")
        if set(res) - {"H", "P"}:
            raise InvalidInputError(f"HP sequence may only contain H and P: {self.residues!r}")
        object.__setattr__(self, "residues", res)

    def __len__(self):
        return len(self.residues)

    def __str__(self):
        return self.residues


def as_sequence(seq) -> HPSequence:
    return seq if isinstance(seq, HPSequence) else HPSequence(str(seq))


@dataclass(frozen=True, eq=False)
class Conformation:
    coords: np.ndarray
    feasible: bool
    collision_count: int

    @classmethod
    def from_coords(cls, coords) -> "Conformation":
        arr = np.asarray(coords, dtype=np.int64).reshape(-1, 3)
        n_distinct = len({tuple(c) for c in arr.tolist()})
        collisions = arr.shape[0] - n_distinct
        arr.flags.writeable = False
        return cls(arr, collisions == 0, collisions)

    def __len__(self):
        return self.coords.shape[0]

    def is_connected(self) -> bool:
        if len(self) < 2:
            return True
        steps = np.abs(np.diff(self.coords, axis=0)).sum(axis=1)
        return bool(np.all(steps == 1))


@dataclass(frozen=True)
class EnergyScheme:
    e_hh: float
    e_hp: float
    e_ph: float
    e_pp: float

    def table(self):
        return {("H", "H"): self.e_hh, ("H", "P"): self.e_hp, ("P", "H"): self.e_ph, ("P", "P"): self.e_pp}

    @classmethod
    def preset(cls, name) -> "EnergyScheme":
        key = str(name).strip().lower()
        if key not in _PRESETS:
            raise InvalidInputError(f"unknown energy scheme {name!r}; choose from {sorted(_PRESETS)}")
        return _PRESETS[key]


SCHEME1 = EnergyScheme(-1.0, 0.0, 0.0, 0.0)
SCHEME2 = EnergyScheme(-2.3, -1.0, -1.0, 0.0)
SCHEME3 = EnergyScheme(-2.0, 1.0, 1.0, 1.0)  # functional model protein

_PRESETS = {"1": SCHEME1, "scheme1": SCHEME1, "2": SCHEME2, "scheme2": SCHEME2,
            "3": SCHEME3, "scheme3": SCHEME3, "functional": SCHEME3}


@dataclass(frozen=True)
class Delete:
    """Reject infeasible conformations; callers resample."""


@dataclass(frozen=True)
class Penalty:
    """Keep infeasible conformations, charging ``c`` per collision.

    ``c=None`` means ``2 * |E(H, H)|`` of the energy scheme in use.
    """

    c: Optional[float] = None

    def __post_init__(self):
        if self.c is not None:
            check_positive(self.c, "c", strict=False)

    def cost(self, scheme: EnergyScheme) -> float:
        return 2.0 * abs(scheme.e_hh) if self.c is None else float(self.c)


FeasibilityPolicy = Union[Delete, Penalty]


def parse_policy(text, penalty=None) -> FeasibilityPolicy:
    key = str(text).strip().lower()
    if key == "delete":
        return Delete()
    if key == "penalty":
        return Penalty(penalty)
    raise InvalidInputError(f"unknown feasibility policy {text!r}; use 'delete' or 'penalty'")


# -- decoding ------------------------------------------------------------------

def _moves_text(moves, alphabet):
    text = moves.moves if isinstance(moves, MoveString) else str(moves)
    bad = set(text) - set(alphabet)
    if bad:
        raise InvalidInputError(f"moves {sorted(bad)} not in alphabet {alphabet!r}")
    return text


def _relative_coords(text):
    x, y, z = 1, 0, 0
    coords = [(0, 0, 0), (1, 0, 0)]
    frame = _START_FRAME
    for m in text:
        d, frame = _FRAMES[frame][m]
        x, y, z = x + d[0], y + d[1], z + d[2]
        coords.append((x, y, z))
    return coords


def decode_absolute(moves) -> Conformation:
    """Residue 0 at the origin, each move a fixed global axis step."""
    text = _moves_text(moves, ABSOLUTE_ALPHABET)
    x = y = z = 0
    coords = [(0, 0, 0)]
    for m in text:
        d = ABSOLUTE_DIRECTIONS[m]
        x, y, z = x + d[0], y + d[1], z + d[2]
        coords.append((x, y, z))
    return Conformation.from_coords(coords)


def decode_relative(moves, n_residues=None) -> Conformation:
    """Residues 0 and 1 at the origin and +x, then one residue per move.

    ``n_residues=1`` is accepted with an empty move string for the
    degenerate single-residue chain.
    """
    text = _moves_text(moves, RELATIVE_ALPHABET)
    if n_residues == 1 and not text:
        return Conformation.from_coords([(0, 0, 0)])
    return Conformation.from_coords(_relative_coords(text))


def parse_move_text(text) -> Conformation:
    """Decode a relative move string given as text, rejecting bad symbols."""
    s = str(text).strip().upper()
    bad = sorted(set(s) - set(RELATIVE_ALPHABET))
    if bad:
        raise ParseError(f"relative move string contains invalid symbols {bad}: {text!r}")
    return decode_relative(s)


# -- energy --------------------------------------------------------------------

def _contact_energy(coords, residues, table):
    """Sum E over pairs i+1 < j at unit lattice distance, counting each pair
    of lattice sites at most once (only matters for self-intersecting chains)."""
    occupied = {}
    for idx, c in enumerate(coords):
        occupied.setdefault(c, []).append(idx)
    seen = set()
    total = 0.0
    for i, (x, y, z) in enumerate(coords):
        for dx, dy, dz in _NEIGHBOUR_STEPS:
            site = (x + dx, y + dy, z + dz)
            for j in occupied.get(site, ()):
                if j > i + 1:
                    key = ((x, y, z), site)
                    if key in seen:
                        continue
                    seen.add(key)
                    seen.add((site, (x, y, z)))
                    total += table[(residues[i], residues[j])]
    return total


def energy(conf: Conformation, seq, scheme: EnergyScheme = SCHEME1) -> float:
    """HP energy of a feasible conformation."""
    seq = as_sequence(seq)
    if len(conf) != len(seq):
        raise InvalidInputError(f"conformation has {len(conf)} residues but sequence has {len(seq)}")
    if not conf.feasible:
        raise InvalidInputError("energy() needs a self-avoiding conformation; use fitness() with a policy")
    coords = [tuple(c) for c in conf.coords.tolist()]
    return _contact_energy(coords, seq.residues, scheme.table())


def _decode_for(moves, seq, encoding):
    if encoding == "relative":
        return decode_relative(moves, len(seq))
    if encoding == "absolute":
        return decode_absolute(moves)
    raise InvalidInputError(f"unknown encoding {encoding!r}")


def expected_moves(n_residues, encoding="relative") -> int:
    return max(n_residues - (2 if encoding == "relative" else 1), 0)


def fitness(moves, seq, scheme: EnergyScheme = SCHEME1, policy: FeasibilityPolicy = Delete(),
            encoding="relative") -> Optional[float]:
    """Maximization fitness ``-energy``.

    Infeasible chains return ``None`` under :class:`Delete` and
    ``-contact_energy - c * collisions`` under :class:`Penalty`.
    """
    seq = as_sequence(seq)
    text = moves.moves if isinstance(moves, MoveString) else str(moves)
    if len(text) != expected_moves(len(seq), encoding):
        raise InvalidInputError(
            f"{encoding} encoding of {len(seq)} residues needs {expected_moves(len(seq), encoding)} moves, "
            f"got {len(text)}")
    conf = _decode_for(text, seq, encoding)
    coords = [tuple(c) for c in conf.coords.tolist()]
    e = _contact_energy(coords, seq.residues, scheme.table())
    if conf.feasible:
        return -e
    if isinstance(policy, Delete):
        return None
    return -e - policy.cost(scheme) * conf.collision_count


# -- oracle and sampling ---------------------------------------------------------

def enumerate_optimal(seq, scheme: EnergyScheme = SCHEME1, max_n=12):
    """Exhaustive search over relative move strings with self-avoidance pruning.

    Returns
    -------
    min_energy : float
    count : int
        Number of optimal move strings (no symmetry reduction).
    """
    seq = as_sequence(seq)
    n = len(seq)
    if n > max_n:
        raise InvalidInputError(f"sequence length {n} exceeds the enumeration limit {max_n}")
    if n <= 2:
        return 0.0, 1
    res = seq.residues
    table = scheme.table()
    occupied = {(0, 0, 0): 0, (1, 0, 0): 1}
    best = [np.inf, 0]

    def visit(pos, frame, idx, e):
        if idx == n:
            if e < best[0] - 1e-12:
                best[0], best[1] = e, 1
            elif abs(e - best[0]) <= 1e-12:
                best[1] += 1
            return
        moves = _FRAMES[frame]
        ri = res[idx]
        for m in RELATIVE_ALPHABET:
            d, nframe = moves[m]
            site = (pos[0] + d[0], pos[1] + d[1], pos[2] + d[2])
            if site in occupied:
                continue
            de = 0.0
            for sx, sy, sz in _NEIGHBOUR_STEPS:
                j = occupied.get((site[0] + sx, site[1] + sy, site[2] + sz))
                if j is not None and j < idx - 1:
                    de += table[(res[j], ri)]
            occupied[site] = idx
            visit(site, nframe, idx + 1, e + de)
            del occupied[site]

    visit((1, 0, 0), _START_FRAME, 2, 0.0)
    return float(best[0]), best[1]


def random_feasible_genome(seq, rng=None, max_retries=10000, encoding="relative") -> MoveString:
    """Uniform random move strings, redrawn until the chain is self-avoiding."""
    check_positive_int(max_retries, "max_retries")
    rng = check_random_state(rng)
    seq = as_sequence(seq)
    alphabet = RELATIVE_ALPHABET if encoding == "relative" else ABSOLUTE_ALPHABET
    length = expected_moves(len(seq), encoding)
    for _ in range(max_retries):
        idx = rng.integers(0, len(alphabet), size=length)
        text = "".join(alphabet[i] for i in idx)
        if _decode_for(text, seq, encoding).feasible:
            return MoveString(text, alphabet)
    raise InitializationError(f"no feasible conformation for {seq} after {max_retries} draws")


def random_genome(seq, rng=None, encoding="relative") -> MoveString:
    rng = check_random_state(rng)
    alphabet = RELATIVE_ALPHABET if encoding == "relative" else ABSOLUTE_ALPHABET
    idx = rng.integers(0, len(alphabet), size=expected_moves(len(as_sequence(seq)), encoding))
    return MoveString("".join(alphabet[i] for i in idx), alphabet)


def make_problem(seq, scheme: EnergyScheme = SCHEME1, policy: FeasibilityPolicy = Delete(),
                 encoding="relative", max_retries=10000) -> Problem:
    """Wrap an HP sequence as a maximization :class:`Problem` over move strings.

    Fitness values are memoized per move string; the fitness is pure.
    """
    seq = as_sequence(seq)

    @lru_cache(maxsize=1 << 16)
    def evaluate_text(text):
        return fitness(text, seq, scheme, policy, encoding)

    def evaluate(genome):
        return evaluate_text(genome.moves)

    if isinstance(policy, Delete):
        def sample(rng):
            return random_feasible_genome(seq, rng, max_retries, encoding)
    else:
        def sample(rng):
            return random_genome(seq, rng, encoding)

    return Problem(evaluate=evaluate, sample=sample, name=f"hp:{seq}", metric="hamming",
                   representation="moves")


# -- rotations (used by invariance checks) ------------------------------------------

def lattice_rotations() -> list:
    """The 24 proper rotations of the cubic lattice as integer 3x3 matrices."""
    mats = []
    for perm in itertools.permutations(range(3)):
        for signs in itertools.product((1, -1), repeat=3):
            m = np.zeros((3, 3), dtype=np.int64)
            for row, (col, s) in enumerate(zip(perm, signs)):
                m[row, col] = s
            if round(np.linalg.det(m)) == 1:
                mats.append(m)
    return mats


# -- text formats ---------------------------------------------------------------

def parse_sequences(text) -> list:
    """One H/P string per line; blank lines and '#' comments are ignored."""
    out = []
    for lineno, line in enumerate(str(text).splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        try:
            out.append(HPSequence(body))
        except InvalidInputError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
    if not out:
        raise ParseError("no HP sequence found")
    return out


def read_sequences(path) -> list:
    return parse_sequences(Path(path).read_text())


def format_conformation(moves, seq, scheme: EnergyScheme = SCHEME1, encoding="relative") -> str:
    """Text block: move string, one ``x y z residue`` line per residue, energy."""
    seq = as_sequence(seq)
    text = moves.moves if isinstance(moves, MoveString) else str(moves)
    conf = _decode_for(text, seq, encoding)
    lines = [f"moves {text}"]
    for (x, y, z), r in zip(conf.coords.tolist(), seq.residues):
        lines.append(f"{x} {y} {z} {r}")
    if conf.feasible:
        lines.append(f"energy {energy(conf, seq, scheme):g}")
    else:
        lines.append(f"energy infeasible collisions={conf.collision_count}")
    return "\n".join(lines) + "\n"


def parse_conformation(text):
    """Inverse of :func:`format_conformation`: (moves, coords, residues, energy)."""
    lines = [ln.strip() for ln in str(text).splitlines() if ln.strip()]
    if len(lines) < 2 or not lines[0].startswith("moves") or not lines[-1].startswith("energy"):
        raise ParseError("conformation block must start with 'moves' and end with 'energy'")
    moves = lines[0][len("moves"):].strip()
    coords, residues = [], []
    for ln in lines[1:-1]:
        parts = ln.split()
        if len(parts) != 4:
            raise ParseError(f"bad residue line {ln!r}")
        coords.append(tuple(int(p) for p in parts[:3]))
        residues.append(parts[3])
    tail = lines[-1][len("energy"):].strip()
    e = None if tail.startswith("infeasible") else float(tail)
    return moves, np.array(coords, dtype=np.int64), "".join(residues), e
