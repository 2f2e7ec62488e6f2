"""Config-driven experiment runner.

A config is either a flat ``key = value`` document (``#`` comments allowed)
or a JSON object with the same keys.  Command-line overrides win over the
file.  Each repeat ``r`` runs with seed ``seed + r``.

Outputs in ``out``:

``runs.csv``
    One row per logged generation.
``summary.json``
    Per-run best genome, best fitness and peak counts, plus the echoed spec.
``timing.json``
    Wall-clock seconds per run; kept apart so the two files above are
    byte-identical across reruns.
``best_run<r>.txt``
    HP problems only: best conformation of each run.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np

from . import hp_lattice as hp
from .benchmarks import benchmark_names, get_benchmark
from .diff_evolution import DEConfig, run_de
from .ea_core.engine import MaxEvaluations, RunConfig, run_generational
from .ea_core.genome import RealVector, fitness_array
from .exceptions import ConfigError, EvoNicheError, InvalidInputError
from .multimodal import NichingConfig, SpeciesConfig, ease_run, peak_metrics, run_crowding_de

logger = logging.getLogger("evoniche.cli")

ALGORITHMS = ("ga", "de", "crowding-de", "crowding-de-sl", "crowding-de-tl", "crowding-de-stl", "ease")
_VARIANTS = {"crowding-de": "plain", "crowding-de-sl": "sl", "crowding-de-tl": "tl", "crowding-de-stl": "stl"}
_HP_DEGRADE = {"crowding-de-tl": "crowding-de", "crowding-de-stl": "crowding-de-sl"}


@dataclass
class ExperimentSpec:
    """Everything needed to reproduce an experiment."""

    algorithm: str = "de"
    problem: str = "bench:sphere"
    seed: int = 0
    repeats: int = 1
    budget: int = 10000
    out: str = "results"
    # problem options
    dimension: Optional[int] = None
    sequence_index: int = 0
    energy_scheme: str = "scheme1"
    policy: str = "delete"
    penalty: Optional[float] = None
    encoding: str = "relative"
    # generational EA
    population_size: int = 50
    offspring_size: int = 50
    overlapping: bool = False
    parent_scheme: str = "binary-tournament"
    survival_scheme: str = "truncation"
    crossover: str = "auto"
    crossover_rate: float = 0.9
    mutation: str = "auto"
    mutation_p: Optional[float] = None
    mutation_sigma: float = 0.1
    mutation_step: float = 0.1
    max_retries: int = 20
    sharing_radius: Optional[float] = None
    sharing_alpha: float = 1.0
    # DE
    scale_factor: float = 0.5
    bound_policy: str = "reflect"
    symbol_mutation_rate: Optional[float] = None
    # niching
    sl_floor: float = 0.05
    tl_discount: float = 0.5
    species_radius: float = 0.1
    explosion_copies: int = 5
    stage_switch_fraction: float = 0.5
    random_injection_count: int = 5
    # peak certification
    value_tol: float = 1e-4
    dist_tol: float = 0.01


KEY_HELP = {
    "algorithm": "one of " + ", ".join(ALGORITHMS),
    "problem": "bench:<name> (" + ", ".join(benchmark_names()) + ") or hp:<sequence file>",
    "seed": "base seed; repeat r uses seed + r",
    "repeats": "number of independent runs",
    "budget": "fitness evaluations per run",
    "out": "output directory",
    "dimension": "sphere dimension (other benchmarks are fixed)",
    "sequence_index": "which sequence of an hp file to fold",
    "energy_scheme": "scheme1, scheme2 or scheme3",
    "policy": "delete or penalty (infeasible HP conformations)",
    "penalty": "penalty per collision; empty means 2|e_hh|",
    "encoding": "relative or absolute HP moves",
    "population_size": "population size (all algorithms)",
    "offspring_size": "offspring per generation (ga, ease)",
    "overlapping": "plus strategy when true (ga, ease)",
    "parent_scheme": "parent selection scheme",
    "survival_scheme": "survival selection scheme",
    "crossover": "operator name; auto = blend for ease on reals, one-point otherwise",
    "crossover_rate": "GA crossover probability, and DE CR",
    "mutation": "operator name; auto = gaussian for ease on reals, random otherwise",
    "mutation_p": "per-gene mutation probability; empty means 1/length",
    "mutation_sigma": "gaussian mutation scale",
    "mutation_step": "delta mutation step",
    "max_retries": "resampling attempts for rejected children",
    "sharing_radius": "fitness sharing radius for ga parent selection; empty disables",
    "sharing_alpha": "fitness sharing exponent",
    "scale_factor": "DE scale factor F",
    "bound_policy": "reflect or clamp",
    "symbol_mutation_rate": "DE resampling rate on move strings; empty means 1/length",
    "sl_floor": "spatial-locality roulette floor",
    "tl_discount": "temporal-locality discount",
    "species_radius": "EASE species radius",
    "explosion_copies": "EASE mutated copies per seed",
    "stage_switch_fraction": "EASE budget fraction before the species stage",
    "random_injection_count": "EASE random members per exploration generation",
    "value_tol": "peak certification value tolerance",
    "dist_tol": "peak certification distance tolerance",
}

_FIELDS = {f.name: f for f in fields(ExperimentSpec)}
_DEFAULTS = asdict(ExperimentSpec())


def _base_type(name):
    default = _DEFAULTS[name]
    if default is not None:
        return type(default)
    return int if name in ("dimension",) else float


def _coerce(name, value, where):
    """Turn a raw config value into the field's type or raise ConfigError."""
    typ = _base_type(name)
    if value is None or (isinstance(value, str) and value.strip().lower() in ("", "none", "null")):
        if _DEFAULTS[name] is None:
            return None
        raise ConfigError(f"{where}key {name!r}: a value is required")
    try:
        if typ is bool:
            if isinstance(value, bool):
                return value
            text = str(value).strip().lower()
            if text in ("true", "yes", "1", "on"):
                return True
            if text in ("false", "no", "0", "off"):
                return False
            raise ValueError(value)
        if typ is int:
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise ValueError(value)
            return int(str(value).strip()) if isinstance(value, str) else int(value)
        if typ is float:
            if isinstance(value, bool):
                raise ValueError(value)
            return float(value)
        return str(value).strip()
    except (TypeError, ValueError):
        raise ConfigError(f"{where}key {name!r}: expected {typ.__name__}, got {value!r}") from None


def _parse_pairs(text):
    pairs = []
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected key = value, got {body!r}")
        key, value = (part.strip() for part in body.split("=", 1))
        pairs.append((key, value, f"line {lineno}: "))
    return pairs


def _parse_json(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}: invalid JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError("JSON config must be an object")
    return [(k, v, "") for k, v in data.items()]


def parse_config(text, overrides=None) -> ExperimentSpec:
    """Parse and validate a config document.

    Parameters
    ----------
    text : str
        ``key = value`` lines or a JSON object.
    overrides : dict, optional
        Values that replace those from ``text`` (command-line flags).

    Returns
    -------
    ExperimentSpec
        With every default filled in.

    Raises
    ------
    ConfigError
        Unknown key, bad value type or an impossible algorithm/problem pair.
    """
    text = text or ""
    pairs = _parse_json(text) if text.lstrip().startswith("{") else _parse_pairs(text)
    for key, value in (overrides or {}).items():
        pairs.append((key, value, "override: "))
    values = {}
    for key, value, where in pairs:
        name = key.strip().lower().replace("-", "_")
        if name not in _FIELDS:
            raise ConfigError(f"{where}unknown key {key!r}")
        values[name] = _coerce(name, value, where)
    spec = ExperimentSpec(**values)
    return validate_spec(spec)


def validate_spec(spec: ExperimentSpec) -> ExperimentSpec:
    spec.algorithm = spec.algorithm.lower()
    if spec.algorithm not in ALGORITHMS:
        raise ConfigError(f"key 'algorithm': unknown algorithm {spec.algorithm!r}; choose from {', '.join(ALGORITHMS)}")
    if spec.repeats < 1:
        raise ConfigError("key 'repeats': must be >= 1")
    if spec.budget < 1:
        raise ConfigError("key 'budget': must be >= 1")
    if spec.seed < 0:
        raise ConfigError("key 'seed': must be >= 0")
    kind, _, target = spec.problem.partition(":")
    if kind == "bench":
        try:
            bench = get_benchmark(target, spec.dimension)
        except InvalidInputError as exc:
            raise ConfigError(f"key 'problem': {exc}") from None
        representation = "real"
        if spec.crossover == "auto":
            spec.crossover = "blend" if spec.algorithm == "ease" else "one-point"
        if spec.mutation == "auto":
            spec.mutation = "gaussian" if spec.algorithm == "ease" else "random"
        del bench
    elif kind == "hp":
        path = Path(target)
        if not path.is_file():
            raise ConfigError(f"key 'problem': sequence file {target!r} not found")
        try:
            seqs = hp.read_sequences(path)
        except EvoNicheError as exc:
            raise ConfigError(f"key 'problem': {exc}") from None
        if not 0 <= spec.sequence_index < len(seqs):
            raise ConfigError(f"key 'sequence_index': file holds {len(seqs)} sequence(s)")
        representation = "moves"
        if spec.algorithm in _HP_DEGRADE:
            new = _HP_DEGRADE[spec.algorithm]
            logger.warning("%s needs real-valued genomes; running %s on %s", spec.algorithm, new, spec.problem)
            spec.algorithm = new
        if spec.crossover == "auto":
            spec.crossover = "one-point"
        if spec.mutation == "auto":
            spec.mutation = "random"
        if spec.encoding not in ("relative", "absolute"):
            raise ConfigError(f"key 'encoding': expected relative or absolute, got {spec.encoding!r}")
        try:
            hp.EnergyScheme.preset(spec.energy_scheme)
            hp.parse_policy(spec.policy, spec.penalty)
        except EvoNicheError as exc:
            raise ConfigError(f"key 'energy_scheme'/'policy': {exc}") from None
    else:
        raise ConfigError(f"key 'problem': expected bench:<name> or hp:<path>, got {spec.problem!r}")
    if representation == "moves" and spec.mutation in ("gaussian", "delta"):
        raise ConfigError(f"key 'mutation': {spec.mutation} needs real-valued genomes")
    if representation == "moves" and spec.crossover == "blend":
        raise ConfigError("key 'crossover': blend needs real-valued genomes")
    try:
        _run_config(spec).validate()
        _de_config(spec).validate()
        _niching(spec).validate()
        _species(spec).validate()
    except (ConfigError, InvalidInputError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return spec


# -- building blocks ----------------------------------------------------------------

def _mutation_params(spec):
    params = {}
    if spec.mutation_p is not None:
        params["p"] = spec.mutation_p
    if spec.mutation == "gaussian":
        params["sigma"] = spec.mutation_sigma
    if spec.mutation == "delta":
        params["step"] = spec.mutation_step
    return params


def _run_config(spec):
    return RunConfig(
        population_size=spec.population_size, offspring_size=spec.offspring_size,
        overlapping=spec.overlapping, parent_scheme=spec.parent_scheme,
        survival_scheme=spec.survival_scheme, crossover=spec.crossover,
        crossover_rate=spec.crossover_rate, mutation=spec.mutation,
        mutation_params=_mutation_params(spec), termination=MaxEvaluations(spec.budget),
        max_retries=spec.max_retries, sharing_radius=spec.sharing_radius,
        sharing_alpha=spec.sharing_alpha,
    )


def _de_config(spec):
    return DEConfig(scale_factor=spec.scale_factor, crossover_rate=spec.crossover_rate,
                    bound_policy=spec.bound_policy, symbol_mutation_rate=spec.symbol_mutation_rate,
                    max_retries=spec.max_retries)


def _niching(spec):
    return NichingConfig(sharing_radius=spec.sharing_radius or 0.1, sharing_alpha=spec.sharing_alpha,
                         tl_discount=spec.tl_discount, sl_floor=spec.sl_floor)


def _species(spec):
    return SpeciesConfig(species_radius=spec.species_radius, explosion_copies=spec.explosion_copies,
                         stage_switch_fraction=spec.stage_switch_fraction,
                         random_injection_count=spec.random_injection_count)


def build_problem(spec):
    """Return ``(problem, known_peaks, hp_context)``; the last is None for benchmarks."""
    kind, _, target = spec.problem.partition(":")
    if kind == "bench":
        bench = get_benchmark(target, spec.dimension)
        problem = bench.as_problem()
        return problem, problem.known_peaks, None
    seq = hp.read_sequences(target)[spec.sequence_index]
    scheme = hp.EnergyScheme.preset(spec.energy_scheme)
    policy = hp.parse_policy(spec.policy, spec.penalty)
    problem = hp.make_problem(seq, scheme, policy, spec.encoding)
    return problem, None, (seq, scheme)


def _genome_json(genome):
    if isinstance(genome, RealVector):
        return genome.values.tolist()
    return str(genome)


def _fmt(x):
    return repr(float(x))


def run_experiment(spec: ExperimentSpec) -> int:
    """Run every repeat and write the output files.  Returns an exit status."""
    try:
        spec = validate_spec(spec)
        problem, peaks, hp_ctx = build_problem(spec)
        out = Path(spec.out)
        out.mkdir(parents=True, exist_ok=True)
        header = ["run", "generation", "evaluations", "best_fitness", "mean_fitness"]
        if peaks:
            header.append("peaks_found")
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        runs, timings = [], []
        for r in range(spec.repeats):
            seed = spec.seed + r
            started = time.perf_counter()
            rows = []

            def record(population, stats, rows=rows):
                row = [r, stats.generation, stats.evaluations, _fmt(stats.best_fitness), _fmt(stats.mean_fitness)]
                if peaks:
                    row.append(peak_metrics(population, peaks, spec.value_tol, spec.dist_tol)[0])
                rows.append(row)

            population, log = run_once(spec, problem, seed, record)
            timings.append({"run": r, "seed": seed, "wall_seconds": time.perf_counter() - started})
            writer.writerows(rows)
            fits = fitness_array(population)
            best = population[int(np.argmax(fits))]
            entry = {"run": r, "seed": seed, "evaluations": log[-1].evaluations,
                     "generations": log[-1].generation, "best_fitness": float(fits.max()),
                     "best_genome": _genome_json(best.genome)}
            if peaks:
                found, ratio = peak_metrics(population, peaks, spec.value_tol, spec.dist_tol)
                entry.update(peaks_found=found, peaks_total=len(peaks), peak_ratio=ratio)
            if hp_ctx is not None:
                seq, scheme = hp_ctx
                entry["best_energy"] = -float(fits.max())
                name = f"best_run{r}.txt"
                (out / name).write_text(hp.format_conformation(best.genome, seq, scheme, spec.encoding))
                entry["conformation_file"] = name
            runs.append(entry)
        (out / "runs.csv").write_text(buf.getvalue())
        summary = {"spec": asdict(spec), "runs": runs,
                   "best_fitness": max(e["best_fitness"] for e in runs)}
        if peaks:
            summary["mean_peak_ratio"] = float(np.mean([e["peak_ratio"] for e in runs]))
        (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        (out / "timing.json").write_text(json.dumps({"runs": timings}, indent=2) + "\n")
    except (EvoNicheError, ValueError, RuntimeError, OSError) as exc:
        logger.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def run_once(spec, problem, seed, callback=None):
    """One run; returns the final population and the generation log."""
    rng = np.random.default_rng(seed)
    term = MaxEvaluations(spec.budget)
    if spec.algorithm == "ga":
        return run_generational(_run_config(spec), problem, rng, callback)
    if spec.algorithm == "de":
        return run_de(problem, _de_config(spec), spec.population_size, term, rng, callback)
    if spec.algorithm == "ease":
        pop, _, log = ease_run(_run_config(spec), _species(spec), problem, rng, callback)
        return pop, log
    return run_crowding_de(problem, _de_config(spec), _niching(spec), _VARIANTS[spec.algorithm],
                           spec.population_size, term, rng, callback)


def _help_epilog():
    lines = ["config keys (default):"]
    for name in _FIELDS:
        default = _DEFAULTS[name]
        shown = "" if default is None else default
        lines.append(f"  {name} = {shown}  # {KEY_HELP[name]}")
    return "\n".join(lines)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="evoniche",
        description="Run evolutionary and niching optimizers on benchmark or HP folding problems.",
        epilog=_help_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--config", help="key = value or JSON config file")
    parser.add_argument("--seed", type=int, help=f"base seed (default {_DEFAULTS['seed']})")
    parser.add_argument("--algorithm", choices=ALGORITHMS, help=f"(default {_DEFAULTS['algorithm']})")
    parser.add_argument("--problem", help=f"bench:<name> or hp:<path> (default {_DEFAULTS['problem']})")
    parser.add_argument("--budget", type=int, help=f"evaluations per run (default {_DEFAULTS['budget']})")
    parser.add_argument("--repeats", type=int, help=f"number of runs (default {_DEFAULTS['repeats']})")
    parser.add_argument("--out", help=f"output directory (default {_DEFAULTS['out']})")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override any config key; may repeat")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    overrides = {}
    for item in args.set:
        if "=" not in item:
            print(f"error: --set expects KEY=VALUE, got {item!r}", file=sys.stderr)
            return 2
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    for key in ("seed", "algorithm", "problem", "budget", "repeats", "out"):
        if getattr(args, key) is not None:
            overrides[key] = getattr(args, key)
    try:
        text = Path(args.config).read_text() if args.config else ""
        spec = parse_config(text, overrides)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return run_experiment(spec)


if __name__ == "__main__":
    sys.exit(main())
