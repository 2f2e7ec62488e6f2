"""Evolutionary and niching optimizers with HP lattice folding and benchmark problems."""
from . import benchmarks, diff_evolution, ea_core, hp_lattice, multimodal
from .diff_evolution import DEConfig, de_step, run_de
from .ea_core import Individual, MoveString, Problem, RealVector, RunConfig, run_generational
from .estimators import EASE, CrowdingDE, DifferentialEvolution, GeneticAlgorithm
from .exceptions import (
    ConfigError,
    ContractViolation,
    EvoNicheError,
    InitializationError,
    InvalidInputError,
    ParseError,
)
from .multimodal import CrowdingVariant, NichingConfig, SpeciesConfig, crowding_de_step, ease_run, peak_metrics

__version__ = "0.1.0"
