"""Representations, operator catalog and the generational loop."""
from .engine import (
    BudgetExhausted,
    Evaluator,
    GenerationStats,
    MaxEvaluations,
    MaxGenerations,
    MaxWallClockSeconds,
    MinImprovement,
    Problem,
    RunConfig,
    RunState,
    breed,
    canonical_ga_config,
    check_termination,
    initialize_population,
    population_stats,
    run_generational,
    run_stepwise,
    survival_select,
)
from .genome import BitString, Genome, Individual, MoveString, RealVector, check_compatible, fitness_array
from .selection import SelectionScheme, select, selection_probabilities, shift_fitness
from .variation import (
    apply_crossover,
    apply_mutation,
    crossover_blend,
    crossover_one_point,
    crossover_two_point,
    crossover_uniform,
    decode_binary_integer,
    decode_binary_vector,
    is_valid_genome,
    mutate_bitflip,
    mutate_delta,
    mutate_gaussian,
    mutate_random,
)
