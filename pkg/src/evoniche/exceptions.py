"""Exception hierarchy shared by every module in the package."""


class EvoNicheError(Exception):
    """Base class for all package errors."""


class InvalidInputError(EvoNicheError, ValueError):
    """An argument is malformed or inconsistent with another argument."""


class ContractViolation(EvoNicheError, ValueError):
    """A documented precondition does not hold (e.g. non-positive fitness
    passed to fitness-proportional selection)."""


class ConfigError(EvoNicheError, ValueError):
    """A run or experiment configuration is invalid."""


class ParseError(EvoNicheError, ValueError):
    """Text input (config, sequence file, move string) could not be parsed."""


class InitializationError(EvoNicheError, RuntimeError):
    """A population could not be initialized, e.g. no feasible genome was
    drawn within the retry limit."""
