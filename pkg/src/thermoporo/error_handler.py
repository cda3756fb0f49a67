"""
Exceptions and failure classification for thermoporo

This module handles:
- The package exception hierarchy
- Deciding whether a failure is a usage problem or a solver problem
- Mapping failures to process exit codes and logging them with context
"""

from typing import Any, Optional

import numpy as np

from .logger import get_logger

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SOLVER = 2


class ThermoporoError(Exception):
    """Base class for every error raised by the toolkit."""

    def __init__(self, message: str, **context: Any) -> None:
        super().__init__(message)
        self.context = context


class DomainError(ThermoporoError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ShapeError(ThermoporoError, ValueError):
    """Sample or grid shape is incompatible with the requested operation."""


class ArgumentError(ThermoporoError, ValueError):
    """A required argument is missing or inconsistent with the others."""


class SingularSystemError(ThermoporoError, np.linalg.LinAlgError):
    """A discrete linear system is numerically singular."""


class OverflowGuardError(ThermoporoError, OverflowError):
    """A closed form would overflow double precision for these parameters."""


class SolverError(ThermoporoError):
    """A solve failed; ``context`` carries the parameter set."""


class ConvergenceError(ThermoporoError):
    """Observed order of accuracy is below the required threshold."""


class ConfigError(ThermoporoError):
    """
    Invalid run configuration.

    Carries the line number (when the value came from a file), the offending
    key and, for unknown keys, the closest valid key.
    """

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        key: Optional[str] = None,
        suggestion: Optional[str] = None,
    ) -> None:
        prefix = f"line {line}: " if line is not None else ""
        hint = f" (did you mean '{suggestion}'?)" if suggestion else ""
        super().__init__(f"{prefix}{message}{hint}", line=line, key=key, suggestion=suggestion)
        self.line = line
        self.key = key
        self.suggestion = suggestion


class SweepError(ThermoporoError):
    """One case of a parameter sweep failed; the sweep was aborted."""

    def __init__(self, key: str, value: Any, cause: BaseException) -> None:
        super().__init__(f"sweep over {key} failed at value {value}: {cause}", key=key, value=value)
        self.key = key
        self.value = value
        self.__cause__ = cause


def is_solver_failure(error: BaseException) -> bool:
    """
    Determine if an error came from the numerics rather than from the user

    Solver failures:
        - Singular discrete systems
        - Overflow guards
        - Failed convergence checks
        - Any solve that raised with parameter context
        - Sweeps aborted by one of the above

    Usage failures:
        - Config errors, unknown keys, out-of-range values
        - Domain, shape and argument errors on direct input

    Args:
        error: Exception to classify

    Returns:
        True if the error should be reported as a solver failure
    """
    if isinstance(error, SweepError):
        cause = error.__cause__
        return cause is None or is_solver_failure(cause)

    solver_types = (
        SingularSystemError,
        OverflowGuardError,
        SolverError,
        ConvergenceError,
        np.linalg.LinAlgError,
        FloatingPointError,
    )
    if isinstance(error, solver_types):
        return True

    # Everything else (config, domain, shape, argument, OS errors) is a usage problem
    return False


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the CLI exit code (1 usage, 2 solver failure)."""
    return EXIT_SOLVER if is_solver_failure(error) else EXIT_USAGE


def handle_failed_run(command: str, error: BaseException) -> int:
    """
    Log a failed command with its context and return the exit code

    Args:
        command: Subcommand name that failed
        error: Exception that caused the failure

    Returns:
        Process exit code for the failure
    """
    code = exit_code_for(error)
    context: dict[str, Any] = {"command": command, "error": str(error), "exit_code": code}
    if isinstance(error, ThermoporoError):
        context.update({f"ctx_{k}": v for k, v in error.context.items() if v is not None})

    if code == EXIT_SOLVER:
        logger.error(f"Solver failure in '{command}': {error}", extra=context)
    else:
        logger.error(f"Invalid usage of '{command}': {error}", extra=context)
    return code
