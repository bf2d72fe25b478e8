"""
Exception hierarchy and CLI error boundary for shapesum.

Every failure the library reports derives from ShapesumError, and each
subclass carries the process exit code the command-line surface uses.
"""

import logging
from typing import Any, Dict, List, Optional

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_RESOURCE = 4


class ShapesumError(Exception):
    """Base exception for shapesum errors."""
    exit_code = EXIT_USAGE


class ShapeError(ShapesumError):
    """Invalid shape description or profile."""

    def __init__(self, message: str, violations: Optional[List[Any]] = None):
        super().__init__(message)
        self.violations = list(violations or [])


class UnsupportedShapeError(ShapesumError):
    """No closed form exists for the requested shape."""
    pass


class ConfigurationError(ShapesumError):
    """Bad summation, quadrature, grid or environment setting."""
    pass


class DomainError(ShapesumError):
    """Input outside the mathematical domain (Im guard, pole proximity)."""
    exit_code = EXIT_DOMAIN


class ResourceError(ShapesumError):
    """A term budget or subdivision limit was exhausted."""
    exit_code = EXIT_RESOURCE

    def __init__(self, message: str, achieved_estimate: float = float('inf')):
        super().__init__(message)
        self.achieved_estimate = achieved_estimate


class TermEvaluationError(ShapesumError):
    """A summand could not be evaluated at a lattice point."""
    exit_code = EXIT_DOMAIN

    def __init__(self, m: int, n: int, reason: str = ""):
        super().__init__(f"term evaluation failed at (m={m}, n={n}){': ' + reason if reason else ''}")
        self.m = m
        self.n = n


class VerificationFailure(ShapesumError):
    """One or more verification checks did not pass."""
    exit_code = EXIT_VERIFY_FAILED

    def __init__(self, failed: List[str]):
        super().__init__(f"{len(failed)} check(s) failed: {', '.join(failed)}")
        self.failed = failed


class ErrorHandler:
    """
    Translates exceptions raised under the CLI into exit codes and
    structured error payloads, logging each one.
    """

    def __init__(self, context: str = "shapesum"):
        self.context = context
        self.logger = logging.getLogger(__name__)

    def exit_code_for(self, error: BaseException) -> int:
        if isinstance(error, ShapesumError):
            return error.exit_code
        if isinstance(error, (ValueError, TypeError)):
            return EXIT_USAGE
        return EXIT_VERIFY_FAILED

    def describe(self, error: BaseException) -> Dict[str, Any]:
        """Build the JSON error payload for an exception."""
        payload: Dict[str, Any] = {
            "error": type(error).__name__,
            "message": str(error),
            "exit_code": self.exit_code_for(error),
        }
        if isinstance(error, ResourceError):
            payload["achieved_estimate"] = error.achieved_estimate
        if isinstance(error, TermEvaluationError):
            payload["m"] = error.m
            payload["n"] = error.n
        if isinstance(error, ShapeError) and error.violations:
            payload["violations"] = [str(v) for v in error.violations]
        return payload

    def handle(self, error: BaseException) -> int:
        """Log the error and return the exit code."""
        code = self.exit_code_for(error)
        if isinstance(error, ShapesumError):
            self.logger.error(f"{self.context}: {type(error).__name__}: {error}")
        else:
            self.logger.exception(f"{self.context}: unexpected failure: {error}")
        return code
