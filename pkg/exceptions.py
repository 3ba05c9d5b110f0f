"""
Toolkit exceptions
Every error carries the exit code the command line reports for it
"""


class ToolkitError(Exception):
    """Base error: a detail message plus the process exit code"""

    exit_code = 1

    def __init__(self, detail: str, *, exit_code: int | None = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code

    def __str__(self) -> str:
        return self.detail


class InputError(ToolkitError):
    """Malformed data: dimension mismatch, non-finite entries, unreadable files"""

    exit_code = 2


class ConfigError(ToolkitError):
    """A configuration invariant does not hold"""

    exit_code = 2


class PreconditionError(ToolkitError):
    """The caller broke an operation precondition"""

    exit_code = 2


class DomainError(ToolkitError):
    """A closed-form bound evaluated outside the region where it is defined"""

    exit_code = 2


class SolverError(ToolkitError):
    """Numerical failure at run time (singular system, refused enumeration)"""

    exit_code = 1
