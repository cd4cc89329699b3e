"""Exception hierarchy.

The CLI maps these onto exit codes: precondition-type errors exit 3,
construction failures (shortfall, convergence, retries) exit 4.
"""

from __future__ import annotations


class QuasirandError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.details = details

    def to_dict(self) -> dict:
        return {"error": type(self).__name__, "message": str(self), **self.details}


class PreconditionError(QuasirandError, ValueError):
    exit_code = 3


class UnsupportedError(PreconditionError):
    pass


class InvalidPairError(PreconditionError):
    pass


class WorkCapExceeded(PreconditionError):
    pass


class GraphParseError(QuasirandError, ValueError):
    exit_code = 3

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})", offset=offset)
        self.offset = offset


class ConstructionError(QuasirandError):
    exit_code = 4


class ReservoirShortfall(ConstructionError):
    pass


class ConvergenceFailure(ConstructionError):
    pass


class RetriesExhausted(ConstructionError):
    pass
