"""Exception hierarchy.

Every error carries a stable ``code`` (used in CLI error objects) and an
optional ``witness`` payload that is JSON-serialisable.
"""

from __future__ import annotations


class PlumbError(Exception):
    code = "PlumbError"
    #: CLI exit status: 1 for computation errors, 2 for usage/parse errors.
    exit_status = 1

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.message = message
        self.witness = witness

    def to_json(self) -> dict:
        return {"code": self.code, "message": self.message, "witness": self.witness}


class InputError(PlumbError):
    code = "InputError"
    exit_status = 2


class GraphSyntaxError(InputError):
    code = "SyntaxError"

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}",
                         {"line": line, "column": column})
        self.line = line
        self.column = column


class NotATree(InputError):
    code = "NotATree"


class NotNegativeDefinite(InputError):
    code = "NotNegativeDefinite"


class DuplicateVertex(InputError):
    code = "DuplicateVertex"


class UnknownVertex(InputError):
    code = "UnknownVertex"


class NotAnEdge(InputError):
    code = "NotAnEdge"


class IndexMismatch(InputError):
    code = "IndexMismatch"


class NotInLprime(InputError):
    code = "NotInLprime"


class NotEffective(InputError):
    code = "NotEffective"


class BoxTooLarge(PlumbError):
    code = "BoxTooLarge"


class EmptyImage(PlumbError):
    code = "EmptyImage"


class SupportTooLarge(PlumbError):
    code = "SupportTooLarge"


class BlowupBudgetExceeded(PlumbError):
    code = "BlowupBudgetExceeded"


class TvSearchExceeded(PlumbError):
    code = "TvSearchExceeded"


class AssumptionViolated(PlumbError):
    """A structural claim the recursion relies on failed at runtime."""

    code = "AssumptionViolated"
