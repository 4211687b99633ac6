"""
Exception hierarchy shared by every layer.

Everything derives from ValueError so callers that only care about "bad
input" can keep catching ValueError. The CLI maps the subclasses to exit
codes (see config.py).
"""


class LabError(ValueError):
    """Base class for every error raised by the lab."""


class StructuralError(LabError):
    """Shapes or dimensions do not match (LP rows, vector lengths, models)."""


class DomainError(LabError):
    """An argument lies outside the mathematical domain of an operation."""


class PreconditionError(LabError):
    """A documented precondition of an operation does not hold."""


class UnsupportedError(LabError):
    """The request is well-formed but outside what the engine handles exactly."""


class CapExceededError(LabError):
    """A computation would exceed one of the configured size caps."""

    def __init__(self, cap_name: str, message: str):
        super().__init__(f"{cap_name}: {message}")
        self.cap_name = cap_name


class TruncationTooSmallError(LabError):
    """The finite truncation has no room for the requested witness; enlarge N or d."""


class SearchFailure(LabError):
    """A witness search came up empty. This is never a refutation."""


class SpecError(LabError):
    """An experiment spec failed validation; `field` is a dotted path to the culprit."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
