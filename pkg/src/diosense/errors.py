"""Exception hierarchy shared by every module.

The CLI maps :class:`DomainError` to exit code 2 and
:class:`ResourceLimitError` to exit code 3.
"""


class DomainError(ValueError):
    """Input outside the domain of an operation."""

    code = "DomainError"


class NotCoprimeError(DomainError):
    code = "NotCoprime"


class NoZeroSumSolutionError(DomainError):
    code = "NoZeroSumSolution"


class DegenerateModelError(DomainError):
    """The data cannot support the requested model order."""

    code = "DegenerateModel"


class ResourceLimitError(RuntimeError):
    """An enumeration would exceed the configured size budget."""

    code = "ResourceLimit"

    def __init__(self, message, advisory=None):
        super().__init__(message)
        self.advisory = advisory
