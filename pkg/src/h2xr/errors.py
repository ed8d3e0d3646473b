"""Error taxonomy shared by all modules.

DomainError marks invalid inputs or violated preconditions (CLI exit 2),
NumericsError marks failures of the numerics themselves, e.g. Riccati
blow-up or a non-finite integrator state (CLI exit 3).
"""


class DomainError(ValueError):
    """Input outside the documented domain of an operation."""


class NumericsError(RuntimeError):
    """A numerical procedure failed or lost the required accuracy."""

    def __init__(self, message, **info):
        super().__init__(message)
        self.info = dict(info)
