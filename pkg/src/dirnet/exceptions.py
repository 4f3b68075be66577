"""Exception types raised by dirnet."""


class NetworkValidationError(ValueError):
    """Input network, cover, or diagram violates a structural invariant."""


class BudgetExceededError(RuntimeError):
    """A computation would exceed a configured size guard.

    ``guard`` names the budget that tripped so callers (and the CLI) can
    report which environment variable to raise.
    """

    def __init__(self, guard, message):
        super().__init__(message)
        self.guard = guard
