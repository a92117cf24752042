"""Exception types shared across the package."""


class NotSummable(ValueError):
    """The weighted sum diverges (or cannot be certified finite)."""


class BudgetExceeded(RuntimeError):
    """Adaptive refinement hit its dimension cap before meeting rtol.

    The last computed truncated value is kept on the exception; it is still a
    certified lower bound.
    """

    def __init__(self, message, log_value=None, d=None, L=None):
        super().__init__(message)
        self.log_value = log_value
        self.d = d
        self.L = L


class ZeroTail(ValueError):
    """A tail sum required by the conditional-binomial chain is zero."""
