"""Exception types shared across the package."""


class NoNewsMonthError(ValueError):
    """Raised when a theme has zero classified stories in a month."""


class ConvergenceError(RuntimeError):
    """Optimizer failed to reach a stationary point.

    Attributes
    ----------
    params : ndarray or None
        Best point found before giving up.
    grad_norm : float
        Gradient norm at ``params``.
    """

    def __init__(self, message, params=None, grad_norm=float("nan")):
        super().__init__(message)
        self.params = params
        self.grad_norm = grad_norm
