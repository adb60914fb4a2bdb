class InvalidParameter(ValueError):
    """Raised for out-of-range or inconsistent inputs."""


class NumericalFailure(RuntimeError):
    """Raised when a propagation produces non-finite amplitudes."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step
