"""Exception types shared across the package."""


class ConvergenceError(RuntimeError):
    """An iterative numerical kernel hit its iteration cap without converging."""


class CertificateError(RuntimeError):
    """A stability certificate could not be produced from the given data."""


class IntegrationError(RuntimeError):
    """A simulated quantity left its invariant band during integration."""

    def __init__(self, message: str, t: float | None = None, quantity: str | None = None):
        detail = message
        if quantity is not None:
            detail += f" [quantity: {quantity}]"
        if t is not None:
            detail += f" [t = {t:.6f}]"
        super().__init__(detail)
        self.t = t
        self.quantity = quantity


class ConfigError(ValueError):
    """Invalid, inconsistent, or unknown configuration input."""
