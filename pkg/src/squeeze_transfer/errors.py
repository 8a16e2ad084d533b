"""Exception types shared across the package."""


class ArgumentError(ValueError):
    """Invalid argument to a builder or evaluator."""


class CapacityError(ArgumentError):
    """Requested problem exceeds a configured size bound."""


class UnsupportedInputError(ArgumentError):
    """Input outside the domain a formula was derived for (e.g. odd N)."""


class NumericalError(RuntimeError):
    """A numerical routine failed to reach its tolerance."""


class IntegratorError(NumericalError):
    """Time integration failed or violated a conservation check."""


class MeanSpinDirectionError(ArgumentError):
    """Mean spin direction is not along z, so the z-frame squeezing formula does not apply."""


class ConfigError(ArgumentError):
    """Scenario configuration failed validation; ``errors`` lists every violation."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {e}" for e in self.errors))
