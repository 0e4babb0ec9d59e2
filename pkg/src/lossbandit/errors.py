class ValidationError(ValueError):
    """Input violates a model assumption (bad pmf, theta out of range, ...)."""


class CouplingError(ValidationError):
    """theta != sigma_low / sigma_high, or utility and diffusion disagree on c."""


class StateSpaceError(RuntimeError):
    """A DP layer would exceed the configured state cap."""


class CouplingWarning(UserWarning):
    pass
