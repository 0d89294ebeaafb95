"""Exception types shared across the package."""


class ContractViolation(RuntimeError):
    """A numerical precondition or postcondition did not hold."""


class FitError(ValueError):
    """A least-squares fit could not be carried out on the supplied data."""


class SingularModeError(ZeroDivisionError):
    """A closed-form mode coefficient is 0/0 for this momentum."""


class InconclusiveSpectrum(ValueError):
    """The spectrum is too degenerate for spacing statistics to mean anything."""
