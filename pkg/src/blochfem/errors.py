"""Exception types shared across the package."""


class BlochFEMError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(BlochFEMError):
    """Invalid configuration or inconsistent run parameters."""


class EigenSolveError(BlochFEMError):
    """Cell eigenproblem could not be solved."""


class DegenerateBandError(BlochFEMError):
    """Band is too close to a neighbor for finite-difference tracking."""


class NumericalError(BlochFEMError):
    """Linear solve failed or produced an unacceptable residual."""
