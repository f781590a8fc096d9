"""Exception hierarchy shared by the library and the CLI."""


class RsgpError(Exception):
    """Base class for all errors raised by rsgp."""


class InvalidArgumentError(RsgpError, ValueError):
    pass


class NumericDegeneracyError(RsgpError, ArithmeticError):
    """A factorization failed even after the jitter ladder was exhausted."""


class DegenerateGeometryError(RsgpError, ValueError):
    pass


class InfeasibleConeError(RsgpError, ValueError):
    pass


class ResourceLimitError(RsgpError):
    pass


class ConfigError(RsgpError, ValueError):
    pass


class VerificationError(RsgpError):
    pass
