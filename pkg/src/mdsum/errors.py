"""Exception types shared across the package."""


class MdsumError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(MdsumError):
    """Bad configuration: missing directories, unknown keys, incompatible checkpoints."""


class DataError(MdsumError):
    """Malformed or empty input data."""


class ContractError(MdsumError, ValueError):
    """A function was called with arguments violating its preconditions."""


class SingularMatrixError(MdsumError, ArithmeticError):
    pass


class UndefinedMetricError(MdsumError, ValueError):
    pass
