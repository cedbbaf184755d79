"""Exception types shared across the package."""


class MhmcError(Exception):
    """Base class for all package errors."""


class NotAntisymmetric(MhmcError):
    """Matrix failed the antisymmetry check."""


class NumericalFailure(MhmcError):
    """A numerical routine produced a result outside its accuracy contract."""


class DimensionMismatch(MhmcError):
    """Operands have incompatible dimensions."""


class NotSPD(MhmcError):
    """Matrix is not symmetric positive definite."""


class NonFinite(MhmcError):
    """A state or density value became non-finite."""


class ZeroVariance(MhmcError):
    """A chain coordinate has zero empirical variance."""


class TooFewChains(MhmcError):
    """An across-chain estimator needs at least two chains."""


class SingularA(MhmcError):
    """The structure matrix of the dynamics is singular."""


class ConfigError(MhmcError):
    """An experiment configuration is invalid; message carries field context."""
