"""Exception types raised by the solver, engine and harness."""


class FTError(Exception):
    """Base class for all package errors."""


class NonHyperbolic(FTError):
    pass


class OutOfDomain(FTError):
    pass


class DerivativeNoise(FTError):
    pass


class NewtonDiverged(FTError):
    pass


class CurveLeftDomain(FTError):
    pass


class OdeStepRejected(FTError):
    pass


class UnclassifiedFamily(FTError):
    pass


class GridTooCoarse(FTError):
    pass


class RiemannFailure(FTError):
    pass


class NPBudgetExceeded(FTError):
    pass


class FrontExplosion(FTError):
    pass


class TimeOutOfRange(FTError):
    pass


class QuadratureFailure(FTError):
    pass


class StateLeftDomain(FTError):
    pass


class TVBlowup(FTError):
    pass


class InconsistentNode(FTError):
    pass


class ZeroJumpDenominator(FTError):
    pass


class UnknownSystem(FTError):
    pass


class ConfigError(FTError):
    pass


class SchemaMismatch(FTError):
    pass


class LeftDomainOfComputation(FTError):
    """A characteristic was requested outside the computed time range."""


class IoError(FTError):
    """A trajectory directory is missing files or cannot be written."""
