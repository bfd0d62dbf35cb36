"""Exception types raised across the package."""


class MobError(Exception):
    """Base class for all package errors."""


class StepUnderflow(MobError):
    """The step-size controller needed a step below ``h_min``."""


class NonFiniteState(MobError):
    """A state component became NaN or infinite."""


class DegenerateFrame(MobError):
    """A tangent vector collapsed before it could be renormalized."""


class SingularCorrelation(MobError):
    """The correlation matrix could not be factorized even with the largest nugget."""


class EmptyPool(MobError):
    """An acquisition was asked to choose from an empty candidate pool."""


class OutOfDomain(MobError):
    """A physical point lies outside the bounds of its domain."""


class LengthMismatch(MobError, ValueError):
    """Reference and prediction vectors differ in length."""


class ZeroSpread(MobError, ValueError):
    """The reference values have zero variance."""


class MixedProblems(MobError, ValueError):
    """Run records from different problems were aggregated together."""


class AcquisitionOrderError(MobError, RuntimeError):
    """An adaptive scheme was asked for a new point before its state was updated."""
