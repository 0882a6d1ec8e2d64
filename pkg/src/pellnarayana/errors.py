"""Exception hierarchy shared by every layer of the prover."""


class ProverError(Exception):
    """Base class for all errors raised by this package."""


class InsufficientPrecision(ProverError):
    """A certified decision could not be made at the current working precision.

    Callers that run under a :class:`~pellnarayana.certreal.PrecisionPolicy`
    catch this and retry at doubled precision.
    """


class PrecisionCapExceeded(ProverError):
    pass


class IndeterminateSign(InsufficientPrecision):
    pass


class AmbiguousNearestInteger(InsufficientPrecision):
    pass


class RoundingAmbiguous(InsufficientPrecision):
    pass


class DenominatorIndeterminate(InsufficientPrecision):
    pass


class QuotientUnstable(InsufficientPrecision):
    pass


class NoSignChange(ProverError):
    pass


class NonPositiveInput(ProverError, ValueError):
    pass


class OutOfDomain(ProverError, ValueError):
    pass


class PreconditionSViolated(ProverError, ValueError):
    pass


class IndexBelowInitialWindow(ProverError, IndexError):
    pass


class RangeExceedsIdentityWindow(ProverError, ValueError):
    pass


class IndexOutOfRange(ProverError, IndexError):
    pass


class EpsilonNeverPositive(ProverError):
    pass


class ChainDidNotClose(ProverError):
    pass
