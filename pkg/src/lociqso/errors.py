"""Exception hierarchy shared by all modules."""


class LociQsoError(Exception):
    """Base class for every error raised by this package."""


class InputError(LociQsoError):
    """Malformed or inadmissible user input."""


class NotASimplexPoint(InputError):
    pass


class BadDimension(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class ScenarioParseError(InputError):
    pass


class SuiteParseError(InputError):
    pass


class NumericalError(LociQsoError):
    """A numerical procedure could not produce a trustworthy answer."""


class EigensolverFailure(NumericalError):
    pass


class NonSimpleEigenvalueOne(NumericalError):
    """Closed-form limit prediction is unavailable for this fiber.

    ``frozen_loci`` lists the (0-based, original indexing) loci for which the
    row condition on the coefficients fails.
    """

    def __init__(self, message, frozen_loci=(), ones_count=None):
        super().__init__(message)
        self.frozen_loci = list(frozen_loci)
        self.ones_count = ones_count


class DegenerateNormalization(NumericalError):
    pass


class AllLociZero(LociQsoError):
    pass
