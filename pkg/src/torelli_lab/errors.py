"""Exception hierarchy; each class maps to a CLI exit code."""


class TorelliLabError(Exception):
    exit_code = 1


class PreconditionError(TorelliLabError, ValueError):
    exit_code = 3


class InvariantError(TorelliLabError, ValueError):
    exit_code = 3


class ThresholdError(TorelliLabError):
    """A genus or size bound required by a construction is not met."""

    exit_code = 4


class MeasureError(TorelliLabError):
    """A reduction step failed to decrease its termination measure."""

    exit_code = 5


class CertificateError(TorelliLabError):
    exit_code = 1
