"""Exception types. Each carries the process exit code the CLI reports."""


class CarrierSigError(Exception):
    exit_code = 1


class MalformedInputError(CarrierSigError):
    exit_code = 3


class UnknownCarrierError(CarrierSigError):
    exit_code = 4


class InsufficientDataError(CarrierSigError):
    exit_code = 5


class CoverageError(CarrierSigError):
    """A carrier has a gap or does not span the requested analysis period."""

    exit_code = 6


class InvalidParameterError(CarrierSigError, ValueError):
    exit_code = 7


class ShapeError(CarrierSigError, ValueError):
    exit_code = 8


class DegenerateInputError(CarrierSigError, ValueError):
    exit_code = 9


class DecompositionError(CarrierSigError):
    exit_code = 10


class InvalidMeasurementError(CarrierSigError, ValueError):
    exit_code = 11
