"""
exception hierarchy shared by the library and the command line front end,
`exit_code` is the process status the cli reports for each family
"""


class CalibrationLabError(Exception):
    exit_code = 1


class InvalidInput(CalibrationLabError, ValueError):
    exit_code = 2


class CertificationError(CalibrationLabError):
    exit_code = 1


class NotMinimal(CertificationError):
    pass


class NotAlignable(CertificationError):
    pass


class CalibrationFailure(CertificationError):
    def __init__(self, message, report=None):
        super(CalibrationFailure, self).__init__(message)
        self.report = report


class InvalidComparison(CertificationError):
    pass


class InconsistentAssignment(CertificationError):
    pass


class NoColoring(CertificationError):
    pass


class HypothesisError(CalibrationLabError):
    exit_code = 3


class ThresholdViolation(HypothesisError):
    pass


class HypothesisViolation(HypothesisError):
    def __init__(self, message, hypothesis=None):
        super(HypothesisViolation, self).__init__(message)
        self.hypothesis = hypothesis


class NonTransverse(HypothesisError):
    pass


class InvalidGeometry(HypothesisError):
    pass


class Unsupported(HypothesisError):
    pass
