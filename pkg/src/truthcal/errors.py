"""Exception types raised by truthcal.

Every exception carries a short machine-readable ``code`` so the command-line
front end can report failures in a parseable form.
"""


class CalibrationError(ValueError):
    code = "CalibrationError"


class EmptySample(CalibrationError):
    code = "EmptySample"

    def __init__(self, message="sample has no entries"):
        super().__init__(message)


class OutOfRange(CalibrationError):
    code = "OutOfRange"

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"entry {index} lies outside [0, 1]")


class TooLarge(CalibrationError):
    code = "TooLarge"

    def __init__(self, size, cap):
        self.size = size
        self.cap = cap
        super().__init__(f"T={size} exceeds the enumeration cap {cap}")


class LengthMismatch(CalibrationError):
    code = "LengthMismatch"


class IndexMismatch(CalibrationError):
    code = "IndexMismatch"


class BadBinCount(CalibrationError):
    code = "BadBinCount"


class BadAlpha(CalibrationError):
    code = "BadAlpha"


class NonBinaryTargets(CalibrationError):
    code = "NonBinaryTargets"


class Inconsistent(CalibrationError):
    code = "Inconsistent"


class UnknownMeasure(CalibrationError):
    code = "UnknownMeasure"


class ParseError(CalibrationError):
    code = "ParseError"

    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")
