class DensFieldException(Exception):
    """Base exception class for densfield"""


class DensFieldContractViolation(DensFieldException):
    """An operation was called outside of its documented preconditions"""


class DensFieldInvisiblePoint(DensFieldContractViolation):
    """A point projects into none of the density views, so there is nothing to aggregate"""


class DensFieldUnknownKey(DensFieldContractViolation):
    """A configuration key that is not registered in the settings table"""


class DensFieldOracleError(DensFieldException):
    """A test oracle could not produce a value, e.g. the function evaluated to inf or nan"""


class DensFieldGenerationError(DensFieldException):
    """Procedural scene generation failed to place its primitives"""


class DensFieldIOError(DensFieldException):
    """Reading or writing an artifact failed, the message carries the path"""


class DensFieldParseError(DensFieldException):
    """A file could not be parsed, names the file and the byte offset of the problem"""

    def __init__(self, path, offset: int, reason: str):
        self.path = str(path)
        self.offset = offset
        self.reason = reason
        super().__init__("{}: byte {}: {}".format(self.path, offset, reason))
