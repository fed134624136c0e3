"""Exception hierarchy.

Every error belongs to one of three families that the CLI maps onto exit
codes: configuration problems (2), validation problems (3) and IO (4).
"""


class ArenaError(Exception):
    exit_code = 3


class ConfigError(ArenaError):
    exit_code = 2


class ValidationError(ArenaError):
    exit_code = 3


class ArenaIOError(ArenaError):
    exit_code = 4


class ParseError(ConfigError):
    pass


class UnsupportedSize(ValidationError):
    pass


class IndexOutOfRange(ValidationError):
    pass


class SameQubit(ValidationError):
    pass


class LayoutIncomplete(ValidationError):
    pass


class InvalidBitstring(ValidationError):
    pass


class ZeroShift(ValidationError):
    pass


class EmptyShift(ValidationError):
    pass


class InvalidSize(ValidationError):
    pass


class OverlapError(ValidationError):
    pass


class DeviceOverflow(ValidationError):
    pass


class InconsistentRouting(ValidationError):
    pass


class TooManyQubits(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class MissingQubit(ValidationError):
    pass


class OutOfRange(ValidationError):
    pass


class FootprintConflict(ValidationError):
    pass


class NotAnEdge(ValidationError):
    pass


class ShapeMismatch(ValidationError):
    pass


class UnknownTrueLabel(ValidationError):
    pass


class DatasetTooSmall(ValidationError):
    pass


class KOutOfRange(ValidationError):
    pass


class SizeOverflow(ValidationError):
    pass
