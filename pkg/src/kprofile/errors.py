"""Exception hierarchy shared by every kprofile module."""


class KProfileError(Exception):
    """Base class for all library errors."""

    #: process exit code used by the command-line front end
    exit_code = 3


class InvalidInput(KProfileError, ValueError):
    pass


class InvalidConfig(KProfileError, ValueError):
    exit_code = 2


class DimensionMismatch(KProfileError, ValueError):
    exit_code = 2


class AllPointsCoincident(InvalidInput):
    pass


class WindowOutOfRange(KProfileError, IndexError):
    exit_code = 2


class NumericalBlowup(KProfileError, FloatingPointError):
    exit_code = 4


class ParseError(InvalidInput):
    pass


class IncompleteGrid(InvalidInput):
    pass


class UnsupportedFormat(InvalidInput):
    pass


class ChannelMismatch(InvalidInput):
    pass


class TooShort(InvalidInput):
    pass
