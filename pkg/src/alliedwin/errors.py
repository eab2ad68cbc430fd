"""Typed errors raised across the pipeline."""


class AlliedWinError(Exception):
    """Base class for all package errors."""


class InvalidWindow(AlliedWinError):
    """Window range is smaller than its slide (sampling windows rejected)."""


class QuerySyntaxError(AlliedWinError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnsupportedPattern(AlliedWinError):
    """Query pattern beyond OBJECT/CONJ."""


class UnknownLabel(AlliedWinError):
    """Query label not in the configured vocabulary."""


class BoundOutOfRange(AlliedWinError):
    """Resource bound outside (0, 100]."""


class ManifestParseError(AlliedWinError):
    """Malformed manifest record or payload file."""


class NonMonotonicTimestamp(AlliedWinError):
    """Stream timestamps must strictly increase."""


class MissingPayload(AlliedWinError):
    """Frame record carries neither pixels nor a histogram."""


class OutOfOrderFrame(AlliedWinError):
    """Frame arrived with a timestamp behind the window cursor."""


class NoPayload(AlliedWinError):
    """Frame has no pixel buffer and no surrogate histogram."""


class BinMismatch(AlliedWinError):
    """Histograms have different bin counts."""


class ZeroRemaining(AlliedWinError):
    """No window frames remaining for the size ratio."""


class MixedResolution(AlliedWinError):
    """Frames in one wire message must share a resolution."""


class BadMagic(AlliedWinError):
    """Wire message does not start with the expected magic bytes."""


class VersionMismatch(AlliedWinError):
    """Wire message version is not supported."""


class CorruptPayload(AlliedWinError):
    """Wire payload failed decompression or a length check."""


class LengthMismatch(AlliedWinError):
    """Parallel argument lists have different lengths."""


class ConfigError(AlliedWinError):
    def __init__(self, field: str, message: str = "invalid or missing"):
        super().__init__(f"config field '{field}': {message}")
        self.field = field


class MismatchedInputs(AlliedWinError):
    """Compared runs must share input and seed."""
