"""Error types raised across the toolkit."""


class AsdkitError(Exception):
    """Base class for every error raised by asdkit."""


class ParseError(AsdkitError, ValueError):
    def __init__(self, path, line_no, message):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{self.path}:{line_no}: {message}")


class ValidationError(AsdkitError, ValueError):
    def __init__(self, record_id, message):
        self.record_id = record_id
        super().__init__(f"{record_id}: {message}")


class DanglingReference(AsdkitError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class EmptySpan(AsdkitError, ValueError):
    pass


class DimensionMismatch(AsdkitError, ValueError):
    pass


class LengthMismatch(AsdkitError, ValueError):
    pass


class TrackMismatch(AsdkitError, ValueError):
    pass


class NoPositives(AsdkitError, ValueError):
    pass


class MissingLabels(AsdkitError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class MissingLabel(AsdkitError, ValueError):
    """A training utterance lacks a usable speaker_hint."""


class NoVisibleIdentity(AsdkitError, ValueError):
    pass


class MissingQuality(AsdkitError, ValueError):
    pass


class TooFewTracks(AsdkitError, ValueError):
    pass


class InvalidConfig(AsdkitError, ValueError):
    pass


class SpanOutOfRange(AsdkitError, IndexError):
    pass
