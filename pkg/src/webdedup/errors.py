"""Exception hierarchy shared across the package."""


class WebDedupError(Exception):
    """Base class for all errors raised by webdedup."""


class EmptyCorpus(WebDedupError, ValueError):
    pass


class EmptyVocabulary(WebDedupError, ValueError):
    pass


class MixedKinds(WebDedupError, ValueError):
    pass


class KindMismatch(WebDedupError, ValueError):
    pass


class DimensionMismatch(WebDedupError, ValueError):
    pass


class FeatureMismatch(WebDedupError, ValueError):
    pass


class EmptyDataset(WebDedupError, ValueError):
    pass


class VersionMismatch(WebDedupError, ValueError):
    """Unknown magic bytes or format version in a binary container."""


class FormatError(WebDedupError, ValueError):
    """A container is truncated or otherwise undecodable."""


class DriverFailure(WebDedupError, RuntimeError):
    pass


class Unreachable(WebDedupError, LookupError):
    pass


class EmptyLog(WebDedupError, ValueError):
    pass


class SchemaError(WebDedupError, ValueError):
    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class DuplicateRow(SchemaError):
    pass


class UniverseMismatch(WebDedupError, ValueError):
    pass


class ConfigError(WebDedupError, ValueError):
    pass
