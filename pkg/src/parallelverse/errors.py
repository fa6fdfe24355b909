"""Exception hierarchy shared across the toolkit."""


class ParallelVerseError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(ParallelVerseError):
    """Invalid or incomplete pipeline configuration."""


class DataError(ParallelVerseError):
    """Malformed or inconsistent input data."""


class MalformedRecord(DataError):
    def __init__(self, line_number: int, reason: str = ""):
        self.line_number = line_number
        self.reason = reason
        super().__init__(f"malformed record at line {line_number}: {reason}")


class DuplicateVerse(DataError):
    def __init__(self, key):
        self.key = key
        super().__init__(f"duplicate verse {key}")


class UnknownTranslation(DataError):
    def __init__(self, translation_id: str):
        self.translation_id = translation_id
        super().__init__(f"unknown translation {translation_id!r}")


class UnknownSpeaker(DataError):
    def __init__(self, speaker: str):
        self.speaker = speaker
        super().__init__(f"unknown speaker {speaker!r}")


class MalformedRule(DataError):
    def __init__(self, index: int, reason: str = ""):
        self.index = index
        self.reason = reason
        super().__init__(f"malformed rule at index {index}: {reason}")


class ProviderError(ParallelVerseError):
    """Base class for embedding/sentiment provider failures."""


class ProviderUnavailable(ProviderError):
    pass


class ExternalUnavailable(ProviderError):
    """A delegated external service (e.g. projection sidecar) is not configured."""


class DimensionMismatch(ProviderError):
    def __init__(self, expected: int, got: int):
        self.expected = expected
        self.got = got
        super().__init__(f"dimension mismatch: expected {expected}, got {got}")


class MissingKey(ProviderError):
    def __init__(self, key: str):
        self.key = key
        super().__init__(f"precomputed provider has no entry for key {key}")


class MalformedFile(DataError):
    pass


class EmptyChapter(DataError):
    def __init__(self, chapter=None):
        self.chapter = chapter
        super().__init__(f"chapter {chapter} has no data" if chapter else "empty chapter")
