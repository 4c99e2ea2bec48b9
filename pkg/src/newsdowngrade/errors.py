"""Exception hierarchy.

Input/contract violations derive from :class:`ValidationError` (CLI exit
code 1); numerical or runtime failures derive from :class:`RuntimeFailure`
(exit code 2).
"""


class DowngradeError(Exception):
    """Base class for all package errors."""


class ValidationError(DowngradeError):
    pass


class RuntimeFailure(DowngradeError):
    pass


# corpus
class UnknownPid(ValidationError):
    pass


class MixedKeys(ValidationError):
    pass


# ratings
class BothMissing(ValidationError):
    pass


class NoCurrentRating(ValidationError):
    pass


class UnknownSymbol(ValidationError):
    pass


# lexicon / embeddings file parsing
class ParseError(ValidationError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MalformedHeader(ParseError):
    pass


class DimensionMismatch(ParseError):
    pass


# topics / embeddings
class EmptyCorpus(ValidationError):
    pass


class DegenerateVocabulary(ValidationError):
    pass


class InsufficientCorpus(ValidationError):
    pass


# classifier
class TooFewMinority(ValidationError):
    pass


class DegenerateData(ValidationError):
    pass


class FeatureMismatch(ValidationError):
    pass


class NonFinite(RuntimeFailure):
    pass


# pipeline / evaluation
class JoinKeyMismatch(ValidationError):
    pass


class SingleClass(ValidationError):
    pass


class NoPositives(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class OutDirLocked(RuntimeFailure):
    pass
