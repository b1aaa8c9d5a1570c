"""Exception types raised by the tagbook package."""


class TagbookError(Exception):
    """Base class for all tagbook errors."""


class FormatError(TagbookError):
    """A data file violates its expected format; carries the offending location."""

    def __init__(self, path, line_no, reason):
        super().__init__(f"{path}:{line_no}: {reason}")
        self.path = str(path)
        self.line_no = line_no
        self.reason = reason


class DimensionMismatch(TagbookError):
    """Vector or matrix dimensions disagree with the declared dimension."""


class DuplicateId(TagbookError):
    """The same video id occurs more than once in one corpus or file."""


class MissingFeature(TagbookError):
    """An annotation refers to a video id with no feature vector."""


class EmptyVocabulary(TagbookError):
    """No tag passed the document-frequency threshold."""


class UnknownVideo(TagbookError):
    """Video id not present in the corpus."""


class UnknownTag(TagbookError):
    """Tag not present in the vocabulary."""


class EmptyInput(TagbookError):
    """An operation that requires at least one element received none."""


class MissingRefinement(TagbookError):
    """Refined relevance requested but the corpus carries no relevance matrix."""


class DegenerateData(TagbookError):
    """Labeled training data contains only one class."""


class EmptyModel(TagbookError):
    """An event description shares no token with the vocabulary."""


class NoPositives(TagbookError):
    """Average precision is undefined without positive videos."""


class EmptyReference(TagbookError):
    """A reference description tokenizes to nothing."""


class SizeTooLarge(TagbookError):
    """Requested reduced size exceeds what the data supports."""


class InsufficientData(TagbookError):
    """Too few samples for the requested model."""


class IntegrityError(TagbookError):
    """A persisted artifact does not match its companion corpus or sidecar."""
