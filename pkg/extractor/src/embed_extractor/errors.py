"""Exception types for the embedding extractor.

The CLI maps every :class:`ExtractorError` (and plain I/O failures) onto
exit code 2 with the message on stderr.
"""


class ExtractorError(Exception):
    """Base class for all extractor errors."""


class DataError(ExtractorError):
    """Malformed or inconsistent input data (TSV rows, ids, spans, config)."""


class AlignmentError(ExtractorError):
    """A target span could not be mapped to any subword token.

    The message names the offending usage_id so the corpus row can be fixed.
    """


class ModelError(ExtractorError):
    """The pretrained model or tokenizer could not be loaded or is unusable."""
