"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: data/config problems exit with 2,
metrics that are undefined for every language exit with 3.
"""


class WicDisagreeError(Exception):
    """Base class for all toolkit errors."""


class DataError(WicDisagreeError):
    """Malformed or inconsistent input data (TSV rows, ids, ratings, config)."""


class FormatError(WicDisagreeError):
    """Corrupt or incompatible binary artifact (store, checkpoint, model file)."""


class TrainingError(WicDisagreeError):
    """Training diverged (non-finite loss); message carries epoch/batch context."""


class UndefinedMetricError(WicDisagreeError):
    """The requested metric is undefined for the given series (e.g. zero variance).

    Raised instead of returning 0.0 or NaN so that undefined scores can never
    silently leak into cross-language averages.
    """
