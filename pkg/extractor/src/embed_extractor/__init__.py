"""Paired contextual-embedding extraction for word-in-context corpora.

Reads the corpus TSV files (usages with character-level target spans,
instances pairing two usages), embeds each referenced usage as the mean of
a frozen pretrained encoder's last-layer hidden states over the subword
tokens overlapping the target span, and writes one binary store record per
instance in the interchange format the modeling pipeline consumes.
"""

from .alignment import EncodedUsage, encode_usage
from .corpus import InstancePair, Usage, load_instance_pairs, load_usages
from .errors import AlignmentError, DataError, ExtractorError, ModelError
from .extraction import (
    DEFAULT_MODEL,
    ExtractionConfig,
    ExtractionSummary,
    embed_usages,
    extract,
    load_encoder,
)
from .store import StoreHeader, read_header, write_store

__version__ = "0.1.0"

__all__ = [
    "AlignmentError",
    "DEFAULT_MODEL",
    "DataError",
    "EncodedUsage",
    "ExtractionConfig",
    "ExtractionSummary",
    "ExtractorError",
    "InstancePair",
    "ModelError",
    "StoreHeader",
    "Usage",
    "embed_usages",
    "encode_usage",
    "extract",
    "load_encoder",
    "load_instance_pairs",
    "load_usages",
    "read_header",
    "write_store",
    "__version__",
]
