"""Word-in-context ordinal rating and disagreement modeling toolkit.

Predicts, for pairs of usages of a word, the median of ordinal relatedness
ratings (labels 1-4, scored with ordinal Krippendorff's alpha) and the mean
pairwise rating disagreement (scored with Spearman's rho), from frozen
contextual embeddings. Ships the cosine-binning / linear-regression
baselines, two neural heads over the embeddings, and a two-variant boosted
tree ensemble, plus a CLI tying them into reproducible experiments.
"""

from .data_model import (
    Dataset,
    Instance,
    TaskTargets,
    Usage,
    dataset_stats,
    load_dataset,
    mean_pairwise_disagreement,
    median_label,
)
from .embedding_store import EmbeddingRecord, EmbeddingStore, join, read_store, write_store
from .errors import (
    DataError,
    FormatError,
    TrainingError,
    UndefinedMetricError,
    WicDisagreeError,
)
from .features import (
    concat_features,
    concat_matrix,
    cosine,
    cosine_rows,
    enrich_features,
    enrich_matrix,
    euclidean,
    manhattan,
)
from .metrics import average_ranks, krippendorff_alpha_ordinal, spearman_rho

__version__ = "0.1.0"

__all__ = [
    "DataError",
    "Dataset",
    "EmbeddingRecord",
    "EmbeddingStore",
    "FormatError",
    "Instance",
    "TaskTargets",
    "TrainingError",
    "UndefinedMetricError",
    "Usage",
    "WicDisagreeError",
    "average_ranks",
    "concat_features",
    "concat_matrix",
    "cosine",
    "cosine_rows",
    "dataset_stats",
    "enrich_features",
    "enrich_matrix",
    "euclidean",
    "join",
    "krippendorff_alpha_ordinal",
    "load_dataset",
    "manhattan",
    "mean_pairwise_disagreement",
    "median_label",
    "read_store",
    "spearman_rho",
    "write_store",
    "__version__",
]
