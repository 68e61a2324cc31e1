"""Post-processing toolkit for multi-span question answering predictions.

Annotates predictions as correct / partially correct / wrong, orchestrates
exclude-and-correct pipelines over pluggable model backends, builds
silver-labeled training data by K-fold heldout sampling, and computes the
evaluation metrics and analysis reports.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .dataio import DatasetFile, Example, Gold
from .metrics import PRF, aggregate_micro, em_counts, pm_counts, score_dataset
from .norm import find_span_occurrences, normalize_answer, word_tokenize
from .pipeline import PipelineMode, partition, run_pipeline, select_best_span
from .similarity import HashEmbedder, bertscore, default_embed, word_overlap
from .taxonomy import Label, LabeledPrediction, Thresholds, annotate_prediction_set, classify_prediction

__version__ = "0.1.0"

__all__ = [
    "DatasetFile",
    "Example",
    "Gold",
    "HashEmbedder",
    "KERNEL_BACKEND",
    "Label",
    "LabeledPrediction",
    "PRF",
    "PipelineMode",
    "Thresholds",
    "aggregate_micro",
    "annotate_prediction_set",
    "bertscore",
    "classify_prediction",
    "default_embed",
    "em_counts",
    "find_span_occurrences",
    "normalize_answer",
    "partition",
    "pm_counts",
    "run_pipeline",
    "score_dataset",
    "select_best_span",
    "word_overlap",
    "word_tokenize",
]
