"""Pixel and connected-component evaluation of text segmentation masks."""

from .components import (
    CCMetrics,
    ComponentMatch,
    ComponentMatchSet,
    Mode,
    class_breakdown,
    f1_histogram,
    match_components,
    summarize,
)
from .errors import (
    ConfigMismatch,
    DimensionMismatch,
    MissingPairs,
    PlacementFailure,
    TooNarrow,
    UnknownColor,
)
from .harness import (
    ComparisonTable,
    EvaluationConfig,
    EvaluationReport,
    ImageResult,
    baseline_threshold_predict,
    compare,
    evaluate_corpus,
    evaluate_pair,
    merge,
)
from .masks import (
    ConfusionCounts,
    PaletteConfig,
    TextClass,
    binarize_ground_truth,
    decode_ground_truth,
    decode_prediction,
    split_page,
)
from .morphology import assign_predictions, dilate_cross, erode_cross, label_components
from .pixel_metrics import (
    DistortionScore,
    PixelScores,
    confusion_counts,
    drd,
    nubn,
    pixel_scores,
    psnr,
    relaxed_pixel_scores,
)
from .synthgen import SynthConfig, generate_corpus, generate_page

__version__ = "0.1.0"
