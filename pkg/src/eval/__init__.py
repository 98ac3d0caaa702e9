from src.eval.inference import infer_framewise, infer_smoothed, translate_frames
from src.eval.metrics import comparison_table, confusion_matrix, pooled_seg_metrics, seg_metrics
from src.eval.scores import (
    diversity_probe,
    image_to_labels_metrics,
    oracle_image_score,
    predicted_labels,
    translation_mse,
)
from src.eval.segmenter import (
    OracleSegmenter,
    evaluate_segmenter,
    load_segmenter,
    save_segmenter,
    segment,
    train_segmenter,
)

__all__ = [
    "translate_frames",
    "infer_framewise",
    "infer_smoothed",
    "confusion_matrix",
    "seg_metrics",
    "pooled_seg_metrics",
    "comparison_table",
    "translation_mse",
    "diversity_probe",
    "image_to_labels_metrics",
    "oracle_image_score",
    "predicted_labels",
    "OracleSegmenter",
    "train_segmenter",
    "evaluate_segmenter",
    "segment",
    "save_segmenter",
    "load_segmenter",
]
