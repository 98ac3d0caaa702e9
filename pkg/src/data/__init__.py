from src.data.gt_maps import GT_MAPS, GroundTruthMap, LabelRenderingMap, SceneTranslationMap, build_gt_map
from src.data.scene import decode_labels, render_labels
from src.data.stream import Triplet, TripletBatch, VideoStream, sample_from_streams, sample_triplets
from src.data.synthetic import (
    generate_stream,
    generate_synthetic_domains,
    gt_map_for_stream,
    temporal_coherence,
)

__all__ = [
    "VideoStream",
    "Triplet",
    "TripletBatch",
    "sample_triplets",
    "sample_from_streams",
    "GroundTruthMap",
    "SceneTranslationMap",
    "LabelRenderingMap",
    "GT_MAPS",
    "build_gt_map",
    "render_labels",
    "decode_labels",
    "generate_stream",
    "generate_synthetic_domains",
    "gt_map_for_stream",
    "temporal_coherence",
]
