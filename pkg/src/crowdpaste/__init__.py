"""crowdpaste: crowded-scene copy-paste augmentation for detection datasets.

Converts segmentation-mask datasets into YOLO-format detection datasets,
synthesizes crowded training images with an annealing-based placement engine
(plus the baseline group copy-paste it modifies), and evaluates detections
against ground truth with IoU matching and count summaries.
"""

from .annotations import (
    BoundingBox,
    NormalizedLabel,
    extract_components,
    iou,
    read_labels,
    to_normalized,
    write_labels,
)
from .compositor import AugmentedSample, ColorJitter, composite, jitter_colors, scale_sprite
from .config import ConfigError, PipelineConfig, load_config
from .evaluation import CountSummary, MatchReport, count_summary, iou_histogram, match_boxes
from .object_bank import SpriteObject, cut_sprites, load_bank, save_bank
from .placement import (
    GroupCenter,
    PastePlan,
    PlacedObject,
    plan_deng,
    plan_psada,
    realized_boxes,
)
from .sampling import DengParams, PsadaParams, RngStream

__version__ = "0.1.0"

__all__ = [
    "BoundingBox",
    "NormalizedLabel",
    "extract_components",
    "to_normalized",
    "write_labels",
    "read_labels",
    "iou",
    "SpriteObject",
    "cut_sprites",
    "save_bank",
    "load_bank",
    "RngStream",
    "PsadaParams",
    "DengParams",
    "GroupCenter",
    "PlacedObject",
    "PastePlan",
    "plan_psada",
    "plan_deng",
    "realized_boxes",
    "ColorJitter",
    "AugmentedSample",
    "scale_sprite",
    "jitter_colors",
    "composite",
    "MatchReport",
    "CountSummary",
    "match_boxes",
    "iou_histogram",
    "count_summary",
    "PipelineConfig",
    "ConfigError",
    "load_config",
    "__version__",
]
