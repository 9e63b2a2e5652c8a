"""Two-stream boundary-aware semantic segmentation."""

from ._yseg import (
    Error,
    Model,
    best_crop,
    boundary_targets,
    confusion,
    default_config,
    f1_boundary,
    gen_data,
    gen_shapes,
    gradcheck,
    miou,
    normalize_config,
    train,
)

__all__ = [
    "Error",
    "Model",
    "best_crop",
    "boundary_targets",
    "confusion",
    "default_config",
    "f1_boundary",
    "gen_data",
    "gen_shapes",
    "gradcheck",
    "miou",
    "normalize_config",
    "train",
]
