"""Dataset-level training entry point wiring records through normalization
into the mini-batch Adam core."""

from __future__ import annotations

from typing import Optional, Tuple

from .dataset import GestureDataset, SplitMode, SplitSpec, split, to_arrays
from .mlp import (
    MlpParameters,
    NormalizationSpec,
    TrainConfig,
    TrainReport,
    default_normalization,
    normalize_batch,
    train_arrays,
)


def train(
    dataset: GestureDataset,
    config: TrainConfig,
    split_spec: Optional[SplitSpec] = None,
    norm: Optional[NormalizationSpec] = None,
) -> Tuple[MlpParameters, TrainReport]:
    """Split, normalize and fit; returns 32-bit-quantized best parameters.

    The default split is stratified random at config.val_fraction with
    config.seed, so a later evaluation with the same spec sees the exact
    same validation records."""
    spec = split_spec or SplitSpec(
        mode=SplitMode.STRATIFIED_RANDOM, val_fraction=config.val_fraction, seed=config.seed
    )
    norm = norm or default_normalization()
    train_set, val_set = split(dataset, spec)
    X_train, y_train = to_arrays(train_set.records)
    X_val, y_val = to_arrays(val_set.records)
    return train_arrays(
        normalize_batch(X_train, norm),
        y_train,
        normalize_batch(X_val, norm),
        y_val,
        n_classes=len(dataset.vocabulary),
        config=config,
    )
