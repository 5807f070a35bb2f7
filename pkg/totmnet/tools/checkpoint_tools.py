"""Checkpoint persistence: model config plus every parameter tensor, as JSON"""

import logging
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
from pydantic import ValidationError

from ..core.errors import CheckpointMismatchError
from ..core.network import ModelParams, expected_shapes
from ..models.config_models import ModelConfig
from ..models.storage_models import CHECKPOINT_FORMAT_VERSION, CheckpointDocument, TensorRecord

logger = logging.getLogger(__name__)


def to_document(params: ModelParams, config: ModelConfig, epoch: int = 0) -> CheckpointDocument:
    tensors = {
        path: TensorRecord(shape=list(value.shape), values=value.ravel().tolist())
        for path, value in params.items()
    }
    return CheckpointDocument(config=config, tensors=tensors, epoch=epoch)


def save_checkpoint(
    path: Union[str, Path],
    params: ModelParams,
    config: ModelConfig,
    epoch: int = 0,
) -> Path:
    """
    Write a checkpoint document.

    Args:
        path: destination file
        params: parameters in registry order
        config: the model config they belong to
        epoch: epoch the parameters come from (0 = initial)

    Returns:
        the written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_document(params, config, epoch).model_dump_json(indent=2))
    logger.debug(f"Checkpoint saved to {path} ({len(params)} tensors, epoch {epoch})")
    return path


def from_document(
    document: CheckpointDocument,
    expected_config: Optional[ModelConfig] = None,
) -> Tuple[ModelParams, ModelConfig]:
    """
    Rebuild parameters from a document, checking them against a config.

    Raises:
        CheckpointMismatchError: on an unknown format version, or the first path
            that is missing, unexpected or mis-shaped
    """
    if document.format_version != CHECKPOINT_FORMAT_VERSION:
        raise CheckpointMismatchError(
            f"unsupported checkpoint format_version {document.format_version} "
            f"(expected {CHECKPOINT_FORMAT_VERSION})"
        )
    config = expected_config or document.config
    shapes = expected_shapes(config)

    params = ModelParams()
    for path, shape in shapes.items():
        record = document.tensors.get(path)
        if record is None:
            raise CheckpointMismatchError(f"checkpoint is missing parameter '{path}'", path=path)
        if tuple(record.shape) != shape:
            raise CheckpointMismatchError(
                f"parameter '{path}' has shape {tuple(record.shape)}, expected {shape}", path=path
            )
        if len(record.values) != int(np.prod(shape, dtype=np.int64)):
            raise CheckpointMismatchError(
                f"parameter '{path}' holds {len(record.values)} values for shape {shape}", path=path
            )
        params[path] = np.asarray(record.values, dtype=np.float64).reshape(shape)

    for path in document.tensors:
        if path not in shapes:
            raise CheckpointMismatchError(f"unexpected parameter '{path}' in checkpoint", path=path)

    params.sync_kernels(config.max_lag)
    return params, config


def load_checkpoint(
    path: Union[str, Path],
    expected_config: Optional[ModelConfig] = None,
) -> Tuple[ModelParams, ModelConfig, int]:
    """
    Read a checkpoint file.

    Returns:
        (params, config, epoch)

    Raises:
        CheckpointMismatchError: if the file is not a valid checkpoint or does not
            match ``expected_config``
    """
    path = Path(path)
    try:
        document = CheckpointDocument.model_validate_json(path.read_text())
    except ValidationError as e:
        raise CheckpointMismatchError(f"{path} is not a valid checkpoint: {e.errors()[0]['msg']}") from e
    except OSError as e:
        raise CheckpointMismatchError(f"cannot read checkpoint {path}: {e}") from e
    params, config = from_document(document, expected_config)
    logger.info(f"📦 Loaded checkpoint {path.name} (epoch {document.epoch}, {len(params)} tensors)")
    return params, config, document.epoch
