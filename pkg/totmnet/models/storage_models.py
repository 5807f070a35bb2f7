"""Persisted document models: checkpoints and synthetic clip manifests"""

from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from .config_models import ModelConfig

CHECKPOINT_FORMAT_VERSION = 1
CLIP_FORMAT_VERSION = 1


class TensorRecord(BaseModel):
    """A named parameter array: shape plus row-major values"""
    model_config = ConfigDict(extra="forbid")

    shape: List[int]
    values: List[float]


class CheckpointDocument(BaseModel):
    """Model checkpoint: config plus every parameter tensor by hierarchical path"""
    model_config = ConfigDict(extra="forbid")

    format_version: int = CHECKPOINT_FORMAT_VERSION
    config: ModelConfig
    tensors: Dict[str, TensorRecord]
    epoch: int = Field(0, ge=0, description="Epoch the parameters were taken from (0 = initial)")


class ClipManifest(BaseModel):
    """Describes one exported clip binary (frames then bvp, little-endian float64)"""
    model_config = ConfigDict(extra="forbid")

    format_version: int = CLIP_FORMAT_VERSION
    index: int
    split: str
    domain: str
    seed: int
    fs: float
    hr_bpm: float
    frames_shape: Tuple[int, int, int, int]
    bvp_shape: Tuple[int]
    dtype: str = "<f8"
    binary_file: str
    sha256: Optional[str] = None
