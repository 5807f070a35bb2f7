"""Data models for configuration, results and persisted documents"""

from .config_models import (
    Variant,
    Domain,
    Split,
    ModelConfig,
    StftConfig,
    LossConfig,
    TrainConfig,
    SynthConfig,
    EvalConfig,
    RunConfig,
)
from .output_models import (
    Metrics,
    MetricsRow,
    EpochRecord,
    EvaluationReport,
    BenchRecord,
    SuiteResult,
)
from .storage_models import (
    CHECKPOINT_FORMAT_VERSION,
    TensorRecord,
    CheckpointDocument,
    ClipManifest,
)

__all__ = [
    "Variant",
    "Domain",
    "Split",
    "ModelConfig",
    "StftConfig",
    "LossConfig",
    "TrainConfig",
    "SynthConfig",
    "EvalConfig",
    "RunConfig",
    "Metrics",
    "MetricsRow",
    "EpochRecord",
    "EvaluationReport",
    "BenchRecord",
    "SuiteResult",
    "CHECKPOINT_FORMAT_VERSION",
    "TensorRecord",
    "CheckpointDocument",
    "ClipManifest",
]
