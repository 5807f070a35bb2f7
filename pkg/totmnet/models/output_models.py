"""Result records emitted by training, evaluation, checks and the benchmark"""

from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


class Metrics(BaseModel):
    """Heart-rate metric bundle for a set of clips; None marks an undefined value"""
    mae_bpm: float = Field(..., ge=0.0)
    rmse_bpm: float = Field(..., ge=0.0)
    mape_pct: float = Field(..., ge=0.0)
    pearson: Optional[float] = Field(None, ge=-1.0, le=1.0)
    snr_db: Optional[float] = None
    n_clips: int = Field(..., ge=1)

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "mae_bpm": 2.0,
                "rmse_bpm": 2.0,
                "mape_pct": 2.857,
                "pearson": None,
                "snr_db": 4.2,
                "n_clips": 2,
            }
        }
    )


class MetricsRow(Metrics):
    """One line of the metrics report"""
    split: str = "test"
    domain: str = "A"
    variant: Optional[str] = None


class EpochRecord(BaseModel):
    """Per-epoch training log line"""
    epoch: int = Field(..., ge=1)
    loss_total: float
    loss_mse: float
    loss_rho: float
    loss_spec: float
    val_loss: Optional[float] = None
    val_mae_bpm: Optional[float] = None


class EvaluationReport(BaseModel):
    """Per-clip estimates plus the aggregate metrics for one split/domain"""
    domain: str
    split: str
    pred_hr_bpm: List[float]
    ref_hr_bpm: List[float]
    snr_db: List[Optional[float]]
    gate_mean: List[float] = Field(default_factory=list, description="Mean gate activation per block")
    metrics: Metrics


class BenchRecord(BaseModel):
    """Median timing of one (T, method) point"""
    T: int = Field(..., ge=1)
    d: int = Field(..., ge=1)
    B: int = Field(..., ge=1)
    method: Literal["fft", "dense"]
    median_ns: int = Field(..., gt=0)
    reps: int = Field(..., ge=5)


class SuiteResult(BaseModel):
    """Outcome of one oracle suite"""
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0
