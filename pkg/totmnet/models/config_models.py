"""Run configuration models (structured-text config file sections)"""

from enum import Enum
from typing import Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator


class Variant(str, Enum):
    """Mixer block variants"""
    full = "full"
    local_only = "local_only"
    no_gate = "no_gate"


class Domain(str, Enum):
    """Synthetic nuisance-statistics domain"""
    A = "A"
    B = "B"


class Split(str, Enum):
    """Dataset split"""
    train = "train"
    val = "val"
    test = "test"


class StrictModel(BaseModel):
    """Base for config sections: unknown keys are rejected"""
    model_config = ConfigDict(extra="forbid", validate_assignment=True)


class ModelConfig(StrictModel):
    """Network shape and variant"""
    d: int = Field(32, ge=1, description="Embedding dimension")
    L: int = Field(3, ge=1, description="Number of mixer blocks")
    K: int = Field(5, ge=1, description="Depthwise temporal kernel size (odd)")
    mlp_ratio: float = Field(3.0, gt=0.0, description="MLP hidden size = round(ratio * d)")
    dropout_p: float = Field(0.1, ge=0.0, lt=1.0)
    T: int = Field(180, ge=1, description="Clip length in frames")
    stem: Literal["mean_pool_linear"] = "mean_pool_linear"
    pool_grid: int = Field(6, ge=1, description="Stem pooling grid P (P x P cells)")
    variant: Variant = Variant.full
    max_lag: Optional[int] = Field(None, ge=0, description="Toeplitz truncation radius")
    ln_eps: float = Field(1e-5, gt=0.0)
    kernel_init_sigma: float = Field(0.02, ge=0.0)

    @property
    def hidden_dim(self) -> int:
        return int(round(self.mlp_ratio * self.d))

    @model_validator(mode="after")
    def _check_shape_rules(self) -> "ModelConfig":
        if self.K % 2 == 0:
            raise ValueError(f"K must be odd, got {self.K}")
        if self.hidden_dim < 1:
            raise ValueError(f"MLP hidden size round({self.mlp_ratio} * {self.d}) must be >= 1")
        return self


class StftConfig(StrictModel):
    """Short-time Fourier transform used by the spectral loss"""
    window_len: int = Field(128, ge=2)
    hop: int = Field(32, ge=1)
    window: Literal["hann"] = "hann"
    band: Tuple[float, float] = (0.75, 2.5)
    p: Literal[1, 2] = 1

    @model_validator(mode="after")
    def _check_window(self) -> "StftConfig":
        if self.window_len & (self.window_len - 1):
            raise ValueError(f"window_len must be a power of two, got {self.window_len}")
        lo, hi = self.band
        if not 0.0 < lo < hi:
            raise ValueError(f"band must satisfy 0 < lo < hi, got {self.band}")
        return self


class LossConfig(StrictModel):
    """Composite objective weights"""
    lambda_mse: float = Field(1.0, ge=0.0)
    lambda_rho: float = Field(1.0, ge=0.0)
    lambda_spec: float = Field(0.5, ge=0.0)
    eps: float = Field(1e-8, gt=0.0)
    stft: StftConfig = Field(default_factory=StftConfig)


class TrainConfig(StrictModel):
    """Optimizer and training-loop settings"""
    lr: float = Field(1e-3, gt=0.0)
    betas: Tuple[float, float] = (0.9, 0.999)
    adam_eps: float = Field(1e-8, gt=0.0)
    weight_decay: float = Field(0.0, ge=0.0)
    batch_size: int = Field(8, ge=1)
    epochs: int = Field(10, ge=0)
    seed: int = 0
    grad_clip: Optional[float] = Field(None, gt=0.0)
    n_train_clips: int = Field(64, ge=1)
    n_val_clips: int = Field(16, ge=0)
    loss: LossConfig = Field(default_factory=LossConfig)

    @model_validator(mode="after")
    def _check_betas(self) -> "TrainConfig":
        for beta in self.betas:
            if not 0.0 < beta < 1.0:
                raise ValueError(f"betas must lie in (0, 1), got {self.betas}")
        return self


class SynthConfig(StrictModel):
    """Synthetic clip generator"""
    fs: float = Field(30.0, gt=0.0, description="Frame rate (Hz)")
    T: int = Field(180, ge=2)
    H: int = Field(12, ge=1)
    W: int = Field(12, ge=1)
    hr_range: Tuple[float, float] = (45.0, 150.0)
    hr_drift: float = Field(0.5, ge=0.0, description="Max HR drift (bpm per second)")
    harmonics: int = Field(2, ge=1)
    harmonic_amp: float = Field(0.3, ge=0.0, description="Relative amplitude of the 2nd harmonic")
    modulation_amp: float = Field(0.05, ge=0.0)
    illum_drift_amp: float = Field(0.02, ge=0.0)
    noise_sigma: float = Field(0.01, ge=0.0)
    motion_jitter: int = Field(0, ge=0, description="Max region shift in pixels")
    seed: int = 0

    @model_validator(mode="after")
    def _check_physiology(self) -> "SynthConfig":
        lo, hi = self.hr_range
        if not 45.0 <= lo < hi <= 150.0:
            raise ValueError(f"hr_range must lie within [45, 150] bpm, got {self.hr_range}")
        duration = self.T / self.fs
        if duration < 3.0 * 60.0 / lo:
            raise ValueError(
                f"clip of {duration:.2f}s covers fewer than 3 pulse periods at {lo} bpm"
            )
        return self


class EvalConfig(StrictModel):
    """Heart-rate and SNR evaluation conventions"""
    band_hz: Tuple[float, float] = (0.75, 2.5)
    snr_range_hz: Tuple[float, float] = (0.6, 4.0)
    snr_windows: float = Field(0.1, gt=0.0, description="Half-width (Hz) of each SNR signal window")
    min_nfft: int = Field(4096, ge=2)
    n_test_clips: int = Field(32, ge=1)


class RunConfig(StrictModel):
    """Full run configuration; every field optional and defaulted"""
    model: ModelConfig = Field(default_factory=ModelConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    synth: SynthConfig = Field(default_factory=SynthConfig)
    eval: EvalConfig = Field(default_factory=EvalConfig)

    @model_validator(mode="after")
    def _check_cross_section(self) -> "RunConfig":
        if self.model.T != self.synth.T:
            raise ValueError(f"model.T={self.model.T} must equal synth.T={self.synth.T}")
        if self.synth.H % self.model.pool_grid or self.synth.W % self.model.pool_grid:
            raise ValueError(
                f"frame size {self.synth.H}x{self.synth.W} not divisible by pool_grid={self.model.pool_grid}"
            )
        nyquist = self.synth.fs / 2.0
        for name, (lo, hi) in (
            ("train.loss.stft.band", self.train.loss.stft.band),
            ("eval.band_hz", self.eval.band_hz),
        ):
            if not 0.0 < lo < hi < nyquist:
                raise ValueError(f"{name} must satisfy 0 < lo < hi < fs/2 = {nyquist}")
        if self.train.loss.lambda_spec > 0 and self.train.loss.stft.window_len > self.synth.T:
            raise ValueError(
                f"train.loss.stft.window_len={self.train.loss.stft.window_len} exceeds T={self.synth.T}"
            )
        return self
