"""Training and evaluation workflow: synthetic data -> Adam training -> HR metrics"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from ..core.errors import DivergenceError, OutOfBandError
from ..core.heart_rate import compute_metrics, estimate_hr_fft, snr_db
from ..core.losses import combined_loss
from ..core.network import ModelParams, forward_pass, init_params, model_backward, param_count
from ..core.optimizer import AdamState, adam_step
from ..models.config_models import (
    Domain,
    EvalConfig,
    LossConfig,
    ModelConfig,
    RunConfig,
    Split,
    TrainConfig,
    Variant,
)
from ..models.output_models import EpochRecord, EvaluationReport, MetricsRow
from ..tools.checkpoint_tools import load_checkpoint, save_checkpoint
from ..tools.report_tools import write_epoch_log, write_metrics_report
from ..tools.synth_tools import SynthClip, make_dataset, stack_clips

logger = logging.getLogger(__name__)

# total parameter count reported for the published model, logged for context only
PUBLISHED_PARAM_COUNT = 63_000

CHECKPOINT_FILE = "checkpoint.json"
EPOCH_LOG_FILE = "epoch_log.csv"
RESOLVED_CONFIG_FILE = "resolved_config.json"


@dataclass
class TrainingResult:
    """Best-validation parameters plus the per-epoch log"""
    params: ModelParams
    best_epoch: int
    records: List[EpochRecord] = field(default_factory=list)
    final_params: Optional[ModelParams] = None


def _stream(seed: int, purpose: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, purpose]))


def predict(
    params: ModelParams,
    config: ModelConfig,
    X: np.ndarray,
    batch_size: int = 8,
) -> Tuple[np.ndarray, List[float]]:
    """
    Eval-mode waveforms for a stack of clips, in batches.

    Returns:
        (S of shape B x T, clip-weighted mean gate activation per block)
    """
    outputs = []
    gate_sums = np.zeros(config.L if config.variant == Variant.full else 0)
    for start in range(0, X.shape[0], batch_size):
        S, cache = forward_pass(X[start: start + batch_size], params, config, training=False)
        outputs.append(S)
        if gate_sums.size:
            gate_sums += np.asarray(cache.gate_means) * S.shape[0]
    return np.concatenate(outputs), (gate_sums / X.shape[0]).tolist()


def dataset_loss(
    params: ModelParams,
    config: ModelConfig,
    clips: Sequence[SynthClip],
    loss_cfg: LossConfig,
    fs: float,
    batch_size: int = 8,
) -> float:
    """Eval-mode combined loss over a clip set."""
    X, Y = stack_clips(list(clips))
    S, _ = predict(params, config, X, batch_size)
    value, _, _ = combined_loss(S, Y, loss_cfg, fs)
    return value


def clip_heart_rates(
    waves: np.ndarray,
    clips: Sequence[SynthClip],
    fs: float,
    eval_cfg: EvalConfig,
    with_snr: bool = True,
) -> Tuple[List[float], List[float], List[Optional[float]]]:
    """Predicted HR, reference HR (same estimator on the label waveform) and SNR per clip."""
    pred_hr, ref_hr, snrs = [], [], []
    for wave, clip in zip(waves, clips):
        pred = estimate_hr_fft(wave, fs, eval_cfg.band_hz, eval_cfg.min_nfft)
        ref = estimate_hr_fft(clip.bvp, fs, eval_cfg.band_hz, eval_cfg.min_nfft)
        snr = None
        try:
            if with_snr:
                snr = snr_db(wave, ref, fs, eval_cfg.snr_windows, eval_cfg.snr_range_hz, eval_cfg.min_nfft)
        except OutOfBandError as e:
            logger.warning(f"⚠️ SNR skipped for clip {clip.index}: {e}")
        pred_hr.append(pred)
        ref_hr.append(ref)
        snrs.append(snr)
    return pred_hr, ref_hr, snrs


def train(
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
    train_clips: Sequence[SynthClip],
    val_clips: Optional[Sequence[SynthClip]] = None,
    fs: float = 30.0,
    eval_cfg: Optional[EvalConfig] = None,
) -> TrainingResult:
    """
    Adam training against the combined loss with per-epoch seeded shuffling.

    The returned parameters are those of the epoch with the lowest validation
    HR MAE (earliest on ties); without validation clips, the last epoch.
    With epochs == 0 the initial parameters come back and the log is empty.

    Raises:
        DivergenceError: if a batch loss is non-finite
        ValueError: if the training set is empty
    """
    if not train_clips:
        raise ValueError("training set is empty")
    eval_cfg = eval_cfg or EvalConfig()
    loss_cfg = train_cfg.loss
    params = init_params(model_cfg, seed=train_cfg.seed)
    state = AdamState.for_params(params)
    shuffle_rng = _stream(train_cfg.seed, 1)
    dropout_rng = _stream(train_cfg.seed, 2)

    X, Y = stack_clips(list(train_clips))
    if val_clips:
        X_val, Y_val = stack_clips(list(val_clips))
    n = X.shape[0]
    records: List[EpochRecord] = []
    best_params, best_epoch, best_mae = params.copy(), 0, np.inf
    step = 0

    for epoch in range(1, train_cfg.epochs + 1):
        order = shuffle_rng.permutation(n)
        sums = {"total": 0.0, "mse": 0.0, "rho": 0.0, "spec": 0.0}
        for start in range(0, n, train_cfg.batch_size):
            idx = order[start: start + train_cfg.batch_size]
            S, cache = forward_pass(X[idx], params, model_cfg, training=True, rng=dropout_rng)
            value, dS, terms = combined_loss(S, Y[idx], loss_cfg, fs)
            if not np.isfinite(value):
                raise DivergenceError(
                    f"non-finite loss at epoch {epoch}, step {step + 1}: total={value} terms={terms}"
                )
            grads = model_backward(dS, cache)
            step += 1
            adam_step(params, grads, state, train_cfg, step, model_cfg.max_lag)
            weight = idx.size / n
            sums["total"] += weight * value
            for name, term in terms.items():
                sums[name] += weight * term

        record = EpochRecord(
            epoch=epoch,
            loss_total=sums["total"],
            loss_mse=sums["mse"],
            loss_rho=sums["rho"],
            loss_spec=sums["spec"],
        )
        if val_clips:
            S_val, _ = predict(params, model_cfg, X_val, train_cfg.batch_size)
            record.val_loss = combined_loss(S_val, Y_val, loss_cfg, fs)[0]
            pred_hr, ref_hr, _ = clip_heart_rates(S_val, val_clips, fs, eval_cfg, with_snr=False)
            record.val_mae_bpm = float(np.mean(np.abs(np.subtract(pred_hr, ref_hr))))
            if record.val_mae_bpm < best_mae:
                best_params, best_epoch, best_mae = params.copy(), epoch, record.val_mae_bpm
        else:
            best_params, best_epoch = params.copy(), epoch
        records.append(record)
        logger.info(
            f"   📈 epoch {epoch}/{train_cfg.epochs} loss={record.loss_total:.5f} "
            f"(mse={record.loss_mse:.4f} rho={record.loss_rho:.4f} spec={record.loss_spec:.4f}) "
            f"val_loss={record.val_loss} val_mae={record.val_mae_bpm}"
        )

    return TrainingResult(params=best_params, best_epoch=best_epoch, records=records, final_params=params)


def evaluate(
    params: ModelParams,
    model_cfg: ModelConfig,
    clips: Sequence[SynthClip],
    fs: float,
    eval_cfg: Optional[EvalConfig] = None,
    batch_size: int = 8,
) -> EvaluationReport:
    """
    Eval-mode forward, per-clip HR and SNR, aggregate metrics.

    Clips whose reference HR puts the second harmonic outside the SNR range
    are left out of the SNR mean (with a warning) but keep their HR metrics.
    """
    eval_cfg = eval_cfg or EvalConfig()
    X, _ = stack_clips(list(clips))
    S, gate_mean = predict(params, model_cfg, X, batch_size)
    pred_hr, ref_hr, snrs = clip_heart_rates(S, clips, fs, eval_cfg)
    metrics = compute_metrics(pred_hr, ref_hr, snrs)
    if gate_mean:
        logger.debug(f"Gate mean per block: {[round(g, 4) for g in gate_mean]}")
    return EvaluationReport(
        domain=clips[0].domain.value,
        split=clips[0].split.value,
        pred_hr_bpm=pred_hr,
        ref_hr_bpm=ref_hr,
        snr_db=snrs,
        gate_mean=gate_mean,
        metrics=metrics,
    )


class TrainingWorkflow:
    """
    End-to-end run for one RunConfig: synthesize splits, train, checkpoint, evaluate.

    Workflow:
    1. Generate domain-A train and val clips
    2. Train with best-val checkpoint selection
    3. Write checkpoint, epoch log and resolved config to the output directory
    4. Evaluate a checkpoint on the test split of either domain
    """

    def __init__(self, run_cfg: RunConfig):
        self.run_cfg = run_cfg
        counts = param_count(run_cfg.model)
        logger.info(f"🔧 Initializing ToTMNet workflow (variant={run_cfg.model.variant.value})")
        logger.info(
            f"   📌 {counts.total} parameters "
            f"(published model: {PUBLISHED_PARAM_COUNT / 1e6:.3f}M, context only; stem differs)"
        )
        for name, count in counts.components.items():
            logger.debug(f"      {name}: {count}")

    def with_variant(self, variant: Union[Variant, str]) -> "TrainingWorkflow":
        model = self.run_cfg.model.model_copy(update={"variant": Variant(variant)})
        return TrainingWorkflow(self.run_cfg.model_copy(update={"model": model}))

    def write_resolved_config(self, out_dir: Union[str, Path]) -> Path:
        path = Path(out_dir) / RESOLVED_CONFIG_FILE
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.run_cfg.model_dump_json(indent=2))
        return path

    def run_training(self, out_dir: Union[str, Path]) -> TrainingResult:
        """
        Train and write ``checkpoint.json``, ``epoch_log.csv`` and ``resolved_config.json``.

        Raises:
            DivergenceError: if training produces a non-finite loss
        """
        cfg = self.run_cfg
        out_dir = Path(out_dir)
        logger.info(f"\n{'=' * 80}")
        logger.info(f"🚀 STARTING TRAINING RUN -> {out_dir}")
        logger.info(f"{'=' * 80}\n")
        self.write_resolved_config(out_dir)

        logger.info(f"📋 Generating {cfg.train.n_train_clips} train / {cfg.train.n_val_clips} val clips (domain A)")
        train_clips = make_dataset(cfg.synth, cfg.train.n_train_clips, Split.train, Domain.A)
        val_clips = (
            make_dataset(cfg.synth, cfg.train.n_val_clips, Split.val, Domain.A) if cfg.train.n_val_clips else None
        )

        result = train(cfg.model, cfg.train, train_clips, val_clips, cfg.synth.fs, cfg.eval)
        save_checkpoint(out_dir / CHECKPOINT_FILE, result.params, cfg.model, result.best_epoch)
        write_epoch_log(out_dir / EPOCH_LOG_FILE, result.records)
        logger.info(f"✅ Training complete (best epoch {result.best_epoch}); artifacts in {out_dir}")
        return result

    def held_out_clips(self, domain: Union[Domain, str]) -> List[SynthClip]:
        return make_dataset(self.run_cfg.synth, self.run_cfg.eval.n_test_clips, Split.test, Domain(domain))

    def evaluate_params(self, params: ModelParams, domain: Union[Domain, str]) -> EvaluationReport:
        cfg = self.run_cfg
        report = evaluate(params, cfg.model, self.held_out_clips(domain), cfg.synth.fs, cfg.eval, cfg.train.batch_size)
        m = report.metrics
        logger.info(
            f"   🩺 domain {report.domain}: MAE={m.mae_bpm:.3f} RMSE={m.rmse_bpm:.3f} "
            f"MAPE={m.mape_pct:.2f}% r={m.pearson} SNR={m.snr_db}"
        )
        return report

    def run_evaluation(
        self,
        checkpoint_path: Union[str, Path],
        domain: Union[Domain, str],
        out_csv: Union[str, Path],
    ) -> EvaluationReport:
        """
        Evaluate a checkpoint on the test split and write the metrics CSV.

        Raises:
            CheckpointMismatchError: if the checkpoint does not match the model config
        """
        params, _, _ = load_checkpoint(checkpoint_path, expected_config=self.run_cfg.model)
        report = self.evaluate_params(params, domain)
        write_metrics_report(out_csv, [metrics_row(report)])
        return report


def metrics_row(report: EvaluationReport, variant: Optional[str] = None) -> MetricsRow:
    return MetricsRow(
        **report.metrics.model_dump(), split=report.split, domain=report.domain, variant=variant
    )


def create_training_workflow(run_cfg: Optional[RunConfig] = None) -> TrainingWorkflow:
    """Factory function to create a training workflow"""
    return TrainingWorkflow(run_cfg or RunConfig())
