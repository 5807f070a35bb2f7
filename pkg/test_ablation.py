"""Tests for the three-variant ablation"""

from totmnet.core.network import expected_shapes
from totmnet.models.config_models import (
    Domain,
    EvalConfig,
    LossConfig,
    ModelConfig,
    RunConfig,
    StftConfig,
    SynthConfig,
    TrainConfig,
    Variant,
)
from totmnet.models.output_models import MetricsRow
from totmnet.orchestration.ablation_workflow import ABLATION_FILE, gated_is_best, run_ablation
from totmnet.tools.checkpoint_tools import load_checkpoint
from totmnet.tools.report_tools import read_rows


def row(variant: str, domain: str, mae: float) -> MetricsRow:
    return MetricsRow(mae_bpm=mae, rmse_bpm=mae, mape_pct=1.0, n_clips=2, domain=domain, variant=variant)


def test_gated_is_best():
    rows = [row("local_only", "A", 5.0), row("no_gate", "A", 4.0), row("full", "A", 3.0), row("full", "B", 9.0)]
    assert gated_is_best(rows, Domain.A) is True
    assert gated_is_best(rows, Domain.B) is None
    rows[1] = row("no_gate", "A", 3.0)
    assert gated_is_best(rows, Domain.A) is False


def test_ablation_writes_all_variants(tmp_path):
    cfg = RunConfig(
        model=ModelConfig(d=4, L=1, K=3, mlp_ratio=2.0, T=120),
        train=TrainConfig(
            epochs=1, batch_size=4, n_train_clips=4, n_val_clips=0,
            loss=LossConfig(stft=StftConfig(window_len=64, hop=16)),
        ),
        synth=SynthConfig(T=120),
        eval=EvalConfig(n_test_clips=2),
    )
    rows = run_ablation(cfg, tmp_path)
    assert [(r.variant, r.domain) for r in rows] == [
        ("local_only", "A"), ("local_only", "B"),
        ("no_gate", "A"), ("no_gate", "B"),
        ("full", "A"), ("full", "B"),
    ]
    written = read_rows(tmp_path / ABLATION_FILE)
    assert len(written) == 6
    assert all(float(r["mae_bpm"]) >= 0.0 for r in written)

    local_cfg = cfg.model.model_copy(update={"variant": Variant.local_only})
    params, _, _ = load_checkpoint(tmp_path / "local_only" / "checkpoint.json")
    assert params.paths() == list(expected_shapes(local_cfg))
    assert not any("toeplitz" in p or "gate" in p for p in params.paths())
