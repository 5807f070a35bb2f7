"""End-to-end tests of the command-line interface and its exit codes"""

import json
from pathlib import Path

import pytest

from totmnet.main import (
    EXIT_CHECK_FAILED,
    EXIT_CHECKPOINT_MISMATCH,
    EXIT_DIVERGED,
    EXIT_OK,
    EXIT_USAGE,
    load_run_config,
    main,
)
from totmnet.orchestration import training_workflow
from totmnet.tools.report_tools import read_rows

SMALL_RUN = {
    "model": {"d": 4, "L": 1, "K": 3, "mlp_ratio": 2.0, "T": 120},
    "synth": {"T": 120},
    "train": {
        "epochs": 1,
        "batch_size": 4,
        "n_train_clips": 4,
        "n_val_clips": 2,
        "loss": {"stft": {"window_len": 64, "hop": 16}},
    },
    "eval": {"n_test_clips": 3},
}


def write_config(tmp_path: Path, overrides=None, name: str = "run.json") -> str:
    config = json.loads(json.dumps(SMALL_RUN))
    for section, values in (overrides or {}).items():
        config.setdefault(section, {}).update(values)
    path = tmp_path / name
    path.write_text(json.dumps(config))
    return str(path)


@pytest.fixture(scope="module")
def trained_run(tmp_path_factory):
    tmp_path = tmp_path_factory.mktemp("trained")
    config = write_config(tmp_path)
    assert main(["train", "--config", config, "--out", str(tmp_path / "run")]) == EXIT_OK
    return tmp_path, config


def test_toy_config_parses():
    cfg = load_run_config(str(Path(__file__).parent / "configs" / "toy.json"))
    assert (cfg.model.d, cfg.model.L, cfg.model.T, cfg.train.epochs) == (8, 2, 120, 30)


# -------------
# synth
# -------------

def test_synth_writes_n_clips(tmp_path):
    config = write_config(tmp_path)
    assert main(["synth", "--config", config, "--out", str(tmp_path / "a"), "--n", "3", "--domain", "B"]) == EXIT_OK
    manifests = sorted((tmp_path / "a").glob("clip_*.json"))
    assert [m.name for m in manifests] == [f"clip_train_B_0000{i}.json" for i in range(3)]
    assert (tmp_path / "a" / "resolved_config.json").exists()


def test_synth_is_deterministic(tmp_path):
    config = write_config(tmp_path)
    for out in ("a", "b"):
        assert main(["synth", "--config", config, "--out", str(tmp_path / out), "--n", "2", "--split", "test"]) == EXIT_OK
    for binary in sorted((tmp_path / "a").glob("*.bin")):
        assert binary.read_bytes() == (tmp_path / "b" / binary.name).read_bytes()


def test_synth_unknown_domain(tmp_path):
    assert main(["synth", "--out", str(tmp_path), "--domain", "C"]) == EXIT_USAGE


def test_synth_needs_a_clip(tmp_path):
    config = write_config(tmp_path)
    assert main(["synth", "--config", config, "--out", str(tmp_path / "a"), "--n", "0"]) == EXIT_USAGE


# -------------
# config errors
# -------------

def test_unknown_config_key(tmp_path, capsys):
    config = write_config(tmp_path, {"model": {"width": 3}})
    assert main(["train", "--config", config, "--out", str(tmp_path / "run")]) == EXIT_USAGE
    assert "model.width" in capsys.readouterr().err


def test_inconsistent_config(tmp_path):
    config = write_config(tmp_path, {"synth": {"T": 150}})
    assert main(["train", "--config", config, "--out", str(tmp_path / "run")]) == EXIT_USAGE


def test_missing_config_file(tmp_path):
    assert main(["train", "--config", str(tmp_path / "absent.json"), "--out", str(tmp_path)]) == EXIT_USAGE


def test_no_subcommand():
    assert main([]) == EXIT_USAGE


# -------------
# train / eval
# -------------

def test_train_writes_artifacts(trained_run):
    tmp_path, _ = trained_run
    run = tmp_path / "run"
    assert {p.name for p in run.iterdir()} >= {"checkpoint.json", "epoch_log.csv", "resolved_config.json"}
    rows = read_rows(run / "epoch_log.csv")
    assert len(rows) == 1 and rows[0]["epoch"] == "1"


def test_zero_epochs(tmp_path):
    config = write_config(tmp_path, {"train": {"epochs": 0}})
    assert main(["train", "--config", config, "--out", str(tmp_path / "run")]) == EXIT_OK
    assert read_rows(tmp_path / "run" / "epoch_log.csv") == []
    document = json.loads((tmp_path / "run" / "checkpoint.json").read_text())
    assert document["epoch"] == 0


def test_local_only_checkpoint_has_no_global_paths(tmp_path):
    config = write_config(tmp_path, {"train": {"epochs": 0}})
    out = tmp_path / "run"
    assert main(["train", "--config", config, "--out", str(out), "--variant", "local_only"]) == EXIT_OK
    document = json.loads((out / "checkpoint.json").read_text())
    assert document["config"]["variant"] == "local_only"
    assert not any("toeplitz" in path or "gate" in path or "norm_t" in path for path in document["tensors"])


def test_divergence_exit_code(tmp_path, monkeypatch):
    def exploding(pred, ref, cfg, fs):
        return float("inf"), pred * 0.0, {"mse": float("inf"), "rho": 0.0, "spec": 0.0}

    monkeypatch.setattr(training_workflow, "combined_loss", exploding)
    config = write_config(tmp_path)
    assert main(["train", "--config", config, "--out", str(tmp_path / "run")]) == EXIT_DIVERGED


def test_eval_is_deterministic(trained_run, capsys):
    tmp_path, config = trained_run
    checkpoint = str(tmp_path / "run" / "checkpoint.json")
    outputs = []
    for name in ("first.csv", "second.csv"):
        capsys.readouterr()
        assert main(["eval", "--checkpoint", checkpoint, "--config", config, "--out", str(tmp_path / name)]) == EXIT_OK
        outputs.append(capsys.readouterr().out.strip().splitlines()[-1])
    assert outputs[0] == outputs[1]
    metrics = json.loads(outputs[0])
    assert metrics["n_clips"] == 3
    assert (tmp_path / "first.csv").read_text() == (tmp_path / "second.csv").read_text()
    row = read_rows(tmp_path / "first.csv")[0]
    assert (row["split"], row["domain"], row["n_clips"]) == ("test", "A", "3")


def test_eval_domain_b(trained_run):
    tmp_path, config = trained_run
    checkpoint = str(tmp_path / "run" / "checkpoint.json")
    out = tmp_path / "b.csv"
    assert main(["eval", "--checkpoint", checkpoint, "--config", config, "--domain", "B", "--out", str(out)]) == EXIT_OK
    assert read_rows(out)[0]["domain"] == "B"


def test_eval_rejects_perturbed_checkpoint(trained_run, capsys):
    tmp_path, config = trained_run
    document = json.loads((tmp_path / "run" / "checkpoint.json").read_text())
    document["tensors"]["block.0.pw.weight"] = {"shape": [4, 5], "values": [0.0] * 20}
    perturbed = tmp_path / "perturbed.json"
    perturbed.write_text(json.dumps(document))
    code = main(["eval", "--checkpoint", str(perturbed), "--config", config, "--out", str(tmp_path / "m.csv")])
    assert code == EXIT_CHECKPOINT_MISMATCH
    assert "block.0.pw.weight" in capsys.readouterr().err


def test_eval_rejects_other_variant(tmp_path):
    config = write_config(tmp_path, {"train": {"epochs": 0}})
    out = tmp_path / "run"
    assert main(["train", "--config", config, "--out", str(out), "--variant", "no_gate"]) == EXIT_OK
    code = main(["eval", "--checkpoint", str(out / "checkpoint.json"), "--config", config, "--out", str(tmp_path / "m.csv")])
    assert code == EXIT_CHECKPOINT_MISMATCH


# -------------
# check / bench
# -------------

def test_check_passes(capsys):
    assert main(["check"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert sum(line.startswith("PASS ") for line in lines) >= 5
    assert lines[-1].endswith("0 failed")


def test_check_detects_wrong_adjoint(capsys):
    assert main(["check", "--inject-fault", "adjoint"]) == EXIT_CHECK_FAILED
    out = capsys.readouterr().out
    assert "FAIL gradients" in out
    assert "PASS toeplitz" in out


def test_bench_requires_csv():
    assert main(["bench", "--t-min", "256", "--t-max", "256"]) == EXIT_USAGE


def test_bench_single_point(tmp_path, capsys):
    csv_path = tmp_path / "bench.csv"
    assert main(["bench", "--t-min", "256", "--t-max", "256", "--csv", str(csv_path), "--d", "4", "--B", "1"]) == EXIT_OK
    rows = read_rows(csv_path)
    assert [(r["T"], r["method"]) for r in rows] == [("256", "fft"), ("256", "dense")]
    assert all(int(r["median_ns"]) > 0 and r["reps"] == "5" for r in rows)


@pytest.mark.parametrize("t_min,t_max", [("300", "500"), ("512", "256"), ("1", "8")])
def test_bench_invalid_range(tmp_path, t_min, t_max):
    code = main(["bench", "--t-min", t_min, "--t-max", t_max, "--csv", str(tmp_path / "b.csv")])
    assert code == EXIT_USAGE


def test_bench_too_few_reps(tmp_path):
    assert main(["bench", "--t-min", "8", "--t-max", "8", "--reps", "3", "--csv", str(tmp_path / "b.csv")]) == EXIT_USAGE
