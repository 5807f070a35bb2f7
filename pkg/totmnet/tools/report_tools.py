"""CSV emission for epoch logs, metric reports and benchmark timings"""

import csv
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

from ..models.output_models import BenchRecord, EpochRecord, MetricsRow

EPOCH_HEADER = ["epoch", "loss_total", "loss_mse", "loss_rho", "loss_spec", "val_loss", "val_mae_bpm"]
METRICS_HEADER = ["split", "domain", "n_clips", "mae_bpm", "rmse_bpm", "mape_pct", "pearson", "snr_db"]
ABLATION_HEADER = ["variant"] + METRICS_HEADER
BENCH_HEADER = ["T", "d", "B", "method", "median_ns", "reps"]

# undefined values (Pearson of a constant array, SNR with no usable clip)
UNDEFINED = ""


def format_value(value: Optional[object]) -> str:
    if value is None:
        return UNDEFINED
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_rows(path: Union[str, Path], header: Sequence[str], rows: Iterable[Sequence[object]]) -> Path:
    """Write header plus rows; parent directories are created."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(value) for value in row])
    return path


def write_epoch_log(path: Union[str, Path], records: List[EpochRecord]) -> Path:
    return write_rows(
        path,
        EPOCH_HEADER,
        ([getattr(record, column) for column in EPOCH_HEADER] for record in records),
    )


def write_metrics_report(path: Union[str, Path], rows: List[MetricsRow]) -> Path:
    return write_rows(path, METRICS_HEADER, ([getattr(row, column) for column in METRICS_HEADER] for row in rows))


def write_ablation_report(path: Union[str, Path], rows: List[MetricsRow]) -> Path:
    return write_rows(
        path, ABLATION_HEADER, ([getattr(row, column) for column in ABLATION_HEADER] for row in rows)
    )


def write_bench_csv(path: Union[str, Path], records: List[BenchRecord]) -> Path:
    return write_rows(path, BENCH_HEADER, ([getattr(r, column) for column in BENCH_HEADER] for r in records))


def read_rows(path: Union[str, Path]) -> List[dict]:
    """Rows of a report as dicts keyed by header, values as strings."""
    with Path(path).open(newline="") as handle:
        return list(csv.DictReader(handle))
