"""I/O-facing helpers: synthetic data, checkpoints, reports, gradient checks"""

from .synth_tools import (
    SynthClip,
    generate_bvp,
    render_frames,
    make_dataset,
    stack_clips,
    export_clip,
    load_clip,
)
from .checkpoint_tools import (
    save_checkpoint,
    load_checkpoint,
)
from .report_tools import (
    write_epoch_log,
    write_metrics_report,
    write_ablation_report,
    write_bench_csv,
)
from .gradcheck_tools import (
    check_gradients,
    relative_error,
)

__all__ = [
    "SynthClip",
    "generate_bvp",
    "render_frames",
    "make_dataset",
    "stack_clips",
    "export_clip",
    "load_clip",
    "save_checkpoint",
    "load_checkpoint",
    "write_epoch_log",
    "write_metrics_report",
    "write_ablation_report",
    "write_bench_csv",
    "check_gradients",
    "relative_error",
]
