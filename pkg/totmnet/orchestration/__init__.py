"""Multi-step workflows: training/evaluation, ablation, benchmark, oracle checks"""

from .training_workflow import TrainingWorkflow, create_training_workflow, train, evaluate
from .ablation_workflow import run_ablation
from .benchmark import run_bench, fit_loglog_slopes
from .check_suite import run_checks

__all__ = [
    "TrainingWorkflow",
    "create_training_workflow",
    "train",
    "evaluate",
    "run_ablation",
    "run_bench",
    "fit_loglog_slopes",
    "run_checks",
]
