"""Three-variant ablation: local-only, ungated and gated Toeplitz mixing under one config"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Union

from ..models.config_models import Domain, RunConfig, Variant
from ..models.output_models import MetricsRow
from ..tools.report_tools import write_ablation_report
from .training_workflow import TrainingWorkflow, metrics_row

logger = logging.getLogger(__name__)

ABLATION_VARIANTS = (Variant.local_only, Variant.no_gate, Variant.full)
ABLATION_FILE = "ablation_metrics.csv"


def gated_is_best(rows: List[MetricsRow], domain: Domain) -> Optional[bool]:
    """Whether the full variant has the strictly lowest MAE on ``domain`` (None if a row is missing)."""
    by_variant: Dict[str, float] = {row.variant: row.mae_bpm for row in rows if row.domain == domain.value}
    if set(by_variant) != {v.value for v in ABLATION_VARIANTS}:
        return None
    full = by_variant.pop(Variant.full.value)
    return all(full < other for other in by_variant.values())


def run_ablation(run_cfg: RunConfig, out_dir: Union[str, Path]) -> List[MetricsRow]:
    """
    Train each variant with the same config and seed, evaluate on the domain-A
    and domain-B test splits, and write ``ablation_metrics.csv``.

    Each variant's training artifacts go to ``<out_dir>/<variant>/``. The
    ordering of the variants is logged, not enforced.
    """
    out_dir = Path(out_dir)
    base = TrainingWorkflow(run_cfg)
    rows: List[MetricsRow] = []
    for variant in ABLATION_VARIANTS:
        logger.info(f"🧪 Ablation variant: {variant.value}")
        workflow = base.with_variant(variant)
        result = workflow.run_training(out_dir / variant.value)
        for domain in (Domain.A, Domain.B):
            report = workflow.evaluate_params(result.params, domain)
            rows.append(metrics_row(report, variant.value))

    write_ablation_report(out_dir / ABLATION_FILE, rows)
    for domain in (Domain.A, Domain.B):
        logger.info(f"   📊 domain {domain.value}: gated variant lowest MAE = {gated_is_best(rows, domain)}")
    return rows
