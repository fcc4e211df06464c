"""Post-hoc analysis of results tables."""

from .improvement import (AlwaysOnSummary, AnalysisError, ImprovementRecord, align_label_sizes,
                          always_on_summary, expected_improvement, improvement_records, mean_scores,
                          records_frame, relative_improvement, target_grid, variance_profile)
from .reports import (REPORT_KINDS, always_on, build_report, delta_curves, effect_sizes,
                      heatmap_cells, matched_blocks, tests)
from .stats import friedman_test, kendalls_w, rank_within_blocks, wilcoxon_signed_rank

__all__ = [
    "AlwaysOnSummary", "AnalysisError", "ImprovementRecord", "REPORT_KINDS", "align_label_sizes",
    "always_on", "always_on_summary", "build_report", "delta_curves", "effect_sizes",
    "expected_improvement", "friedman_test", "heatmap_cells", "improvement_records",
    "kendalls_w", "matched_blocks", "mean_scores", "rank_within_blocks", "records_frame",
    "relative_improvement", "target_grid", "tests", "variance_profile", "wilcoxon_signed_rank",
]
