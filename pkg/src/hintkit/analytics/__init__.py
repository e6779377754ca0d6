"""Measurement pipeline over event logs: behavior metrics, labels, statistics."""

from .reports import (
    AnalyticsConfig,
    CompetencyLabels,
    ContemplationRecord,
    DifficultyLabels,
    IsolatedFraction,
    SequenceStats,
    SequenceSummary,
    contemplation_times,
    default_assignment_map,
    engagement_report,
    estimate_competency,
    estimate_difficulty,
    isolated_type_fraction,
    log_questions,
    log_students,
    pair_sequences,
    per_question_type_counts,
    performance_breakdown,
    rating_table,
    revisit_counts_per_hint,
    sequence_flow_export,
    sequence_stats,
    summarize_sequence,
)
from .stats import (
    PairwiseComparison,
    StatTestResult,
    binomial_se,
    bonferroni,
    chi2_sf,
    chi_square_independence,
    dunn_posthoc,
    gammainc_upper,
    kruskal_wallis,
    moods_median_test,
    normal_sf,
    rankdata,
)

__all__ = [
    "AnalyticsConfig",
    "CompetencyLabels",
    "ContemplationRecord",
    "DifficultyLabels",
    "IsolatedFraction",
    "PairwiseComparison",
    "SequenceStats",
    "SequenceSummary",
    "StatTestResult",
    "binomial_se",
    "bonferroni",
    "chi2_sf",
    "chi_square_independence",
    "contemplation_times",
    "default_assignment_map",
    "dunn_posthoc",
    "engagement_report",
    "estimate_competency",
    "estimate_difficulty",
    "gammainc_upper",
    "isolated_type_fraction",
    "kruskal_wallis",
    "log_questions",
    "log_students",
    "moods_median_test",
    "normal_sf",
    "pair_sequences",
    "per_question_type_counts",
    "performance_breakdown",
    "rankdata",
    "rating_table",
    "revisit_counts_per_hint",
    "sequence_flow_export",
    "sequence_stats",
    "summarize_sequence",
]
