"""Run the full measurement pipeline over a simulated cohort and the
published-aggregates fixture.

Run with: python3 demos/demo_analytics.py
"""

from hintkit.analytics import (
    AnalyticsConfig,
    contemplation_times,
    default_assignment_map,
    engagement_report,
    estimate_competency,
    isolated_type_fraction,
    log_questions,
    performance_breakdown,
    sequence_stats,
)
from hintkit.core import HintType
from hintkit.simulate import SimulationSpec, paper_fixture_events, simulate_log


def show_fixture():
    print("=" * 72)
    print("Published-aggregates fixture")
    print("=" * 72)
    events = paper_fixture_events()
    stats = sequence_stats(events)
    print(f"student-question pairs: {stats.n_pairs}")
    print(f"total hints:            {stats.total_hints}")
    print(f"per type:               {stats.type_totals}")
    isolated = isolated_type_fraction(events, HintType.OPTIMIZATION)
    print(
        f"isolated optimization:  {isolated.isolated} of {isolated.total} "
        f"({isolated.fraction:.0%})"
    )
    print("most common sequences:")
    for sequence, count in stats.sequence_frequency[:5]:
        print(f"  {'-'.join(sequence) or '(none)'}: {count}")
    print()


def show_simulated_cohort():
    print("=" * 72)
    print("Simulated cohort (seed 42): engagement, competency, performance")
    print("=" * 72)
    spec = SimulationSpec(
        n_students=30,
        n_questions=8,
        n_assignments=4,
        propensities={"planning": 0.35, "debugging": 0.45, "optimization": 0.08},
        solve_probabilities={
            "no_hint": 0.55,
            "planning": 0.9,
            "debugging": 0.7,
            "optimization": 0.6,
        },
        seed=42,
    )
    events = simulate_log(spec)
    cfg = AnalyticsConfig()

    durations = contemplation_times(events, cfg)
    print(f"contemplation records within cutoff: {len(durations)}")

    engagement = engagement_report(events, cfg)
    for metric in ("contemplation", "revisits"):
        test = engagement[metric].get("test")
        if test and "p_value" in test:
            print(f"{metric}: {test['test_name']} statistic={test['statistic']:.3f} p={test['p_value']:.3f}")

    labels = estimate_competency(events, cfg, default_assignment_map(log_questions(events)))
    counts = {label: sum(1 for l in labels.labels.values() if l == label) for label in ("higher", "middle", "lower")}
    print(f"competency groups: {counts}")

    breakdown = performance_breakdown(events)
    print(f"performance over {breakdown['n_pairs']} pairs (overall rate {breakdown['overall_rate']:.0%}):")
    for group in breakdown["groups"]:
        if group["n"] == 0:
            print(f"  {group['name']:>20}: (no pairs)")
            continue
        marker = group.get("marker", "")
        print(
            f"  {group['name']:>20}: rate {group['rate']:.0%} "
            f"(n={group['n']}, se={group['se']:.3f}) {marker}"
        )
    print()


if __name__ == "__main__":
    show_fixture()
    show_simulated_cohort()
