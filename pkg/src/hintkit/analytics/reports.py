"""Behavior and performance measurements over replayed event logs.

Everything here is a pure batch computation on an event list: engagement
(contemplation times, revisits, ratings), help-seeking patterns (sequences,
type presence, first/majority types, isolation), difficulty and competency
labels, and solving-rate breakdowns with their significance tests.
"""

from __future__ import annotations

import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from statistics import median
from typing import Iterable, Mapping, Sequence

from ..core import Event, EventKind, HintType, QuotaPolicy, replay_events
from ..errors import DegenerateData, InsufficientData, ZeroExpectedCount
from .stats import (
    StatTestResult,
    binomial_se,
    bonferroni,
    chi_square_independence,
    dunn_posthoc,
    kruskal_wallis,
    moods_median_test,
)

FLOW_START = "start"
FLOW_END = "end"

LABEL_EASIER = "easier"
LABEL_HARDER = "harder"
LABEL_UNLABELED = "unlabeled"

LABEL_HIGHER = "higher"
LABEL_LOWER = "lower"
LABEL_MIDDLE = "middle"

GROUP_NO_HINT = "no-hint"
GROUP_ANY_HINT = "any-hint"


@dataclass(frozen=True)
class AnalyticsConfig:
    """Knobs for the measurement pipeline.

    The contemplation cutoff drops intervals longer than an hour by default
    (other values behave similarly and stay configurable). Competency uses
    the first assignment as its proxy and excludes it from its own analyses.
    """

    contemplation_cutoff_s: float = 3600.0
    difficulty_group_size: int = 1
    competency_fraction: float = 1.0 / 3.0
    competency_excluded_assignment: str = "a1"

    def __post_init__(self):
        if self.contemplation_cutoff_s <= 0:
            raise ValueError("contemplation cutoff must be positive")
        if not 0 < self.competency_fraction <= 0.5:
            raise ValueError("competency fraction must be in (0, 0.5]")
        if self.difficulty_group_size < 1:
            raise ValueError("difficulty group size must be >= 1")


# --- shared extraction helpers -------------------------------------------------


def pair_sequences(events: Iterable[Event]) -> dict[tuple[str, str], list[HintType]]:
    """Ordered delivered-hint types per (student, question) pair."""
    sequences: dict[tuple[str, str], list[HintType]] = defaultdict(list)
    for event in events:
        if EventKind(event.kind) is EventKind.HINT_DELIVERED:
            key = (event.payload["student_id"], event.payload["question_id"])
            sequences[key].append(HintType(event.payload["hint_type"]))
    return dict(sequences)


def log_students(events: Iterable[Event]) -> set[str]:
    return {e.payload["student_id"] for e in events if "student_id" in e.payload}


def log_questions(events: Iterable[Event]) -> set[str]:
    return {e.payload["question_id"] for e in events if "question_id" in e.payload}


def default_assignment_map(question_ids: Iterable[str]) -> dict[str, str]:
    """Assignment grouping by the built-in id convention ("a2q3" -> "a2")."""
    mapping = {}
    for qid in question_ids:
        match = re.match(r"(a\d+)", qid)
        mapping[qid] = match.group(1) if match else "unknown"
    return mapping


@dataclass(frozen=True)
class SequenceSummary:
    """Per-pair view of one hint sequence."""

    sequence: tuple[HintType, ...]
    types_present: frozenset[HintType]
    first_type: HintType | None
    majority_type: HintType | None


def summarize_sequence(sequence: Sequence[HintType]) -> SequenceSummary:
    counts = Counter(sequence)
    majority = None
    if counts:
        best, best_count = counts.most_common(1)[0]
        if sum(1 for c in counts.values() if c == best_count) == 1:
            majority = best
    return SequenceSummary(
        sequence=tuple(sequence),
        types_present=frozenset(sequence),
        first_type=sequence[0] if sequence else None,
        majority_type=majority,
    )


# --- engagement -----------------------------------------------------------------


@dataclass(frozen=True)
class ContemplationRecord:
    hint_id: str
    hint_type: HintType
    duration_s: float


def contemplation_times(
    events: Sequence[Event], config: AnalyticsConfig = AnalyticsConfig()
) -> list[ContemplationRecord]:
    """Seconds from each delivery to the session's next major action.

    A major action is requesting another hint or submitting a solution.
    Deliveries with no later action are dropped, as are durations beyond
    the cutoff (breaks, abandoned sessions).
    """
    per_session: dict[tuple[str, str], list[Event]] = defaultdict(list)
    for event in events:
        if EventKind(event.kind) in (
            EventKind.HINT_DELIVERED,
            EventKind.HINT_REQUESTED,
            EventKind.SUBMISSION_MADE,
        ):
            key = (event.payload["student_id"], event.payload["question_id"])
            per_session[key].append(event)

    records = []
    for session_events in per_session.values():
        ordered = sorted(session_events, key=lambda e: e.seq)
        for index, event in enumerate(ordered):
            if EventKind(event.kind) is not EventKind.HINT_DELIVERED:
                continue
            follow = next(
                (
                    later
                    for later in ordered[index + 1 :]
                    if EventKind(later.kind)
                    in (EventKind.HINT_REQUESTED, EventKind.SUBMISSION_MADE)
                ),
                None,
            )
            if follow is None:
                continue
            duration = (follow.at - event.at) / 1000.0
            if duration > config.contemplation_cutoff_s:
                continue
            records.append(
                ContemplationRecord(
                    hint_id=event.payload["hint_id"],
                    hint_type=HintType(event.payload["hint_type"]),
                    duration_s=duration,
                )
            )
    return records


def revisit_counts_per_hint(events: Sequence[Event]) -> list[tuple[str, HintType, int]]:
    """(hint_id, type, expansion count) for every delivered hint, zeros included."""
    sessions = replay_events(events, policy=QuotaPolicy(max_hints_per_question=10**9))
    rows = []
    for state in sessions.values():
        for hint in state.hints:
            rows.append(
                (
                    hint.hint_id,
                    hint.request.hint_type,
                    state.revisit_count_per_hint.get(hint.hint_id, 0),
                )
            )
    return rows


def rating_table(events: Sequence[Event]) -> dict[str, dict[str, int]]:
    """Final (latest-wins) thumb ratings per hint type."""
    sessions = replay_events(events, policy=QuotaPolicy(max_hints_per_question=10**9))
    table = {t.value: {"up": 0, "down": 0} for t in HintType}
    for state in sessions.values():
        types = {h.hint_id: h.request.hint_type for h in state.hints}
        for hint_id, rating in state.ratings.items():
            table[types[hint_id].value][rating.value] += 1
    return table


def _grouped(values: Iterable[tuple[HintType, float]]) -> dict[HintType, list[float]]:
    by_type: dict[HintType, list[float]] = defaultdict(list)
    for hint_type, value in values:
        by_type[hint_type].append(value)
    return by_type


def _test_result_doc(result: StatTestResult | None, note: str = "") -> dict | None:
    if result is None:
        return {"note": note} if note else None
    doc = {
        "test_name": result.test_name,
        "statistic": result.statistic,
        "p_value": result.p_value,
    }
    doc.update(result.details)
    return doc


def engagement_report(
    events: Sequence[Event], config: AnalyticsConfig = AnalyticsConfig()
) -> dict:
    """Contemplation, revisit, and rating comparisons across hint types.

    Contemplation differences use Mood's median test with pairwise
    Bonferroni-corrected follow-ups, revisits use Kruskal-Wallis with Dunn
    post hocs, ratings use chi-square tests; groups without data are
    dropped and noted rather than failing the report.
    """
    doc: dict = {}

    contemplation = _grouped(
        (r.hint_type, r.duration_s) for r in contemplation_times(events, config)
    )
    present = [t for t in HintType if contemplation.get(t)]
    doc["contemplation"] = {
        "per_type": {
            t.value: {
                "n": len(contemplation[t]),
                "median_s": median(contemplation[t]),
            }
            for t in present
        },
        "cutoff_s": config.contemplation_cutoff_s,
    }
    if len(present) >= 2:
        groups = [contemplation[t] for t in present]
        try:
            doc["contemplation"]["test"] = _test_result_doc(moods_median_test(groups))
        except (DegenerateData, ValueError) as exc:
            doc["contemplation"]["test"] = {"note": str(exc)}
        doc["contemplation"]["posthoc"] = _pairwise_moods(contemplation, present)

    revisits = _grouped((t, float(c)) for _, t, c in revisit_counts_per_hint(events))
    present = [t for t in HintType if revisits.get(t)]
    doc["revisits"] = {
        "per_type": {
            t.value: {
                "n": len(revisits[t]),
                "mean": sum(revisits[t]) / len(revisits[t]),
                "median": median(revisits[t]),
            }
            for t in present
        }
    }
    if len(present) >= 2:
        groups = [revisits[t] for t in present]
        try:
            doc["revisits"]["test"] = _test_result_doc(kruskal_wallis(groups))
            doc["revisits"]["posthoc"] = [
                {
                    "pair": list(c.pair),
                    "z": c.statistic,
                    "p_raw": c.p_raw,
                    "p_corrected": c.p_corrected,
                }
                for c in dunn_posthoc(groups, labels=[t.value for t in present])
            ]
        except (DegenerateData, ValueError) as exc:
            doc["revisits"]["test"] = {"note": str(exc)}

    ratings = rating_table(events)
    doc["ratings"] = {"table": ratings}
    rated = [t for t in HintType if sum(ratings[t.value].values()) > 0]
    if len(rated) >= 2:
        table = [[ratings[t.value]["up"], ratings[t.value]["down"]] for t in rated]
        try:
            doc["ratings"]["test"] = _test_result_doc(chi_square_independence(table))
            doc["ratings"]["posthoc"] = _pairwise_ratings(ratings, rated)
        except (DegenerateData, ZeroExpectedCount, ValueError) as exc:
            doc["ratings"]["test"] = {"note": str(exc)}
    return doc


def _pairwise_moods(
    grouped: Mapping[HintType, list[float]], present: list[HintType]
) -> list[dict]:
    pairs = [
        (a, b) for i, a in enumerate(present) for b in present[i + 1 :]
    ]
    raw = []
    rows = []
    for a, b in pairs:
        try:
            result = moods_median_test([grouped[a], grouped[b]])
            raw.append(result.p_value)
            rows.append({"pair": [a.value, b.value], "statistic": result.statistic})
        except (DegenerateData, ValueError) as exc:
            raw.append(None)
            rows.append({"pair": [a.value, b.value], "note": str(exc)})
    corrections = bonferroni([p for p in raw if p is not None], len(pairs))
    iterator = iter(corrections)
    for row, p in zip(rows, raw):
        if p is not None:
            row["p_raw"] = p
            row["p_corrected"] = next(iterator)
    return rows


def _pairwise_ratings(
    ratings: Mapping[str, Mapping[str, int]], rated: list[HintType]
) -> list[dict]:
    pairs = [(a, b) for i, a in enumerate(rated) for b in rated[i + 1 :]]
    rows = []
    raw = []
    for a, b in pairs:
        table = [
            [ratings[a.value]["up"], ratings[a.value]["down"]],
            [ratings[b.value]["up"], ratings[b.value]["down"]],
        ]
        try:
            result = chi_square_independence(table)
            raw.append(result.p_value)
            rows.append({"pair": [a.value, b.value], "statistic": result.statistic})
        except (ZeroExpectedCount, ValueError) as exc:
            raw.append(None)
            rows.append({"pair": [a.value, b.value], "note": str(exc)})
    corrections = bonferroni([p for p in raw if p is not None], len(pairs))
    iterator = iter(corrections)
    for row, p in zip(rows, raw):
        if p is not None:
            row["p_raw"] = p
            row["p_corrected"] = next(iterator)
    return rows


# --- help-seeking patterns ---------------------------------------------------------


@dataclass(frozen=True)
class SequenceStats:
    n_pairs: int
    total_hints: int
    type_totals: dict[str, int] = field(default_factory=dict)
    present_counts: dict[str, int] = field(default_factory=dict)
    first_counts: dict[str, int] = field(default_factory=dict)
    majority_counts: dict[str, int] = field(default_factory=dict)
    sequence_frequency: list[tuple[tuple[str, ...], int]] = field(default_factory=list)
    transition_flows: list[tuple[str, str, int]] = field(default_factory=list)


def sequence_stats(events: Sequence[Event]) -> SequenceStats:
    """Pair-level pattern counts plus the flow-graph export.

    Presence counts a type once per pair; the majority type requires a
    strict plurality. Flows include virtual start/end nodes so the export
    can draw complete paths.
    """
    sequences = pair_sequences(events)
    present: Counter = Counter()
    first: Counter = Counter()
    majority: Counter = Counter()
    totals: Counter = Counter()
    frequency: Counter = Counter()
    flows: Counter = Counter()

    for sequence in sequences.values():
        summary = summarize_sequence(sequence)
        for t in summary.types_present:
            present[t.value] += 1
        if summary.first_type is not None:
            first[summary.first_type.value] += 1
        if summary.majority_type is not None:
            majority[summary.majority_type.value] += 1
        for t in sequence:
            totals[t.value] += 1
        frequency[tuple(t.value for t in sequence)] += 1
        path = [FLOW_START] + [t.value for t in sequence] + [FLOW_END]
        for source, target in zip(path, path[1:]):
            flows[(source, target)] += 1

    return SequenceStats(
        n_pairs=len(sequences),
        total_hints=sum(totals.values()),
        type_totals={t.value: totals.get(t.value, 0) for t in HintType},
        present_counts={t.value: present.get(t.value, 0) for t in HintType},
        first_counts={t.value: first.get(t.value, 0) for t in HintType},
        majority_counts={t.value: majority.get(t.value, 0) for t in HintType},
        sequence_frequency=sorted(
            frequency.items(), key=lambda item: (-item[1], item[0])
        ),
        transition_flows=sorted(
            ((s, t, c) for (s, t), c in flows.items()),
            key=lambda row: (-row[2], row[0], row[1]),
        ),
    )


@dataclass(frozen=True)
class IsolatedFraction:
    fraction: float
    isolated: int
    total: int
    undefined: bool = False  # no hints of this type at all


def isolated_type_fraction(events: Sequence[Event], hint_type: HintType) -> IsolatedFraction:
    """Share of this type's hints that occur in single-type sequences."""
    sequences = pair_sequences(events)
    total = 0
    isolated = 0
    for sequence in sequences.values():
        count = sum(1 for t in sequence if t is hint_type)
        total += count
        if count and set(sequence) == {hint_type}:
            isolated += count
    if total == 0:
        return IsolatedFraction(fraction=0.0, isolated=0, total=0, undefined=True)
    return IsolatedFraction(fraction=isolated / total, isolated=isolated, total=total)


def sequence_flow_export(stats: SequenceStats) -> dict:
    """Node/link document for a sequence-flow figure."""
    nodes = [FLOW_START] + [t.value for t in HintType] + [FLOW_END]
    used = {s for s, _, _ in stats.transition_flows} | {
        t for _, t, _ in stats.transition_flows
    }
    return {
        "nodes": [n for n in nodes if n in used],
        "links": [
            {"source": source, "target": target, "count": count}
            for source, target, count in stats.transition_flows
        ],
    }


def per_question_type_counts(events: Sequence[Event]) -> list[dict]:
    """Stacked per-question hint counts plus how many students asked at all."""
    per_question: dict[str, Counter] = defaultdict(Counter)
    students: dict[str, set[str]] = defaultdict(set)
    for event in events:
        if EventKind(event.kind) is EventKind.HINT_DELIVERED:
            qid = event.payload["question_id"]
            per_question[qid][event.payload["hint_type"]] += 1
            students[qid].add(event.payload["student_id"])
    rows = []
    for qid in sorted(per_question):
        counts = per_question[qid]
        rows.append(
            {
                "question_id": qid,
                **{t.value: counts.get(t.value, 0) for t in HintType},
                "total": sum(counts.values()),
                "students_with_hints": len(students[qid]),
            }
        )
    return rows


# --- difficulty and competency labels ------------------------------------------------


@dataclass(frozen=True)
class DifficultyLabels:
    labels: dict[str, str]
    tie_assignments: tuple[str, ...] = ()

    def questions_with(self, label: str) -> set[str]:
        return {q for q, l in self.labels.items() if l == label}


def estimate_difficulty(
    past_scores: Mapping[str, float],
    assignments: Mapping[str, Sequence[str]],
    group_size: int = 1,
) -> DifficultyLabels:
    """Label each assignment's top/bottom questions by past mean score.

    The highest-scored question(s) per assignment become "easier", the
    lowest "harder", everything else "unlabeled". Score ties resolve to the
    lexicographically smaller id and flag the assignment.
    """
    labels: dict[str, str] = {}
    ties: list[str] = []
    for assignment, questions in assignments.items():
        scored = sorted(q for q in questions if q in past_scores)
        if len(scored) < 2:
            raise InsufficientData(
                f"assignment {assignment} needs at least two scored questions"
            )
        by_score_asc = sorted(scored, key=lambda q: (past_scores[q], q))
        by_score_desc = sorted(scored, key=lambda q: (-past_scores[q], q))
        harder = by_score_asc[:group_size]
        easier = [q for q in by_score_desc if q not in set(harder)][:group_size]
        scores = sorted(past_scores[q] for q in scored)
        if scores.count(scores[0]) > group_size or scores.count(scores[-1]) > group_size:
            ties.append(assignment)
        for q in scored:
            labels[q] = LABEL_UNLABELED
        for q in easier:
            labels[q] = LABEL_EASIER
        for q in harder:
            labels[q] = LABEL_HARDER
    return DifficultyLabels(labels=labels, tie_assignments=tuple(sorted(ties)))


@dataclass(frozen=True)
class CompetencyLabels:
    labels: dict[str, str]
    attempts: dict[str, int]
    boundary_tie: bool = False


def estimate_competency(
    events: Sequence[Event],
    config: AnalyticsConfig,
    assignment_map: Mapping[str, str],
) -> CompetencyLabels:
    """Rank students by attempts to solve the proxy assignment; label thirds.

    Attempts count submissions per proxy question up to and including the
    first perfect score (all of them when never solved). Students who solved
    every proxy question rank first, by ascending attempts; the rest follow
    by solved count descending, then attempts. Metric ties across the group
    boundary push the tied students to the middle and set the flag.
    """
    proxy_questions = {
        q for q, a in assignment_map.items() if a == config.competency_excluded_assignment
    }
    students = sorted(log_students(events))
    submissions: dict[str, dict[str, list[float]]] = defaultdict(lambda: defaultdict(list))
    for event in events:
        if EventKind(event.kind) is EventKind.SUBMISSION_MADE:
            qid = event.payload["question_id"]
            if qid in proxy_questions:
                submissions[event.payload["student_id"]][qid].append(
                    float(event.payload["score"])
                )

    metrics: dict[str, tuple[int, int]] = {}
    attempts_by_student: dict[str, int] = {}
    for student in students:
        solved = 0
        attempts = 0
        for qid in proxy_questions:
            scores = submissions.get(student, {}).get(qid, [])
            if 1.0 in scores:
                solved += 1
                attempts += scores.index(1.0) + 1
            else:
                attempts += len(scores)
        metrics[student] = (len(proxy_questions) - solved, attempts)
        attempts_by_student[student] = attempts

    ranked = sorted(students, key=lambda s: (metrics[s], s))
    n = len(ranked)
    k = int(config.competency_fraction * n)
    labels = {s: LABEL_MIDDLE for s in students}
    boundary_tie = False

    if k > 0:
        higher = ranked[:k]
        if k < n and metrics[ranked[k - 1]] == metrics[ranked[k]]:
            tied = metrics[ranked[k - 1]]
            higher = [s for s in higher if metrics[s] != tied]
            boundary_tie = True
        for s in higher:
            labels[s] = LABEL_HIGHER

        lower = ranked[n - k :]
        if n - k - 1 >= 0 and metrics[ranked[n - k]] == metrics[ranked[n - k - 1]]:
            tied = metrics[ranked[n - k]]
            lower = [s for s in lower if metrics[s] != tied]
            boundary_tie = True
        for s in lower:
            labels[s] = LABEL_LOWER

    return CompetencyLabels(
        labels=labels, attempts=attempts_by_student, boundary_tie=boundary_tie
    )


# --- performance breakdowns -----------------------------------------------------------


def performance_breakdown(
    events: Sequence[Event],
    label: str = "all",
    pairs: set[tuple[str, str]] | None = None,
    universe: str = "cross",
) -> dict:
    """Five-bar solving-rate report: no hint, any hint, and each type present.

    The pair universe is every observed student crossed with every observed
    question ("cross", the default) or only pairs with activity ("active");
    an explicit ``pairs`` set restricts either. Pairs without a perfect
    submission count as unsolved. Each hint group is tested against the
    no-hint group with a 2x2 chi-square; markers flag p < 0.05 (*) and
    p < 0.01 (**). Empty groups come back with n = 0 and no rate.
    """
    sequences = pair_sequences(events)
    solved_pairs = {
        key
        for key, state in replay_events(
            events, policy=QuotaPolicy(max_hints_per_question=10**9)
        ).items()
        if state.solved
    }
    if universe == "cross":
        population = {
            (s, q) for s in log_students(events) for q in log_questions(events)
        }
    elif universe == "active":
        population = set(sequences) | solved_pairs | {
            (e.payload["student_id"], e.payload["question_id"])
            for e in events
            if EventKind(e.kind) is EventKind.SUBMISSION_MADE
        }
    else:
        raise ValueError(f"unknown universe {universe!r}")
    if pairs is not None:
        population &= pairs

    def stats_for(members: set[tuple[str, str]]) -> tuple[int, int]:
        return len(members), sum(1 for m in members if m in solved_pairs)

    groups: dict[str, set[tuple[str, str]]] = {
        GROUP_NO_HINT: {p for p in population if not sequences.get(p)},
        GROUP_ANY_HINT: {p for p in population if sequences.get(p)},
    }
    for t in HintType:
        groups[f"{t.value}-present"] = {
            p for p in population if t in set(sequences.get(p, []))
        }

    no_n, no_solved = stats_for(groups[GROUP_NO_HINT])
    rows = []
    for name, members in groups.items():
        n, solved = stats_for(members)
        row: dict = {"name": name, "n": n, "solved": solved}
        if n > 0:
            rate = solved / n
            row["rate"] = rate
            row["se"] = binomial_se(rate, n)
        if name != GROUP_NO_HINT and n > 0 and no_n > 0:
            table = [[solved, n - solved], [no_solved, no_n - no_solved]]
            try:
                result = chi_square_independence(table)
                row["chi2"] = result.statistic
                row["p_vs_no_hint"] = result.p_value
                if result.p_value < 0.01:
                    row["marker"] = "**"
                elif result.p_value < 0.05:
                    row["marker"] = "*"
                else:
                    row["marker"] = ""
            except ZeroExpectedCount as exc:
                row["note"] = str(exc)
        rows.append(row)

    total_n, total_solved = stats_for(population)
    return {
        "label": label,
        "n_pairs": total_n,
        "overall_rate": (total_solved / total_n) if total_n else None,
        "groups": rows,
    }
