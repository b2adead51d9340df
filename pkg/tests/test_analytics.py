from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crosstutor.analytics import (
    Method,
    PairedScores,
    delta_table,
    round_half_up,
    study_summary,
    summarize_likert,
    wilcoxon_signed_rank,
)
from crosstutor.engine import ScoreReport
from crosstutor.errors import LengthMismatch
from crosstutor.model import Question, QuestionKind


def pairs_from_diffs(diffs):
    return PairedScores(
        tuple(f"p{i}" for i in range(len(diffs))),
        tuple(0 for _ in diffs),
        tuple(diffs),
    )


def brute_force_two_sided_p(diffs):
    """Independent oracle: enumerate all sign assignments literally."""
    nonzero = [abs(d) for d in diffs if d != 0]
    n = len(nonzero)
    ordered = sorted(range(n), key=lambda i: nonzero[i])
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and nonzero[ordered[j + 1]] == nonzero[ordered[i]]:
            j += 1
        for k in range(i, j + 1):
            ranks[ordered[k]] = (i + j + 2) / 2
        i = j + 1
    mean = n * (n + 1) / 4
    observed = abs(sum(r for r, d in zip(ranks, (d for d in diffs if d != 0)) if d > 0) - mean)
    count = 0
    for signs in itertools.product((False, True), repeat=n):
        w_plus = sum(r for r, positive in zip(ranks, signs) if positive)
        if abs(w_plus - mean) >= observed:
            count += 1
    return count / 2**n


# --- signed rank ------------------------------------------------------------

def test_twenty_positive_differences_reproduce_reference_statistic():
    pairs = PairedScores(
        tuple(f"p{i}" for i in range(20)),
        tuple(0 for _ in range(20)),
        tuple(range(1, 21)),
    )
    result = wilcoxon_signed_rank(pairs)
    assert result.statistic_s == 105.0
    assert result.p_value == 2 / 2**20
    assert result.p_value < 0.0001
    assert result.method is Method.EXACT
    assert result.n_nonzero == 20
    assert result.significant


def test_opposite_unit_differences_cancel():
    result = wilcoxon_signed_rank(pairs_from_diffs([1, -1]))
    assert result.statistic_s == 0.0
    assert result.p_value == 1.0


def test_three_positive_differences():
    result = wilcoxon_signed_rank(pairs_from_diffs([1, 2, 3]))
    assert result.statistic_s == 3.0
    assert result.p_value == 0.25


def test_all_zero_differences_degenerate():
    result = wilcoxon_signed_rank(pairs_from_diffs([0, 0, 0]))
    assert result.degenerate
    assert result.statistic_s == 0.0
    assert result.p_value == 1.0
    assert result.method is Method.EXACT
    assert result.n_nonzero == 0
    assert not result.significant


def test_zero_differences_discarded_before_ranking():
    with_zeros = wilcoxon_signed_rank(pairs_from_diffs([0, 1, 2, 0, 3]))
    without = wilcoxon_signed_rank(pairs_from_diffs([1, 2, 3]))
    assert with_zeros.statistic_s == without.statistic_s
    assert with_zeros.p_value == without.p_value
    assert with_zeros.n_nonzero == 3


def test_ties_use_midranks():
    result = wilcoxon_signed_rank(pairs_from_diffs([2, 2, -2]))
    # ranks are all 2; W+ = 4, centered by 3
    assert result.statistic_s == 1.0
    assert result.p_value == brute_force_two_sided_p([2, 2, -2])


def test_exact_matches_brute_force_on_random_inputs():
    rng = random.Random(20240)
    for _ in range(60):
        n = rng.randint(1, 9)
        diffs = [rng.randint(-4, 4) for _ in range(n)]
        if not any(diffs):
            continue
        result = wilcoxon_signed_rank(pairs_from_diffs(diffs))
        assert result.p_value == brute_force_two_sided_p(diffs)


def test_large_samples_use_normal_approximation():
    diffs = [i % 5 + 1 for i in range(30)]
    result = wilcoxon_signed_rank(pairs_from_diffs(diffs))
    assert result.method is Method.NORMAL_APPROX
    assert 0.0 <= result.p_value <= 1.0
    assert result.significant


def test_normal_variance_matches_closed_form():
    # sum(r^2)/4 over midranks equals n(n+1)(2n+1)/24 - sum(t^3 - t)/48.
    import math

    diffs = [1, 1, 2, 2, 2, 3, 5, 5] * 4  # n=32, heavy ties
    result = wilcoxon_signed_rank(pairs_from_diffs(diffs))
    n = len(diffs)
    counts = {1: 8, 2: 12, 3: 4, 5: 8}
    variance = n * (n + 1) * (2 * n + 1) / 24 - sum(t**3 - t for t in counts.values()) / 48
    w_plus = n * (n + 1) / 2  # all positive
    expected_z = (w_plus - n * (n + 1) / 4) / math.sqrt(variance)
    assert result.p_value == min(1.0, math.erfc(abs(expected_z) / math.sqrt(2)))


def test_pratt_ranks_zeros_before_dropping_them():
    # discard: ranks of [1, 2] -> W+ = 3, S = 1.5
    # pratt: ranks of [0, 1, 2] = [1, 2, 3]; zeros drop out -> W+ = 5, S = 2.5
    discard = wilcoxon_signed_rank(pairs_from_diffs([0, 1, 2]))
    pratt = wilcoxon_signed_rank(pairs_from_diffs([0, 1, 2]), zero_handling="pratt")
    assert discard.statistic_s == 1.5
    assert pratt.statistic_s == 2.5
    assert discard.n_nonzero == pratt.n_nonzero == 2


def test_pratt_equals_discard_without_zeros():
    diffs = [3, -1, 2, 2, -4]
    a = wilcoxon_signed_rank(pairs_from_diffs(diffs))
    b = wilcoxon_signed_rank(pairs_from_diffs(diffs), zero_handling="pratt")
    assert (a.statistic_s, a.p_value) == (b.statistic_s, b.p_value)


def test_pratt_exact_matches_brute_force():
    def brute(diffs):
        mags = [abs(d) for d in diffs]
        order = sorted(range(len(diffs)), key=lambda i: mags[i])
        ranks = [0.0] * len(diffs)
        i = 0
        while i < len(order):
            j = i
            while j + 1 < len(order) and mags[order[j + 1]] == mags[order[i]]:
                j += 1
            for k in range(i, j + 1):
                ranks[order[k]] = (i + j + 2) / 2
            i = j + 1
        kept = [(r, d) for r, d in zip(ranks, diffs) if d != 0]
        center = sum(r for r, _ in kept) / 2
        observed = abs(sum(r for r, d in kept if d > 0) - center)
        hits = 0
        for signs in itertools.product((False, True), repeat=len(kept)):
            w_plus = sum(r for (r, _), s in zip(kept, signs) if s)
            if abs(w_plus - center) >= observed:
                hits += 1
        return hits / 2 ** len(kept)

    rng = random.Random(77)
    for _ in range(60):
        diffs = [rng.randint(-3, 3) for _ in range(rng.randint(1, 9))]
        if not any(diffs):
            continue
        result = wilcoxon_signed_rank(pairs_from_diffs(diffs), zero_handling="pratt")
        assert result.p_value == brute(diffs), diffs


def test_unknown_zero_handling_rejected():
    with pytest.raises(ValueError):
        wilcoxon_signed_rank(pairs_from_diffs([1]), zero_handling="wilcox")


@settings(max_examples=150, deadline=None)
@given(st.lists(st.integers(min_value=-7, max_value=7), min_size=1, max_size=40))
def test_antisymmetry(diffs):
    forward = wilcoxon_signed_rank(pairs_from_diffs(diffs))
    backward = wilcoxon_signed_rank(pairs_from_diffs([-d for d in diffs]))
    assert forward.statistic_s == -backward.statistic_s
    assert forward.p_value == backward.p_value


def test_length_mismatch_rejected():
    with pytest.raises(LengthMismatch):
        PairedScores(("a",), (1,), (1, 2))


# --- delta table --------------------------------------------------------------

QUESTIONS = [
    Question(f"q{i}", f"prompt {i}", QuestionKind.SINGLE_CHOICE, ("a", "b"), frozenset({0}))
    for i in range(1, 4)
]


def report(*credits):
    per = {f"q{i + 1}": c for i, c in enumerate(credits)}
    return ScoreReport(per, sum(credits))


def test_identical_reports_give_zero_deltas():
    reports = [report(1, 0, 1), report(0, 0, 1)]
    table = delta_table(reports, reports, QUESTIONS)
    assert table.deltas() == (0, 0, 0)
    assert table.pre_totals() == (1, 0, 2)


def test_single_participant_single_gain():
    table = delta_table([report(0, 0, 0)], [report(0, 1, 0)], QUESTIONS)
    assert table.pre_totals() == (0, 0, 0)
    assert table.deltas() == (0, 1, 0)


def test_mismatched_report_counts_rejected():
    with pytest.raises(LengthMismatch):
        delta_table([report(1, 1, 1)], [], QUESTIONS)


def test_column_sums_invariant_under_reordering():
    pre = [report(1, 0, 0), report(0, 1, 0), report(0, 0, 1)]
    post = [report(1, 1, 0), report(1, 1, 0), report(0, 1, 1)]
    table = delta_table(pre, post, QUESTIONS)
    shuffled = delta_table(pre[::-1], post[::-1], QUESTIONS)
    assert table == shuffled


# --- Likert ---------------------------------------------------------------------

def test_percent_agree_formula():
    summary = summarize_likert({"s1": (0, 0, 1, 5, 14)})
    assert summary.rows[0].percent_agree == 95
    assert summary.rows[0].net_stacked == {"SD": 0, "D": 0, "A": 25, "SA": 70}


def test_percent_agree_uses_all_recorded_responses():
    summary = summarize_likert({"s2": (0, 1, 3, 2, 14)})
    assert summary.rows[0].percent_agree == 80


def test_all_neutral_gives_empty_bar():
    summary = summarize_likert({"s": (0, 0, 20, 0, 0)})
    row = summary.rows[0]
    assert row.percent_agree == 0
    assert row.net_stacked == {"SD": 0, "D": 0, "A": 0, "SA": 0}


def test_negative_counts_rejected():
    with pytest.raises(ValueError):
        summarize_likert({"s": (0, -1, 0, 0, 0)})


def test_round_half_up():
    assert round_half_up(0.5) == 1
    assert round_half_up(1.5) == 2
    assert round_half_up(2.4) == 2
    assert round_half_up(2.5) == 3
    assert round_half_up(79.5) == 80


# --- aggregation ------------------------------------------------------------------

def test_study_summary_over_cohort(pack, cohort):
    summary = study_summary(cohort, pack)
    assert summary["participants"] == 20
    assert [r["pre_correct"] for r in summary["delta_table"]] == [0, 13, 0, 10, 0, 0, 0]
    assert [r["delta"] for r in summary["delta_table"]] == [18, 2, 20, 3, 20, 18, 1]
    assert summary["signed_rank"]["S"] == 105.0
    assert summary["signed_rank"]["p_value"] < 0.0001
