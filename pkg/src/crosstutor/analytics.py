"""Quantitative analysis of study results.

Three pieces: the Wilcoxon signed-rank test on paired totals, per-question
pre/post delta tables, and Likert response summaries with net stacked
percentages.

Signed-rank conventions, all deliberate and locked by tests:

* zero differences are discarded before ranking (Pratt-style handling,
  which ranks zeros first and then drops their ranks, is available behind
  ``zero_handling="pratt"`` but stays off by default);
* tied absolute differences receive midranks;
* the reported statistic is centered: S = W+ - n(n+1)/4 over the n nonzero
  differences, so 20 positive differences give S = 105;
* the two-sided p-value is exact (full enumeration over sign assignments,
  computed by subset-sum counting) for n <= 25, and a tie-corrected normal
  approximation beyond that;
* integer percentages round half up.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Mapping, Sequence

from .engine import Phase, ScoreReport, Session, score_test
from .errors import LengthMismatch
from .model import LessonPack, Question

DEFAULT_ALPHA = 0.05
EXACT_LIMIT = 25

LIKERT_LABELS = ("SD", "D", "N", "A", "SA")


class Method(str, Enum):
    EXACT = "exact"
    NORMAL_APPROX = "normal-approx"


@dataclass(frozen=True)
class PairedScores:
    participants: tuple[str, ...]
    pre: tuple[int, ...]
    post: tuple[int, ...]

    def __post_init__(self) -> None:
        if not (len(self.participants) == len(self.pre) == len(self.post)):
            raise LengthMismatch(
                f"paired scores need equal lengths, got {len(self.participants)}/"
                f"{len(self.pre)}/{len(self.post)}"
            )


@dataclass(frozen=True)
class StatResult:
    statistic_s: float
    p_value: float
    n_nonzero: int
    method: Method
    alpha: float
    significant: bool
    degenerate: bool = False


@dataclass(frozen=True)
class DeltaRow:
    question_id: str
    pre_correct: int
    delta: int


@dataclass(frozen=True)
class DeltaTable:
    rows: tuple[DeltaRow, ...]

    def pre_totals(self) -> tuple[int, ...]:
        return tuple(r.pre_correct for r in self.rows)

    def deltas(self) -> tuple[int, ...]:
        return tuple(r.delta for r in self.rows)


@dataclass(frozen=True)
class LikertRow:
    statement_id: str
    counts: tuple[int, int, int, int, int]  # SD, D, N, A, SA
    percent_agree: int
    net_stacked: dict[str, int]  # SD/D/A/SA -> percent of all responses


@dataclass(frozen=True)
class LikertSummary:
    rows: tuple[LikertRow, ...]


def round_half_up(value: float) -> int:
    return math.floor(value + 0.5)


# --- signed rank ---------------------------------------------------------

def _midranks(values: Sequence[float]) -> list[float]:
    """Ranks of |values| with ties sharing the average of their positions."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        rank = (i + j + 2) / 2  # positions are 1-based
        for k in range(i, j + 1):
            ranks[order[k]] = rank
        i = j + 1
    return ranks


def _exact_two_sided_p(doubled_ranks: Sequence[int], s_obs_x4: int) -> float:
    """P(|S| >= |s_obs|) under random signs, by subset-sum counting.

    Works in integers: doubled midranks are whole numbers, and with
    T = sum(doubled_ranks), 4*S for a sign assignment with doubled positive
    rank sum s2 is 2*s2 - T.
    """
    total = sum(doubled_ranks)
    ways = [0] * (total + 1)
    ways[0] = 1
    for r in doubled_ranks:
        for s in range(total, r - 1, -1):
            if ways[s - r]:
                ways[s] += ways[s - r]
    threshold = abs(s_obs_x4)
    count = sum(w for s2, w in enumerate(ways) if abs(2 * s2 - total) >= threshold)
    return count / (1 << len(doubled_ranks))


def wilcoxon_signed_rank(
    pairs: PairedScores,
    alpha: float = DEFAULT_ALPHA,
    *,
    zero_handling: str = "discard",
) -> StatResult:
    """Two-sided signed-rank test of post vs pre totals.

    ``zero_handling="discard"`` (the default, and the convention the golden
    values are pinned to) drops zero differences before ranking.
    ``"pratt"`` ranks them along with everything else and only then removes
    their ranks from the sums.
    """
    if zero_handling not in ("discard", "pratt"):
        raise ValueError(f"unknown zero_handling {zero_handling!r}")
    diffs = [post - pre for pre, post in zip(pairs.pre, pairs.post)]
    nonzero = [d for d in diffs if d != 0]
    n = len(nonzero)
    if n == 0:
        return StatResult(0.0, 1.0, 0, Method.EXACT, alpha, False, degenerate=True)

    if zero_handling == "discard":
        ranks = _midranks([abs(d) for d in nonzero])
    else:
        all_ranks = _midranks([abs(d) for d in diffs])
        ranks = [r for r, d in zip(all_ranks, diffs) if d != 0]

    w_plus = sum(r for r, d in zip(ranks, nonzero) if d > 0)
    s = w_plus - sum(ranks) / 2

    if n <= EXACT_LIMIT:
        doubled = [int(round(2 * r)) for r in ranks]
        s_obs_x4 = 2 * sum(r for r, d in zip(doubled, nonzero) if d > 0) - sum(doubled)
        p = _exact_two_sided_p(doubled, s_obs_x4)
        method = Method.EXACT
    else:
        # Signs are independent under H0, so Var(W+) = sum(r^2)/4; with
        # midranks this equals the classical tie-corrected formula.
        variance = sum(r * r for r in ranks) / 4
        z = s / math.sqrt(variance)
        p = min(1.0, math.erfc(abs(z) / math.sqrt(2)))
        method = Method.NORMAL_APPROX

    return StatResult(s, p, n, method, alpha, p < alpha)


# --- delta table ----------------------------------------------------------

def delta_table(
    pre_reports: Sequence[ScoreReport],
    post_reports: Sequence[ScoreReport],
    key: Sequence[Question],
) -> DeltaTable:
    """Per-question pre-correct totals and post-minus-pre deltas."""
    if len(pre_reports) != len(post_reports):
        raise LengthMismatch(
            f"{len(pre_reports)} pre reports vs {len(post_reports)} post reports"
        )
    rows = []
    for question in key:
        pre_correct = sum(r.per_question.get(question.id, 0) for r in pre_reports)
        post_correct = sum(r.per_question.get(question.id, 0) for r in post_reports)
        rows.append(DeltaRow(question.id, pre_correct, post_correct - pre_correct))
    return DeltaTable(tuple(rows))


# --- Likert ----------------------------------------------------------------

def summarize_likert(
    responses: Mapping[str, Sequence[int]] | Sequence[tuple[str, Sequence[int]]],
) -> LikertSummary:
    """Summarize per-statement level counts (SD, D, N, A, SA).

    percent_agree is (A+SA)/total; net stacked percentages put every
    non-neutral category over the same all-responses denominator, which is
    what makes the bars comparable across statements.
    """
    items = responses.items() if isinstance(responses, Mapping) else responses
    rows = []
    for statement_id, counts in items:
        counts = tuple(int(c) for c in counts)
        if len(counts) != 5 or any(c < 0 for c in counts):
            raise ValueError(f"{statement_id}: counts must be five non-negative integers")
        total = sum(counts)
        sd, d, _, a, sa = counts
        agree = round_half_up(100 * (a + sa) / total) if total else 0
        net = {
            "SD": round_half_up(100 * sd / total) if total else 0,
            "D": round_half_up(100 * d / total) if total else 0,
            "A": round_half_up(100 * a / total) if total else 0,
            "SA": round_half_up(100 * sa / total) if total else 0,
        }
        rows.append(LikertRow(statement_id, counts, agree, net))
    return LikertSummary(tuple(rows))


# --- aggregation over finished sessions -------------------------------------

def completed_sessions(sessions: Sequence[Session], pack: LessonPack) -> list[Session]:
    done = [s for s in sessions if s.phase is Phase.DONE and s.pack_id == pack.id]
    done.sort(key=lambda s: s.participant)
    return done


def paired_scores_from_sessions(sessions: Sequence[Session], pack: LessonPack) -> PairedScores:
    done = completed_sessions(sessions, pack)
    pre = [score_test(s.answers["pretest"], pack.pretest).total for s in done]
    post = [score_test(s.answers["posttest"], pack.posttest).total for s in done]
    return PairedScores(tuple(s.participant for s in done), tuple(pre), tuple(post))


def likert_counts_from_sessions(
    sessions: Sequence[Session], pack: LessonPack
) -> list[tuple[str, tuple[int, int, int, int, int]]]:
    done = completed_sessions(sessions, pack)
    out = []
    for statement in pack.survey:
        counts = [0, 0, 0, 0, 0]
        for s in done:
            level = s.survey_responses.get(statement.id)
            if level is not None:
                counts[level - 1] += 1
        out.append((statement.id, tuple(counts)))
    return out


def study_summary(
    sessions: Sequence[Session],
    pack: LessonPack,
    alpha: float = DEFAULT_ALPHA,
    *,
    zero_handling: str = "discard",
) -> dict[str, Any]:
    """Full analysis payload for a set of finished sessions."""
    done = completed_sessions(sessions, pack)
    pre_reports = [score_test(s.answers["pretest"], pack.pretest) for s in done]
    post_reports = [score_test(s.answers["posttest"], pack.posttest) for s in done]
    table = delta_table(pre_reports, post_reports, pack.pretest)
    pairs = PairedScores(
        tuple(s.participant for s in done),
        tuple(r.total for r in pre_reports),
        tuple(r.total for r in post_reports),
    )
    stat = wilcoxon_signed_rank(pairs, alpha, zero_handling=zero_handling) if done else None
    likert = summarize_likert(likert_counts_from_sessions(sessions, pack))
    payload: dict[str, Any] = {
        "pack_id": pack.id,
        "participants": len(done),
        "delta_table": [
            {"question_id": r.question_id, "pre_correct": r.pre_correct, "delta": r.delta}
            for r in table.rows
        ],
        "signed_rank": None if stat is None else {
            "S": stat.statistic_s,
            "p_value": stat.p_value,
            "n_nonzero": stat.n_nonzero,
            "method": stat.method.value,
            "alpha": stat.alpha,
            "significant": stat.significant,
            "degenerate": stat.degenerate,
        },
        "likert": [
            {
                "statement_id": r.statement_id,
                "counts": dict(zip(LIKERT_LABELS, r.counts)),
                "percent_agree": r.percent_agree,
                "net_stacked": r.net_stacked,
            }
            for r in likert.rows
        ],
    }
    return payload


def render_summary_text(summary: dict[str, Any]) -> str:
    """Human-readable rendering of a study summary payload."""
    lines = [
        f"pack: {summary['pack_id']}",
        f"completed sessions: {summary['participants']}",
        "",
        "question    pre-correct    delta",
    ]
    for row in summary["delta_table"]:
        lines.append(f"{row['question_id']:<12}{row['pre_correct']:>11}{row['delta']:>9}")
    stat = summary["signed_rank"]
    lines.append("")
    if stat is None:
        lines.append("signed-rank: no completed sessions")
    elif stat["degenerate"]:
        lines.append("signed-rank: all differences zero (S=0, p=1)")
    else:
        lines.append(
            f"signed-rank: S = {stat['S']:g}, p = {stat['p_value']:.3g} "
            f"({stat['method']}, n = {stat['n_nonzero']})"
        )
        verdict = "significant" if stat["significant"] else "not significant"
        lines.append(f"  {verdict} at alpha = {stat['alpha']:g}")
    lines.append("")
    lines.append("statement   SD   D   N   A  SA   %agree   net(SD/D/A/SA)")
    for row in summary["likert"]:
        c = row["counts"]
        net = row["net_stacked"]
        lines.append(
            f"{row['statement_id']:<10}{c['SD']:>4}{c['D']:>4}{c['N']:>4}{c['A']:>4}{c['SA']:>4}"
            f"{row['percent_agree']:>8}%   -{net['SD']}/-{net['D']}/+{net['A']}/+{net['SA']}"
        )
    return "\n".join(lines)
