"""Descriptive and inferential statistics over text-input records.

Reproduces the analysis conventions of the study pipeline: per-group
mean/SD of words per input and dictionary matching rates, the long-tail
report over prompt frequencies, and the Kruskal-Wallis rank sum test with
Dunn's post-hoc comparisons under Bonferroni adjustment.

All floating-point accumulation goes through ``math.fsum`` so that results
are independent of record order and of how partial aggregations are merged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Literal, Optional, Sequence

from .model import (
    EmptyGroupError,
    Motive,
    REDACTED,
    TextInputRecord,
    TooFewGroupsError,
)
from .special import chi2_sf, normal_sf

GroupBy = Literal["motive", "app_category"]


@dataclass(frozen=True, slots=True)
class GroupStats:
    """n, mean (M) and sample standard deviation (SD) for one selection."""

    label: str
    n: int
    mean: float
    sd: float


def mean_sd(values: Sequence[float]) -> tuple[float, float]:
    """Mean and sample (n-1) standard deviation; SD is 0 for n = 1."""
    n = len(values)
    if n == 0:
        raise EmptyGroupError("cannot summarize an empty group")
    mean = math.fsum(values) / n
    if n == 1:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var)


def _group_label(record: TextInputRecord, group_by: GroupBy) -> Optional[str]:
    if group_by == "motive":
        return record.motive.value
    return record.app_category


def _grouped(
    records: Iterable[TextInputRecord],
    group_by: GroupBy,
    value_of,
) -> dict[str, list[float]]:
    groups: dict[str, list[float]] = {}
    for record in records:
        label = _group_label(record, group_by)
        if label is None:
            continue
        value = value_of(record)
        if value is None:
            continue
        groups.setdefault(label, []).append(value)
    return groups


def words_per_input_stats(
    records: Iterable[TextInputRecord],
    group_by: GroupBy = "motive",
) -> list[GroupStats]:
    """Per-group mean/SD of total words (added + changed) per text input."""
    groups = _grouped(records, group_by, lambda r: float(r.total_words))
    return [
        GroupStats(label, len(vals), *mean_sd(vals))
        for label, vals in sorted(groups.items())
    ]


def matching_rate_stats(
    records: Iterable[TextInputRecord],
    group_by: GroupBy = "motive",
) -> list[GroupStats]:
    """Per-group mean/SD of the per-record dictionary matching rate.

    The rate is matched/(added+changed) per record; zero-word records are
    excluded (they have no rate). Averaging per-record rates rather than
    pooling word counts is what gives an SD across inputs.
    """
    groups = _grouped(
        records,
        group_by,
        lambda r: r.matched_words / r.total_words if r.total_words > 0 else None,
    )
    return [
        GroupStats(label, len(vals), *mean_sd(vals))
        for label, vals in sorted(groups.items())
    ]


def _midranks(groups: Sequence[Sequence[float]]) -> tuple[list[list[float]], list[int]]:
    """Pooled midranks per group plus the tie-run sizes."""
    pooled: list[tuple[float, int]] = []
    for gi, values in enumerate(groups):
        pooled.extend((v, gi) for v in values)
    pooled.sort(key=lambda t: t[0])
    n = len(pooled)
    ranks: list[list[float]] = [[] for _ in groups]
    tie_sizes: list[int] = []
    i = 0
    while i < n:
        j = i
        while j < n and pooled[j][0] == pooled[i][0]:
            j += 1
        midrank = (i + j + 1) / 2.0  # ranks are 1-based
        if j - i > 1:
            tie_sizes.append(j - i)
        for k in range(i, j):
            ranks[pooled[k][1]].append(midrank)
        i = j
    return ranks, tie_sizes


def _check_groups(groups: Sequence[Sequence[float]]) -> None:
    if len(groups) < 2:
        raise TooFewGroupsError("need at least two groups")
    for i, g in enumerate(groups):
        if len(g) == 0:
            raise EmptyGroupError(f"group {i} is empty")


@dataclass(frozen=True, slots=True)
class PairwiseComparison:
    group_a: int
    group_b: int
    z: float
    p_raw: float
    p_adjusted: float


@dataclass(frozen=True, slots=True)
class KwDunnResult:
    h: float
    df: int
    p: float
    pairwise: tuple[PairwiseComparison, ...] = ()


def kruskal_wallis(groups: Sequence[Sequence[float]]) -> KwDunnResult:
    """Kruskal-Wallis rank sum test with midrank ties and tie correction.

    H is divided by 1 - sum(t^3 - t) / (N^3 - N); when every value is
    identical the correction is degenerate and the test returns H = 0,
    p = 1. The p-value is the chi-square survival function at df = k - 1.
    """
    _check_groups(groups)
    ranks, tie_sizes = _midranks(groups)
    n = sum(len(g) for g in groups)
    h = 12.0 / (n * (n + 1)) * math.fsum(
        math.fsum(r) ** 2 / len(r) for r in ranks
    ) - 3.0 * (n + 1)
    correction = 1.0 - math.fsum(t**3 - t for t in tie_sizes) / (n**3 - n)
    df = len(groups) - 1
    if correction <= 0.0:
        return KwDunnResult(h=0.0, df=df, p=1.0)
    h /= correction
    if h < 0.0:  # guard against tiny negative rounding residue
        h = 0.0
    return KwDunnResult(h=h, df=df, p=chi2_sf(h, df))


def dunn_posthoc(
    groups: Sequence[Sequence[float]],
    adjust: Literal["bonferroni"] = "bonferroni",
) -> list[PairwiseComparison]:
    """Dunn's (1964) post-hoc z tests on the pooled midranks.

    z_ab = (rbar_a - rbar_b) / sqrt((N(N+1)/12 - T)(1/n_a + 1/n_b)) with the
    tie term T = sum(t^3 - t) / (12(N - 1)); two-sided p from the normal
    survival function, Bonferroni-multiplied by the number of comparisons
    and capped at 1.
    """
    if adjust != "bonferroni":
        raise ValueError(f"unsupported adjustment: {adjust}")
    _check_groups(groups)
    ranks, tie_sizes = _midranks(groups)
    n = sum(len(g) for g in groups)
    tie_term = math.fsum(t**3 - t for t in tie_sizes) / (12.0 * (n - 1)) if n > 1 else 0.0
    variance_base = n * (n + 1) / 12.0 - tie_term
    k = len(groups)
    n_comparisons = k * (k - 1) // 2
    means = [math.fsum(r) / len(r) for r in ranks]
    out: list[PairwiseComparison] = []
    for a in range(k):
        for b in range(a + 1, k):
            denom = variance_base * (1.0 / len(ranks[a]) + 1.0 / len(ranks[b]))
            if denom <= 0.0:
                z = 0.0
            else:
                z = (means[a] - means[b]) / math.sqrt(denom)
            p_raw = 2.0 * normal_sf(abs(z))
            if p_raw > 1.0:
                p_raw = 1.0
            out.append(
                PairwiseComparison(
                    group_a=a,
                    group_b=b,
                    z=z,
                    p_raw=p_raw,
                    p_adjusted=min(1.0, p_raw * n_comparisons),
                )
            )
    return out


def kruskal_wallis_dunn(groups: Sequence[Sequence[float]]) -> KwDunnResult:
    """The full rank-test procedure: omnibus KW plus Dunn/Bonferroni."""
    kw = kruskal_wallis(groups)
    return KwDunnResult(h=kw.h, df=kw.df, p=kw.p, pairwise=tuple(dunn_posthoc(groups)))


@dataclass(frozen=True, slots=True)
class LongTailReport:
    top: tuple[tuple[str, int], ...]
    covered_records: int
    prompted_records: int
    distinct_prompts: int

    @property
    def cumulative_share(self) -> float:
        return self.covered_records / self.prompted_records if self.prompted_records else 0.0


def long_tail_report(records: Iterable[TextInputRecord], k: int) -> LongTailReport:
    """Top-k prompts by frequency and the record share they cover.

    Operates on records with an observable (non-redacted) prompt; ties in
    frequency break lexicographically.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    counts: dict[str, int] = {}
    prompted = 0
    for record in records:
        prompt = record.prompt_text
        if prompt is None or prompt == REDACTED:
            continue
        prompted += 1
        counts[prompt] = counts.get(prompt, 0) + 1
    top = sorted(counts.items(), key=lambda item: (-item[1], item[0]))[:k]
    return LongTailReport(
        top=tuple(top),
        covered_records=sum(c for _, c in top),
        prompted_records=prompted,
        distinct_prompts=len(counts),
    )


@dataclass(frozen=True, slots=True)
class ComparisonRow:
    label: str
    kind: Literal["motive", "app_category"]
    match_rate: GroupStats
    words: GroupStats


@dataclass(frozen=True, slots=True)
class ComparisonTable:
    rows: tuple[ComparisonRow, ...]
    skipped: tuple[str, ...] = ()


def motive_vs_appcat_table(
    records: Iterable[TextInputRecord],
    pairs: Sequence[tuple[Motive, str]],
) -> ComparisonTable:
    """Side-by-side M/SD of matching rate and words per input for each
    (motive selection, app-category selection) pair.

    Pairs with an empty selection on either side are flagged and skipped.
    """
    records = list(records)
    rows: list[ComparisonRow] = []
    skipped: list[str] = []

    def summarize(selection: list[TextInputRecord], label: str, kind) -> Optional[ComparisonRow]:
        rates = [
            r.matched_words / r.total_words for r in selection if r.total_words > 0
        ]
        words = [float(r.total_words) for r in selection]
        if not rates or not words:
            return None
        return ComparisonRow(
            label=label,
            kind=kind,
            match_rate=GroupStats(label, len(rates), *mean_sd(rates)),
            words=GroupStats(label, len(words), *mean_sd(words)),
        )

    for motive, app_category in pairs:
        by_app = [r for r in records if r.app_category == app_category]
        by_motive = [r for r in records if r.motive is motive]
        app_row = summarize(by_app, app_category, "app_category")
        motive_row = summarize(by_motive, motive.value, "motive")
        if app_row is None or motive_row is None:
            skipped.append(f"{motive.value}/{app_category}")
            continue
        rows.append(app_row)
        rows.append(motive_row)
    return ComparisonTable(rows=tuple(rows), skipped=tuple(skipped))
