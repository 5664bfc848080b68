"""In-process composition of the pipeline stages.

The CLI chains the same stages through files; both routes must agree
bit-for-bit on the records they produce.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from .abstractor import process_stream
from .classify import (
    RedactionReport,
    classify_records,
    coverage,
    prefilter_single_participant,
)
from .model import (
    AppCategoryMap,
    Dictionary,
    FieldSnapshotEvent,
    KeywordRuleSet,
    Motive,
    MotiveMapping,
    TextInputRecord,
    Whitelist,
)
from .sessions import (
    SessionAudit,
    SessionKeying,
    assign_sessions,
    build_records,
    collect_session_prompts,
)
from .stats import (
    ComparisonTable,
    GroupStats,
    KwDunnResult,
    kruskal_wallis_dunn,
    long_tail_report,
    matching_rate_stats,
    motive_vs_appcat_table,
    words_per_input_stats,
)

DEFAULT_COMPARE_PAIRS: tuple[tuple[Motive, str], ...] = (
    (Motive.MESSAGING, "Communication"),
    (Motive.POSTING, "Social Media"),
    (Motive.COMMENTING, "Social Media"),
    (Motive.SEARCH, "System"),
)


@dataclass
class PipelineResult:
    records: list[TextInputRecord]
    redaction: Optional[RedactionReport] = None
    audit: SessionAudit = field(default_factory=SessionAudit)


def run_pipeline(
    events_factory: Callable[[], Iterable[FieldSnapshotEvent]],
    dictionary: Dictionary,
    whitelist: Whitelist,
    mapping: MotiveMapping,
    rules: KeywordRuleSet,
    app_categories: AppCategoryMap = AppCategoryMap(),
    keying: SessionKeying = SessionKeying(),
    prefilter: bool = True,
) -> PipelineResult:
    """abstract -> sessions -> (prefilter ->) classify, entirely in memory.

    ``events_factory`` is called twice (once to collect per-session prompts,
    once to stream the abstraction) so callers can hand in a re-openable
    file reader instead of materializing the event stream.
    """
    prompts = collect_session_prompts(events_factory(), keying)
    audit = SessionAudit()
    words = process_stream(
        assign_sessions(events_factory(), keying), dictionary, whitelist
    )
    records = list(build_records(words, prompts, app_categories, audit))
    redaction = None
    if prefilter:
        records, redaction = prefilter_single_participant(records)
    records = classify_records(records, mapping, rules)
    return PipelineResult(records=records, redaction=redaction, audit=audit)


# ---------------------------------------------------------------------------
# report assembly (the `stats` output contract)


def _group_stats_obj(stats: GroupStats) -> dict:
    return {"label": stats.label, "n": stats.n, "mean": stats.mean, "sd": stats.sd}


def _kw_obj(result: KwDunnResult, labels: list[str]) -> dict:
    return {
        "h": result.h,
        "df": result.df,
        "p": result.p,
        "groups": labels,
        "pairwise": [
            {
                "a": labels[c.group_a],
                "b": labels[c.group_b],
                "z": c.z,
                "p_raw": c.p_raw,
                "p_adjusted": c.p_adjusted,
            }
            for c in result.pairwise
        ],
    }


def stats_report(
    records: list[TextInputRecord],
    rules: Optional[KeywordRuleSet] = None,
) -> dict:
    """Machine-readable statistics report over classified records."""
    cov = coverage(records)
    report: dict = {
        "n_records": cov.n_records,
        "coverage": {
            "n_records": cov.n_records,
            "n_prompted": cov.n_prompted,
            "n_labeled": cov.n_labeled,
            "prompt_rate": cov.prompt_rate,
            "label_rate_of_prompted": cov.label_rate_of_prompted,
            "label_rate_overall": cov.label_rate_overall,
            "motive_shares": {m.value: s for m, s in cov.motive_shares.items()},
        },
        "words_per_input": {},
        "matching_rate": {},
    }
    if rules is not None:
        # The stem precedence order is a modeling choice; surface it.
        report["rule_order"] = [f"{stem}->{motive.value}" for stem, motive in rules.rules]
    for group_by in ("motive", "app_category"):
        report["words_per_input"][group_by] = [
            _group_stats_obj(g) for g in words_per_input_stats(records, group_by)
        ]
        report["matching_rate"][group_by] = [
            _group_stats_obj(g) for g in matching_rate_stats(records, group_by)
        ]

    labeled_groups: dict[str, list[float]] = {}
    for record in records:
        if record.motive not in (Motive.UNLABELED, Motive.NO_PROMPT):
            labeled_groups.setdefault(record.motive.value, []).append(
                float(record.total_words)
            )
    if len(labeled_groups) >= 2:
        labels = sorted(labeled_groups)
        kw = kruskal_wallis_dunn([labeled_groups[label] for label in labels])
        report["words_by_motive_rank_test"] = _kw_obj(kw, labels)
    return report


def stats_tsv(report: dict) -> str:
    """Plot-ready TSV, one row per group."""
    lines = ["group_by\tlabel\tn\twords_mean\twords_sd\tmatch_n\tmatch_mean\tmatch_sd"]
    for group_by in ("motive", "app_category"):
        words = {g["label"]: g for g in report["words_per_input"][group_by]}
        rates = {g["label"]: g for g in report["matching_rate"][group_by]}
        for label in sorted(words):
            w = words[label]
            r = rates.get(label)
            lines.append(
                "\t".join(
                    [
                        group_by,
                        label,
                        str(w["n"]),
                        repr(w["mean"]),
                        repr(w["sd"]),
                        str(r["n"]) if r else "0",
                        repr(r["mean"]) if r else "",
                        repr(r["sd"]) if r else "",
                    ]
                )
            )
    return "\n".join(lines) + "\n"


def comparison_report(table: ComparisonTable) -> dict:
    return {
        "rows": [
            {
                "label": row.label,
                "kind": row.kind,
                "match_rate": _group_stats_obj(row.match_rate),
                "words": _group_stats_obj(row.words),
            }
            for row in table.rows
        ],
        "skipped": list(table.skipped),
    }


def comparison_tsv(table: ComparisonTable) -> str:
    lines = ["kind\tlabel\tmatch_n\tmatch_mean\tmatch_sd\twords_n\twords_mean\twords_sd"]
    for row in table.rows:
        lines.append(
            "\t".join(
                [
                    row.kind,
                    row.label,
                    str(row.match_rate.n),
                    repr(row.match_rate.mean),
                    repr(row.match_rate.sd),
                    str(row.words.n),
                    repr(row.words.mean),
                    repr(row.words.sd),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def longtail_json(records: list[TextInputRecord], k: int) -> dict:
    report = long_tail_report(records, k)
    return {
        "k": k,
        "top": [{"prompt": p, "count": c} for p, c in report.top],
        "covered_records": report.covered_records,
        "prompted_records": report.prompted_records,
        "distinct_prompts": report.distinct_prompts,
        "cumulative_share": report.cumulative_share,
    }


def longtail_tsv(report: dict) -> str:
    lines = ["rank\tprompt\tcount"]
    for i, item in enumerate(report["top"], start=1):
        lines.append(f"{i}\t{item['prompt']}\t{item['count']}")
    return "\n".join(lines) + "\n"


def run_compare(
    records: list[TextInputRecord],
    pairs: tuple[tuple[Motive, str], ...] = DEFAULT_COMPARE_PAIRS,
) -> ComparisonTable:
    return motive_vs_appcat_table(records, pairs)
