"""Prompt-to-motive classification: privacy prefilter, keyword-stem rules,
mapping lookup, and coverage accounting."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional

from .model import (
    KeywordRuleSet,
    MappingEntry,
    Motive,
    MotiveMapping,
    Provenance,
    REDACTED,
    TextInputRecord,
)

DEFAULT_RESIDUAL_CUTOFF = 0.0001  # fraction of logged texts a prompt must reach


def _prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True, slots=True)
class RedactionItem:
    prompt_hash: str
    participant_count: int
    record_count: int


@dataclass(frozen=True, slots=True)
class RedactionReport:
    items: tuple[RedactionItem, ...]

    @property
    def redacted_prompts(self) -> int:
        return len(self.items)

    @property
    def redacted_records(self) -> int:
        return sum(item.record_count for item in self.items)


def prefilter_single_participant(
    records: Iterable[TextInputRecord],
) -> tuple[list[TextInputRecord], RedactionReport]:
    """Redact prompts observed for fewer than two distinct participants.

    Dynamically personalized prompts ("reply to john smith") are, by
    assumption, unlikely to occur for multiple participants. The redacted
    prompt is replaced by the REDACTED sentinel so downstream counts stay
    auditable; the report identifies it only by hash.
    """
    records = list(records)
    participants: dict[str, set[str]] = {}
    counts: dict[str, int] = {}
    for record in records:
        prompt = record.prompt_text
        if prompt is None or prompt == REDACTED:
            continue
        participants.setdefault(prompt, set()).add(record.participant_id)
        counts[prompt] = counts.get(prompt, 0) + 1

    redacted = {p for p, pids in participants.items() if len(pids) < 2}
    out = [
        replace(r, prompt_text=REDACTED)
        if r.prompt_text in redacted
        else r
        for r in records
    ]
    items = tuple(
        RedactionItem(
            prompt_hash=_prompt_hash(p),
            participant_count=len(participants[p]),
            record_count=counts[p],
        )
        for p in sorted(redacted)
    )
    return out, RedactionReport(items=items)


def classify(
    prompt: Optional[str],
    mapping: MotiveMapping,
    rules: KeywordRuleSet,
) -> Motive:
    """Classify one normalized prompt.

    Absent -> NO_PROMPT; REDACTED -> UNLABELED; otherwise exact mapping
    lookup first (manual codes override stem heuristics), then the first
    keyword rule whose stem is a substring, else UNLABELED.
    """
    if prompt is None:
        return Motive.NO_PROMPT
    if prompt == REDACTED:
        return Motive.UNLABELED
    entry = mapping.get(prompt)
    if entry is not None:
        return entry.motive
    hit = rules.match(prompt)
    if hit is not None:
        return hit
    return Motive.UNLABELED


def classify_records(
    records: Iterable[TextInputRecord],
    mapping: MotiveMapping,
    rules: KeywordRuleSet,
) -> list[TextInputRecord]:
    """Classify every record; records without prompts become NO_PROMPT."""
    return [replace(r, motive=classify(r.prompt_text, mapping, rules)) for r in records]


@dataclass(frozen=True, slots=True)
class AutoCodeResult:
    mapping: MotiveMapping
    # Unmatched prompts above the residual cutoff, frequency-descending;
    # this is the manual-coding queue.
    residual: tuple[tuple[str, int], ...]
    below_cutoff: int


def auto_code_corpus(
    prompt_counts: Mapping[str, int],
    rules: KeywordRuleSet,
    residual_cutoff: float = DEFAULT_RESIDUAL_CUTOFF,
    total: Optional[int] = None,
) -> AutoCodeResult:
    """Build the automatic part of a motive mapping from keyword-stem rules.

    Every distinct prompt matched by a rule gets an AutoKeyword entry; the
    rest are listed for manual coding, ordered by descending frequency, with
    prompts below ``residual_cutoff`` (as a fraction of ``total``, defaulting
    to the summed counts) dropped from the queue and tallied.
    """
    basis = total if total is not None else sum(prompt_counts.values())
    entries: dict[str, MappingEntry] = {}
    residual: list[tuple[str, int]] = []
    below = 0
    for prompt in sorted(prompt_counts):
        motive = rules.match(prompt)
        if motive is not None:
            entries[prompt] = MappingEntry(motive=motive, provenance=Provenance.AUTO_KEYWORD)
        elif basis > 0 and prompt_counts[prompt] / basis <= residual_cutoff:
            below += 1
        else:
            residual.append((prompt, prompt_counts[prompt]))
    residual.sort(key=lambda item: (-item[1], item[0]))
    return AutoCodeResult(
        mapping=MotiveMapping(entries=entries),
        residual=tuple(residual),
        below_cutoff=below,
    )


@dataclass(frozen=True, slots=True)
class CoverageReport:
    """Prompt availability and label coverage, the headline adoption rates."""

    n_records: int
    n_prompted: int
    n_labeled: int
    motive_shares: dict[Motive, float] = field(default_factory=dict)

    @property
    def prompt_rate(self) -> float:
        return self.n_prompted / self.n_records if self.n_records else 0.0

    @property
    def label_rate_of_prompted(self) -> float:
        return self.n_labeled / self.n_prompted if self.n_prompted else 0.0

    @property
    def label_rate_overall(self) -> float:
        return self.n_labeled / self.n_records if self.n_records else 0.0


def coverage(records: Iterable[TextInputRecord]) -> CoverageReport:
    """Compute prompt/label coverage and per-motive shares among labeled."""
    n = prompted = labeled = 0
    by_motive: dict[Motive, int] = {}
    for record in records:
        n += 1
        if record.motive is Motive.NO_PROMPT:
            continue
        prompted += 1
        if record.motive is Motive.UNLABELED:
            continue
        labeled += 1
        by_motive[record.motive] = by_motive.get(record.motive, 0) + 1
    shares = (
        {m: by_motive[m] / labeled for m in sorted(by_motive, key=lambda x: x.value)}
        if labeled
        else {}
    )
    return CoverageReport(
        n_records=n,
        n_prompted=prompted,
        n_labeled=labeled,
        motive_shares=shares,
    )
