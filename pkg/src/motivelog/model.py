"""Shared domain types: capture events, abstracted word events, text-input
records, dictionaries, and the motive taxonomy.

Everything here is immutable after construction and safe to share across
threads. Serialization of these types lives in :mod:`motivelog.io`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Optional


class Motive(str, Enum):
    """Closed nine-label motive domain.

    The first seven are assignable by classification; ``UNLABELED`` marks a
    prompt no rule or mapping covers, ``NO_PROMPT`` marks inputs whose field
    carried no prompt at all.
    """

    MESSAGING = "Messaging"
    POSTING = "Posting"
    COMMENTING = "Commenting"
    SEARCH = "Search"
    DATA_INPUT = "DataInput"
    OTHER = "Other"
    AMBIGUOUS = "Ambiguous"
    UNLABELED = "Unlabeled"
    NO_PROMPT = "NoPrompt"


# Motives a mapping or rule may assign (everything except the two fallbacks).
ASSIGNABLE_MOTIVES: tuple[Motive, ...] = (
    Motive.MESSAGING,
    Motive.POSTING,
    Motive.COMMENTING,
    Motive.SEARCH,
    Motive.DATA_INPUT,
    Motive.OTHER,
    Motive.AMBIGUOUS,
)

# Sentinel stored in place of a prefiltered prompt. Normalized prompts are
# case-folded, so this uppercase value can never collide with a real one.
REDACTED = "REDACTED"


class EventKind(str, Enum):
    ADDED = "added"
    CHANGED = "changed"
    REMOVED = "removed"


class Provenance(str, Enum):
    AUTO_KEYWORD = "AutoKeyword"
    MANUAL_CODED = "ManualCoded"


class UnsortedInputError(ValueError):
    """Timestamps regressed within one participant's event stream."""


class InvalidSpecError(ValueError):
    """A corpus spec field is out of range; message names the field."""


class TooFewGroupsError(ValueError):
    pass


class EmptyGroupError(ValueError):
    pass


class NoCommonItemsError(ValueError):
    pass


class DegenerateMarginalsError(ValueError):
    """Both raters used a single identical category (pe = 1)."""


def normalize_prompt(raw: str) -> str:
    """Normalize a prompt for stable lookups: trim, collapse internal
    whitespace runs to single spaces, Unicode-case-fold.

    Idempotent; empty input yields empty output.
    """
    return " ".join(raw.split()).casefold()


@dataclass(frozen=True, slots=True)
class FieldSnapshotEvent:
    """One raw capture event: the full field content after a change.

    ``prompt`` is the field's placeholder text when one was observable; it is
    never user-typed content. Raw ``content`` exists only up to the
    abstraction boundary.
    """

    ts: int
    participant_id: str
    app_id: str
    field_id: str
    content: str
    prompt: Optional[str] = None

    def __post_init__(self) -> None:
        if self.ts < 0:
            raise ValueError("ts must be >= 0")
        if not self.participant_id or not self.app_id or not self.field_id:
            raise ValueError("participant_id, app_id, field_id must be non-empty")


@dataclass(frozen=True, slots=True)
class WordEvent:
    """Privacy-abstracted word-level event.

    Carries dictionary category ids and, only for whitelisted words, the
    case-folded token itself. By construction there is no field that could
    hold a raw non-whitelisted token.
    """

    ts: int
    participant_id: str
    app_id: str
    session_id: str
    kind: EventKind
    category_ids: frozenset[int]
    whitelist_token: Optional[str] = None


@dataclass(frozen=True, slots=True)
class TextInputRecord:
    """One completed text input (session), the analysis row unit."""

    session_id: str
    participant_id: str
    app_id: str
    words_added: int
    words_changed: int
    words_removed: int
    matched_words: int
    many_hot: frozenset[int]
    start_ts: int
    end_ts: int
    prompt_text: Optional[str] = None
    motive: Motive = Motive.NO_PROMPT
    app_category: Optional[str] = None

    def __post_init__(self) -> None:
        if min(self.words_added, self.words_changed, self.words_removed) < 0:
            raise ValueError("word counts must be non-negative")
        if self.matched_words > self.total_words:
            raise ValueError("matched_words cannot exceed total_words")
        if self.end_ts < self.start_ts:
            raise ValueError("end_ts must be >= start_ts")

    @property
    def total_words(self) -> int:
        """Added + changed; removed events are excluded from analysis."""
        return self.words_added + self.words_changed

    def many_hot_vector(self, category_ids: list[int]) -> list[bool]:
        """Render the sparse category set as a boolean vector over the
        dictionary's category-id order."""
        return [cid in self.many_hot for cid in category_ids]


# Trailing marker on a dictionary pattern denoting a stem prefix.
STEM_WILDCARD = "*"


@dataclass(frozen=True)
class Dictionary:
    """Closed-vocabulary category dictionary.

    ``entries`` are (pattern, category-id set) pairs; a pattern is either a
    literal word or a stem prefix terminated by ``*``. Patterns are
    case-folded at construction.
    """

    categories: dict[int, str]
    entries: tuple[tuple[str, frozenset[int]], ...]

    def __post_init__(self) -> None:
        for pattern, cats in self.entries:
            if not pattern or pattern == STEM_WILDCARD:
                raise ValueError("patterns must be non-empty")
            if pattern != pattern.casefold():
                raise ValueError(f"pattern not case-folded: {pattern!r}")
            unknown = cats - self.categories.keys()
            if unknown:
                raise ValueError(f"entry {pattern!r} references unknown categories {sorted(unknown)}")

    @classmethod
    def from_entries(
        cls, categories: dict[int, str], entries: list[tuple[str, set[int]]]
    ) -> "Dictionary":
        return cls(
            categories=dict(categories),
            entries=tuple((p.casefold(), frozenset(c)) for p, c in entries),
        )

    @cached_property
    def _literal_index(self) -> dict[str, frozenset[int]]:
        index: dict[str, frozenset[int]] = {}
        for pattern, cats in self.entries:
            if not pattern.endswith(STEM_WILDCARD):
                index[pattern] = index.get(pattern, frozenset()) | cats
        return index

    @cached_property
    def _stem_index(self) -> dict[str, frozenset[int]]:
        index: dict[str, frozenset[int]] = {}
        for pattern, cats in self.entries:
            if pattern.endswith(STEM_WILDCARD):
                stem = pattern[:-1]
                index[stem] = index.get(stem, frozenset()) | cats
        return index

    def lookup(self, folded_token: str) -> frozenset[int]:
        """Union of category ids over all matching entries (literal equality
        plus every stem that prefixes the token). Token must be case-folded."""
        cats = self._literal_index.get(folded_token, frozenset())
        stems = self._stem_index
        if stems:
            for i in range(1, len(folded_token) + 1):
                hit = stems.get(folded_token[:i])
                if hit is not None:
                    cats = cats | hit
        return cats


@dataclass(frozen=True, slots=True)
class Whitelist:
    """Closed word list whose members may be logged verbatim."""

    words: frozenset[str]

    @classmethod
    def of(cls, words: list[str] | set[str]) -> "Whitelist":
        return cls(words=frozenset(w.casefold() for w in words))

    def __contains__(self, folded_token: str) -> bool:
        return folded_token in self.words


@dataclass(frozen=True, slots=True)
class MappingEntry:
    motive: Motive
    provenance: Provenance
    coder: Optional[str] = None
    round: Optional[int] = None


@dataclass(frozen=True, slots=True)
class MotiveMapping:
    """Normalized prompt text -> motive assignment, with provenance."""

    entries: dict[str, MappingEntry] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for prompt, entry in self.entries.items():
            if prompt != normalize_prompt(prompt):
                raise ValueError(f"mapping key not normalized: {prompt!r}")
            if entry.motive not in ASSIGNABLE_MOTIVES:
                raise ValueError(f"mapping motive must be assignable, got {entry.motive}")

    def get(self, prompt: str) -> Optional[MappingEntry]:
        return self.entries.get(prompt)

    def __len__(self) -> int:
        return len(self.entries)

    def merged_with(self, other: "MotiveMapping") -> "MotiveMapping":
        """Entries of ``other`` take precedence on key collisions."""
        merged = dict(self.entries)
        merged.update(other.entries)
        return MotiveMapping(entries=merged)


@dataclass(frozen=True, slots=True)
class KeywordRuleSet:
    """Ordered stem-substring rules; first match wins."""

    rules: tuple[tuple[str, Motive], ...]

    def __post_init__(self) -> None:
        for stem, motive in self.rules:
            if not stem:
                raise ValueError("rule stems must be non-empty")
            if stem != stem.casefold():
                raise ValueError(f"rule stem not case-folded: {stem!r}")
            if motive not in ASSIGNABLE_MOTIVES:
                raise ValueError(f"rule motive must be assignable, got {motive}")

    @classmethod
    def default(cls) -> "KeywordRuleSet":
        return cls(
            rules=(
                ("such", Motive.SEARCH),
                ("search", Motive.SEARCH),
                ("komment", Motive.COMMENTING),
                ("comment", Motive.COMMENTING),
                ("nachricht", Motive.MESSAGING),
                ("message", Motive.MESSAGING),
            )
        )

    def match(self, normalized_prompt: str) -> Optional[Motive]:
        for stem, motive in self.rules:
            if stem in normalized_prompt:
                return motive
        return None


@dataclass(frozen=True, slots=True)
class AppCategoryMap:
    """app_id -> app category name (the comparison baseline)."""

    categories: dict[str, str] = field(default_factory=dict)

    def get(self, app_id: str) -> Optional[str]:
        return self.categories.get(app_id)
