"""Deterministic synthetic-corpus generator.

Produces field-snapshot event streams with known ground truth so every
pipeline stage is testable at desk scale. Calibration targets come from the
published study distributions: motive mix, prompt availability, label
coverage, per-motive words-per-input means, and per-motive dictionary
matching probabilities.

Construction notes:

* Prompts are drawn Zipf-weighted from a vocabulary whose entries carry
  ground-truth motives. Motives are assigned to ranks greedily (largest
  remaining deficit first), separately within the covered and uncovered
  segments, so both the overall corpus and the labeled subset match the
  configured mix.
* The uncovered segment is the tail of the rank distribution, which is what
  an in-the-wild coding effort leaves uncoded.
* Word counts are drawn from a normal rounded and clamped at 1; the
  underlying location is calibrated numerically so the clamped mean equals
  the configured target (the configured SD is used as the underlying scale;
  the clamped SD is smaller for short-input motives, where no at-least-one
  distribution can reach the published SD).
* Typed words come from a closed lexicon split into dictionary-matching and
  non-matching halves, so per-word match flags are exact.
"""

from __future__ import annotations

import math
import random
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

from .model import (
    AppCategoryMap,
    Dictionary,
    FieldSnapshotEvent,
    InvalidSpecError,
    MappingEntry,
    Motive,
    MotiveMapping,
    Provenance,
    Whitelist,
)
from .sessions import make_session_id

# Vowel-free alphabet: no keyword stem ("such", "message", ...) can occur as
# a substring of any generated pseudo-word.
_PW_ALPHABET = "bcdfghjklmnpqrstvwxz"

_DEFAULT_MOTIVE_MIX = {
    Motive.MESSAGING: 0.440,
    Motive.SEARCH: 0.338,
    Motive.DATA_INPUT: 0.122,
    Motive.AMBIGUOUS: 0.049,
    Motive.COMMENTING: 0.032,
    Motive.POSTING: 0.010,
    Motive.OTHER: 0.009,
}

_DEFAULT_WORDS_PER_INPUT = {
    Motive.MESSAGING: (12.43, 18.80),
    Motive.POSTING: (12.84, 19.00),
    Motive.COMMENTING: (12.65, 20.28),
    Motive.SEARCH: (2.30, 6.80),
    Motive.DATA_INPUT: (2.73, 9.29),
    Motive.OTHER: (5.32, 9.42),
    Motive.AMBIGUOUS: (3.50, 8.00),
}

_DEFAULT_MATCH_PROBABILITY = {
    Motive.MESSAGING: 0.5064,
    Motive.POSTING: 0.3882,
    Motive.COMMENTING: 0.4178,
    Motive.SEARCH: 0.1302,
    Motive.DATA_INPUT: 0.22,
    Motive.OTHER: 0.30,
    Motive.AMBIGUOUS: 0.25,
}

_MOTIVE_ORDER = tuple(_DEFAULT_MOTIVE_MIX)  # fixed iteration order everywhere

_APP_CATEGORIES = {
    "com.chat.alpha": "Communication",
    "com.chat.beta": "Communication",
    "com.social.alpha": "Social Media",
    "com.social.beta": "Social Media",
    "com.launcher.search": "System",
    "com.sys.settings": "System",
    "com.forms.bank": "Forms",
    "com.forms.travel": "Forms",
    "com.tools.notes": "Productivity",
}

# App choice conditional on motive. Search and data entry happen inside apps
# of every category, which is exactly why app-category selections are noisier
# than motive selections.
_APPS_BY_MOTIVE: dict[Motive, list[tuple[str, float]]] = {
    Motive.MESSAGING: [("com.chat.alpha", 0.7), ("com.chat.beta", 0.3)],
    Motive.POSTING: [("com.social.alpha", 0.6), ("com.social.beta", 0.4)],
    Motive.COMMENTING: [("com.social.alpha", 0.5), ("com.social.beta", 0.5)],
    Motive.SEARCH: [
        ("com.launcher.search", 0.45),
        ("com.sys.settings", 0.15),
        ("com.chat.alpha", 0.12),
        ("com.social.alpha", 0.13),
        ("com.forms.bank", 0.08),
        ("com.tools.notes", 0.07),
    ],
    Motive.DATA_INPUT: [
        ("com.forms.bank", 0.40),
        ("com.forms.travel", 0.30),
        ("com.sys.settings", 0.15),
        ("com.chat.alpha", 0.08),
        ("com.social.alpha", 0.07),
    ],
    Motive.OTHER: [("com.tools.notes", 0.6), ("com.sys.settings", 0.4)],
    Motive.AMBIGUOUS: [
        ("com.chat.alpha", 0.2),
        ("com.social.alpha", 0.2),
        ("com.launcher.search", 0.2),
        ("com.forms.bank", 0.2),
        ("com.tools.notes", 0.2),
    ],
}

_LEXICON_SIZE = 400
_CATEGORY_NAMES = {
    1: "function",
    2: "social",
    3: "affect",
    4: "cogproc",
    5: "percept",
    6: "bio",
    7: "drives",
    8: "relativ",
    9: "informal",
    10: "work",
}


@dataclass(frozen=True, slots=True)
class CorpusSpec:
    seed: int = 7
    participants: int = 25
    days: int = 7
    inputs_per_day_mean: float = 23.40
    inputs_per_day_sd: float = 28.23
    motive_mix: dict[Motive, float] = field(
        default_factory=lambda: dict(_DEFAULT_MOTIVE_MIX)
    )
    prompt_availability: float = 0.595
    words_per_input: dict[Motive, tuple[float, float]] = field(
        default_factory=lambda: dict(_DEFAULT_WORDS_PER_INPUT)
    )
    match_probability: dict[Motive, float] = field(
        default_factory=lambda: dict(_DEFAULT_MATCH_PROBABILITY)
    )
    vocabulary_size: int = 2000
    zipf_exponent: float = 1.0
    mapping_coverage: float = 0.884
    single_participant_prompt_rate: float = 0.002
    edit_rate: float = 0.10
    removal_rate: float = 0.08

    def validate(self) -> None:
        if self.participants < 1:
            raise InvalidSpecError("participants must be >= 1")
        if self.days < 1:
            raise InvalidSpecError("days must be >= 1")
        if self.vocabulary_size < len(_MOTIVE_ORDER) * 2:
            raise InvalidSpecError("vocabulary_size too small for the motive set")
        if abs(sum(self.motive_mix.values()) - 1.0) > 1e-9:
            raise InvalidSpecError("motive_mix must sum to 1")
        for name, p in [
            ("prompt_availability", self.prompt_availability),
            ("mapping_coverage", self.mapping_coverage),
            ("single_participant_prompt_rate", self.single_participant_prompt_rate),
            ("edit_rate", self.edit_rate),
            ("removal_rate", self.removal_rate),
        ]:
            if not 0.0 <= p <= 1.0:
                raise InvalidSpecError(f"{name} must be in [0, 1]")
        for motive, p in self.match_probability.items():
            if not 0.0 <= p <= 1.0:
                raise InvalidSpecError(f"match_probability[{motive.value}] must be in [0, 1]")
        for motive, share in self.motive_mix.items():
            if share < 0:
                raise InvalidSpecError(f"motive_mix[{motive.value}] must be >= 0")
            if share > 0 and motive not in self.words_per_input:
                raise InvalidSpecError(f"words_per_input missing motive {motive.value}")
            if share > 0 and motive not in self.match_probability:
                raise InvalidSpecError(f"match_probability missing motive {motive.value}")
        for motive, (mean, sd) in self.words_per_input.items():
            if mean < 1.0:
                raise InvalidSpecError(f"words_per_input[{motive.value}] mean must be >= 1")
            if sd < 0.0:
                raise InvalidSpecError(f"words_per_input[{motive.value}] sd must be >= 0")
        if self.inputs_per_day_mean <= 0:
            raise InvalidSpecError("inputs_per_day_mean must be > 0")
        if self.zipf_exponent < 0:
            raise InvalidSpecError("zipf_exponent must be >= 0")


def pseudo_word(index: int, min_len: int = 3) -> str:
    """Deterministic vowel-free word for vocabulary and lexicon entries."""
    base = len(_PW_ALPHABET)
    digits = []
    value = index
    while True:
        digits.append(_PW_ALPHABET[value % base])
        value //= base
        if value == 0:
            break
    while len(digits) < min_len:
        digits.append(_PW_ALPHABET[0])
    return "".join(reversed(digits))


def zipf_cumweights(size: int, exponent: float) -> list[float]:
    """Cumulative Zipf weights for ranks 1..size (unnormalized)."""
    total = 0.0
    out = []
    for rank in range(1, size + 1):
        total += rank**-exponent
        out.append(total)
    return out


@dataclass(frozen=True, slots=True)
class VocabEntry:
    rank: int  # 1-based
    text: str
    motive: Motive
    covered: bool


_PROMPT_TEMPLATES = {
    Motive.MESSAGING: ("type a message {w}", "nachricht schreiben {w}"),
    Motive.COMMENTING: ("comment {w}", "kommentar {w}"),
    Motive.SEARCH: ("search {w}", "suche {w}"),
    Motive.POSTING: ("write a caption {w}", "caption {w}"),
    Motive.DATA_INPUT: ("email address {w}", "address {w}"),
    Motive.OTHER: ("write a note {w}", "note {w}"),
    Motive.AMBIGUOUS: ("{w}", "0 {w}"),
}

# Covered prompts of these motives classify through the keyword rules; the
# remaining covered motives need mapping entries.
_RULE_COVERED = {Motive.MESSAGING, Motive.COMMENTING, Motive.SEARCH}


def _greedy_assign(
    ranks: list[int], weights: list[float], mix: dict[Motive, float]
) -> dict[int, Motive]:
    """Assign motives to ranks so each motive's weight share tracks ``mix``."""
    total = sum(weights)
    active = [m for m in _MOTIVE_ORDER if mix.get(m, 0.0) > 0.0]
    deficits = {m: mix[m] * total for m in active}
    out: dict[int, Motive] = {}
    for rank, weight in zip(ranks, weights):
        best = max(active, key=lambda m: deficits[m])
        out[rank] = best
        deficits[best] -= weight
    return out


def build_vocabulary(spec: CorpusSpec) -> list[VocabEntry]:
    """Vocabulary of prompts with motives and coverage flags.

    Deterministic from the structural spec fields only (not the seed), so
    the fixture files stay stable across corpus seeds.
    """
    spec.validate()
    size = spec.vocabulary_size
    weights = [r**-spec.zipf_exponent for r in range(1, size + 1)]
    total = sum(weights)

    # Uncovered segment: the tail, accumulated until it holds 1 - coverage.
    uncovered_target = (1.0 - spec.mapping_coverage) * total
    boundary = size + 1  # first uncovered rank
    acc = 0.0
    for rank in range(size, 0, -1):
        if acc >= uncovered_target:
            break
        acc += weights[rank - 1]
        boundary = rank
    covered_ranks = list(range(1, boundary))
    uncovered_ranks = list(range(boundary, size + 1))

    assignment = _greedy_assign(
        covered_ranks, [weights[r - 1] for r in covered_ranks], spec.motive_mix
    )
    assignment.update(
        _greedy_assign(
            uncovered_ranks, [weights[r - 1] for r in uncovered_ranks], spec.motive_mix
        )
    )

    entries: list[VocabEntry] = []
    for rank in range(1, size + 1):
        motive = assignment[rank]
        covered = rank < boundary
        if covered:
            template = _PROMPT_TEMPLATES[motive][rank % 2]
            text = template.format(w=pseudo_word(rank))
        else:
            text = f"field {pseudo_word(rank)}"
        entries.append(VocabEntry(rank=rank, text=text, motive=motive, covered=covered))
    return entries


@dataclass(frozen=True, slots=True)
class CorpusFixtures:
    """Dictionary, whitelist, mapping, and app categories consistent with the
    generated stream."""

    dictionary: Dictionary
    whitelist: Whitelist
    mapping: MotiveMapping
    app_categories: AppCategoryMap
    vocabulary: list[VocabEntry]
    matching_words: list[str]
    non_matching_words: list[str]


def build_fixtures(spec: CorpusSpec) -> CorpusFixtures:
    vocabulary = build_vocabulary(spec)

    matching: list[str] = []
    entries: list[tuple[str, set[int]]] = []
    for i in range(_LEXICON_SIZE):
        cats = {1 + i % 10}
        if i % 3 == 0:
            cats.add(1 + (i // 10) % 10)
        if i % 5 < 3:
            word = "ml" + pseudo_word(i)
            entries.append((word, cats))
        else:
            stem = "ms" + pseudo_word(i)
            word = stem + "b"
            entries.append((stem + "*", cats))
        matching.append(word)
    non_matching = ["x" + pseudo_word(i) for i in range(_LEXICON_SIZE)]

    mapping_entries = {
        entry.text: MappingEntry(motive=entry.motive, provenance=Provenance.MANUAL_CODED)
        for entry in vocabulary
        if entry.covered and entry.motive not in _RULE_COVERED
    }

    return CorpusFixtures(
        dictionary=Dictionary.from_entries(dict(_CATEGORY_NAMES), entries),
        whitelist=Whitelist.of(matching[::10]),
        mapping=MotiveMapping(entries=mapping_entries),
        app_categories=AppCategoryMap(categories=dict(_APP_CATEGORIES)),
        vocabulary=vocabulary,
        matching_words=matching,
        non_matching_words=non_matching,
    )


def _calibrate_location(target_mean: float, sd: float) -> float:
    """Location mu such that E[max(1, round(Normal(mu, sd)))] = target_mean."""
    if sd == 0.0:
        return target_mean

    def clamped_mean(mu: float) -> float:
        # 1 * P(X < 1.5) + sum_k k * P(k - .5 <= X < k + .5)
        def cdf(x: float) -> float:
            return 0.5 * math.erfc((mu - x) / (sd * math.sqrt(2.0)))

        hi = int(math.ceil(mu + 12.0 * sd)) + 2
        total = cdf(1.5)
        prev = cdf(1.5)
        for k in range(2, hi):
            cur = cdf(k + 0.5)
            total += k * (cur - prev)
            prev = cur
        total += hi * (1.0 - prev)
        return total

    lo = target_mean - 12.0 * sd - 1.0
    hi = target_mean + 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if clamped_mean(mid) < target_mean:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True, slots=True)
class GroundTruthRow:
    session_id: str
    participant_id: str
    app_id: str
    motive: Motive
    words: int
    matched: int
    prompted: bool
    covered: bool
    injected: bool
    rank: int  # 0 when no vocabulary prompt was drawn


def generate(
    spec: CorpusSpec,
    on_truth: Optional[Callable[[GroundTruthRow], None]] = None,
    fixtures: Optional[CorpusFixtures] = None,
) -> Iterator[FieldSnapshotEvent]:
    """Yield snapshot events sorted by (participant, ts), deterministically.

    Ground truth is delivered through ``on_truth``, one row per text input,
    before that input's events are yielded. Participants draw from derived
    sub-generators, so generation per participant is reproducible in
    isolation.
    """
    spec.validate()
    if fixtures is None:
        fixtures = build_fixtures(spec)
    vocabulary = fixtures.vocabulary
    cumweights = zipf_cumweights(spec.vocabulary_size, spec.zipf_exponent)
    total_weight = cumweights[-1]

    locations = {
        m: _calibrate_location(mean, sd)
        for m, (mean, sd) in spec.words_per_input.items()
    }
    scales = {m: sd for m, (_, sd) in spec.words_per_input.items()}
    app_choices = {
        m: ([a for a, _ in pool], _cumulative([w for _, w in pool]))
        for m, pool in _APPS_BY_MOTIVE.items()
    }
    matching = fixtures.matching_words
    non_matching = fixtures.non_matching_words

    day_ms = 86_400_000

    for pidx in range(spec.participants):
        pid = f"p{pidx:04d}"
        rng = random.Random(f"{spec.seed}:{pidx}")
        cursor = 1_600_000_000_000 + pidx  # fixed epoch base
        session_counter = 0
        for day in range(spec.days):
            day_start = 1_600_000_000_000 + day * day_ms
            if cursor < day_start:
                cursor = day_start + rng.randrange(0, 3_600_000)
            n_inputs = max(0, round(rng.gauss(spec.inputs_per_day_mean, spec.inputs_per_day_sd)))
            for _ in range(n_inputs):
                cursor += rng.randrange(1_000, 60_000)
                session_counter += 1
                field_id = f"fld{session_counter:06d}"

                rank_idx = bisect_right(cumweights, rng.random() * total_weight)
                if rank_idx >= len(vocabulary):
                    rank_idx = len(vocabulary) - 1
                entry = vocabulary[rank_idx]
                motive = entry.motive

                prompted = rng.random() < spec.prompt_availability
                injected = prompted and rng.random() < spec.single_participant_prompt_rate
                if not prompted:
                    prompt: Optional[str] = None
                elif injected:
                    prompt = f"reply to {pid} {pseudo_word(session_counter)}"
                else:
                    # Uppercase variant exercises prompt normalization.
                    prompt = entry.text if entry.rank % 2 == 0 else entry.text.upper()

                n_words = max(1, round(rng.gauss(locations[motive], scales[motive])))
                match_p = spec.match_probability[motive]
                flags = [rng.random() < match_p for _ in range(n_words)]
                words = [
                    matching[rng.randrange(_LEXICON_SIZE)]
                    if flag
                    else non_matching[rng.randrange(_LEXICON_SIZE)]
                    for flag in flags
                ]

                # Editing patterns keep total_words = added + changed = n_words
                # and matched = sum(flags), so ground truth stays exact.
                pattern = rng.random()
                edit = (
                    pattern < spec.edit_rate
                    and n_words >= 2
                    and words[-1] != words[-2]
                )
                removal = (
                    not edit
                    and pattern < spec.edit_rate + spec.removal_rate
                    and n_words >= 2
                )

                apps, app_cum = app_choices[motive]
                app_id = apps[bisect_right(app_cum, rng.random() * app_cum[-1])]

                if on_truth is not None:
                    on_truth(
                        GroundTruthRow(
                            session_id=make_session_id(pid, cursor, field_id),
                            participant_id=pid,
                            app_id=app_id,
                            motive=motive,
                            words=n_words,
                            matched=sum(flags),
                            prompted=prompted,
                            covered=entry.covered and prompted and not injected,
                            injected=injected,
                            rank=entry.rank,
                        )
                    )

                first = True
                trailing_space = rng.random() < 0.5

                def snapshot(content: str) -> FieldSnapshotEvent:
                    nonlocal first, cursor
                    ev = FieldSnapshotEvent(
                        ts=cursor,
                        participant_id=pid,
                        app_id=app_id,
                        field_id=field_id,
                        content=content,
                        prompt=prompt if first else None,
                    )
                    first = False
                    cursor += rng.randrange(300, 2_500)
                    return ev

                if edit:
                    # Type n-1 words, then replace the last with the final
                    # word: n-1 added + 1 changed.
                    typed = words[:-1]
                    for j in range(len(typed)):
                        yield snapshot(" ".join(typed[: j + 1]) + " ")
                    replaced = typed[:-1] + [words[-1]]
                    yield snapshot(" ".join(replaced) + " ")
                elif removal:
                    # Type all n words, then delete the last one again:
                    # n added + 1 removed (removed is excluded from totals).
                    for j in range(n_words):
                        yield snapshot(" ".join(words[: j + 1]) + " ")
                    yield snapshot(" ".join(words[:-1]) + " ")
                else:
                    for j in range(n_words):
                        content = " ".join(words[: j + 1])
                        if j < n_words - 1 or trailing_space:
                            content += " "
                        yield snapshot(content)


def _cumulative(weights: list[float]) -> list[float]:
    total = 0.0
    out = []
    for w in weights:
        total += w
        out.append(total)
    return out
