"""On-device privacy stage (simulated): turns raw field snapshots into
abstracted word events.

Consecutive snapshots of one session are tokenized and diffed; each finalized
token is reduced to its dictionary category ids (plus the verbatim token only
when whitelisted). Raw text exists transiently inside this module and is
destroyed at its boundary: :class:`~motivelog.model.WordEvent` has no field
that could carry it.

The trailing token of a snapshot is treated as a word in progress and held
pending until a separator, a later snapshot, or session end finalizes it, so
a word being typed does not emit one event per keystroke.
"""

from __future__ import annotations

import re
from typing import Iterable, Iterator, NamedTuple, Optional

from .model import (
    Dictionary,
    EventKind,
    FieldSnapshotEvent,
    UnsortedInputError,
    Whitelist,
    WordEvent,
)

# Tokens are maximal runs of letters, digits, or apostrophes; all other
# characters (any Unicode whitespace, punctuation, symbols) separate tokens.
_TOKEN_RE = re.compile(r"(?:[^\W_]|['’])+")
_TOKEN_CHAR_RE = re.compile(r"[^\W_]|['’]")


def tokenize(content: str) -> list[str]:
    """Split ``content`` into word tokens. Deterministic; '' yields []."""
    return _TOKEN_RE.findall(content)


def _ends_in_token(content: str) -> bool:
    return bool(content) and _TOKEN_CHAR_RE.fullmatch(content[-1]) is not None


class WordDelta(NamedTuple):
    """One token-level difference between two snapshots.

    ``token`` exists only transiently inside this module and is never
    serialized. A CHANGED delta arises only from an aligned remove+add pair.
    """

    kind: EventKind
    token: str


def _lcs_table(old: list[str], new: list[str]) -> list[list[int]]:
    n, m = len(old), len(new)
    table = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        row, below = table[i], table[i + 1]
        oi = old[i]
        for j in range(m - 1, -1, -1):
            if oi == new[j]:
                row[j] = below[j + 1] + 1
            else:
                b, r = below[j], row[j + 1]
                row[j] = b if b >= r else r
    return table


def diff_tokens(old: list[str], new: list[str]) -> list[WordDelta]:
    """Token diff via longest-common-subsequence alignment.

    Unmatched tokens in ``new`` become ADDED, unmatched in ``old`` REMOVED;
    when an alignment gap holds exactly one removed and one added token they
    merge into a single CHANGED delta. Output order follows ``new``.
    """
    # Common prefix/suffix carry no deltas; trimming them keeps the LCS core
    # tiny for keystroke-granularity streams.
    lo = 0
    n, m = len(old), len(new)
    while lo < n and lo < m and old[lo] == new[lo]:
        lo += 1
    hi = 0
    while hi < n - lo and hi < m - lo and old[n - 1 - hi] == new[m - 1 - hi]:
        hi += 1
    core_old = old[lo : n - hi]
    core_new = new[lo : m - hi]
    if not core_old:
        return [WordDelta(EventKind.ADDED, t) for t in core_new]
    if not core_new:
        return [WordDelta(EventKind.REMOVED, t) for t in core_old]
    if len(core_old) == 1 and len(core_new) == 1:
        return [WordDelta(EventKind.CHANGED, core_new[0])]

    deltas: list[WordDelta] = []
    removed: list[str] = []
    added: list[str] = []

    def flush_gap() -> None:
        if len(removed) == 1 and len(added) == 1:
            deltas.append(WordDelta(EventKind.CHANGED, added[0]))
        else:
            deltas.extend(WordDelta(EventKind.REMOVED, t) for t in removed)
            deltas.extend(WordDelta(EventKind.ADDED, t) for t in added)
        removed.clear()
        added.clear()

    table = _lcs_table(core_old, core_new)
    i = j = 0
    while i < len(core_old) and j < len(core_new):
        if core_old[i] == core_new[j]:
            flush_gap()
            i += 1
            j += 1
        elif table[i + 1][j] >= table[i][j + 1]:
            removed.append(core_old[i])
            i += 1
        else:
            added.append(core_new[j])
            j += 1
    removed.extend(core_old[i:])
    added.extend(core_new[j:])
    flush_gap()
    return deltas


def abstract_token(
    token: str, dictionary: Dictionary, whitelist: Whitelist
) -> tuple[frozenset[int], Optional[str]]:
    """Reduce one token to (category-id set, whitelisted form or None).

    Matching runs on the case-folded token: literal entries by equality, stem
    entries by prefix; the category set is the union over all matches. The
    raw token is returned only when its folded form is whitelisted.
    """
    if not token:
        raise ValueError("token must be non-empty")
    folded = token.casefold()
    cats = dictionary.lookup(folded)
    return cats, folded if folded in whitelist else None


class _PendingWord:
    """Trailing word in progress, plus what finalizing or abandoning it means.

    ``prior_committed`` is set when the word reopened an already-emitted word
    (its separator was deleted); ``replaced`` when a different in-progress
    word previously occupied the slot.
    """

    __slots__ = ("text", "replaced", "prior_committed")

    def __init__(self, text: str, replaced: bool = False, prior_committed: Optional[str] = None):
        self.text = text
        self.replaced = replaced
        self.prior_committed = prior_committed

    def finalize_kind(self) -> Optional[EventKind]:
        if self.prior_committed is not None:
            if self.text == self.prior_committed:
                return None  # restored unchanged
            return EventKind.CHANGED
        if self.replaced:
            return EventKind.CHANGED
        return EventKind.ADDED

    def abandon_delta(self) -> Optional[WordDelta]:
        if self.prior_committed is not None:
            return WordDelta(EventKind.REMOVED, self.prior_committed)
        return None


def _prefix_related(a: str, b: str) -> bool:
    return a.startswith(b) or b.startswith(a)


class _SessionDiffer:
    """Per-session diff state: committed token view plus the pending slot."""

    __slots__ = ("committed", "pending")

    def __init__(self) -> None:
        self.committed: list[str] = []
        self.pending: Optional[_PendingWord] = None

    def push(self, content: str) -> list[WordDelta]:
        tokens = tokenize(content)
        in_progress = _ends_in_token(content) and bool(tokens)
        finalized = tokens[:-1] if in_progress else tokens
        deltas = diff_tokens(self.committed, finalized)
        out: list[WordDelta] = []
        pending = self.pending

        if pending is not None:
            consumed = False
            for idx, delta in enumerate(deltas):
                if delta.kind is EventKind.ADDED and _prefix_related(delta.token, pending.text):
                    pending.text = delta.token  # the finalized form of the word
                    kind = pending.finalize_kind()
                    deltas.pop(idx)
                    if kind is not None:
                        deltas.insert(idx, WordDelta(kind, delta.token))
                    consumed = True
                    break
            if consumed:
                pending = None
            elif in_progress and _prefix_related(pending.text, tokens[-1]):
                pending.text = tokens[-1]  # same word still being typed
            elif in_progress:
                pending = _PendingWord(
                    tokens[-1], replaced=True, prior_committed=pending.prior_committed
                )
            else:
                abandoned = pending.abandon_delta()
                if abandoned is not None:
                    out.append(abandoned)
                pending = None

        if in_progress and pending is None:
            # A committed word whose trailing separator was deleted reopens
            # as the pending word instead of counting as removed.
            reopened: Optional[str] = None
            for idx in range(len(deltas) - 1, -1, -1):
                delta = deltas[idx]
                if delta.kind is EventKind.REMOVED and _prefix_related(delta.token, tokens[-1]):
                    reopened = delta.token
                    deltas.pop(idx)
                    break
            pending = _PendingWord(tokens[-1], prior_committed=reopened)

        out.extend(deltas)
        self.committed = finalized
        self.pending = pending
        return out

    def finish(self) -> list[WordDelta]:
        pending, self.pending = self.pending, None
        if pending is None:
            return []
        kind = pending.finalize_kind()
        if kind is None:
            return []
        return [WordDelta(kind, pending.text)]


def process_stream(
    events: Iterable[tuple[str, FieldSnapshotEvent]],
    dictionary: Dictionary,
    whitelist: Whitelist,
) -> Iterator[WordEvent]:
    """Transform a session-keyed snapshot stream into abstracted word events.

    ``events`` must be (session_id, event) pairs sorted by (participant, ts)
    with session-contiguous ordering, as produced by
    :func:`motivelog.sessions.assign_sessions`. REMOVED events are emitted;
    filtering them is the aggregation stage's job.

    Raises :class:`UnsortedInputError` when timestamps regress within a
    participant.
    """
    differ: Optional[_SessionDiffer] = None
    cur_sid: Optional[str] = None
    cur_event: Optional[FieldSnapshotEvent] = None
    last_ts_by_participant: dict[str, int] = {}
    cache: dict[str, tuple[frozenset[int], Optional[str]]] = {}

    def abstracted(ts: int, ev: FieldSnapshotEvent, sid: str, delta: WordDelta) -> WordEvent:
        hit = cache.get(delta.token)
        if hit is None:
            if len(cache) > 200_000:
                cache.clear()
            hit = abstract_token(delta.token, dictionary, whitelist)
            cache[delta.token] = hit
        cats, wl_token = hit
        return WordEvent(
            ts=ts,
            participant_id=ev.participant_id,
            app_id=ev.app_id,
            session_id=sid,
            kind=delta.kind,
            category_ids=cats,
            whitelist_token=wl_token,
        )

    for sid, event in events:
        last = last_ts_by_participant.get(event.participant_id)
        if last is not None and event.ts < last:
            raise UnsortedInputError(
                f"timestamp regression for participant {event.participant_id}: "
                f"{event.ts} after {last}"
            )
        last_ts_by_participant[event.participant_id] = event.ts

        if sid != cur_sid:
            if differ is not None and cur_event is not None and cur_sid is not None:
                for delta in differ.finish():
                    yield abstracted(cur_event.ts, cur_event, cur_sid, delta)
            differ = _SessionDiffer()
            cur_sid = sid
        assert differ is not None
        for delta in differ.push(event.content):
            yield abstracted(event.ts, event, sid, delta)
        cur_event = event

    if differ is not None and cur_event is not None and cur_sid is not None:
        for delta in differ.finish():
            yield abstracted(cur_event.ts, cur_event, cur_sid, delta)
