"""Grouping of events into text-input sessions and aggregation into records.

A session is a maximal run of snapshot events by one participant on one field
activation; it ends when the (participant, app, field) key changes or the
inter-event gap exceeds the timeout. Word events of a session aggregate into
one :class:`~motivelog.model.TextInputRecord`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Optional

from .model import (
    AppCategoryMap,
    EventKind,
    FieldSnapshotEvent,
    Motive,
    TextInputRecord,
    UnsortedInputError,
    WordEvent,
    normalize_prompt,
)

DEFAULT_GAP_TIMEOUT_MS = 30_000


@dataclass(frozen=True, slots=True)
class SessionKeying:
    """Session-boundary configuration shared by every stage."""

    gap_timeout_ms: int = DEFAULT_GAP_TIMEOUT_MS


def make_session_id(participant_id: str, first_ts: int, field_id: str) -> str:
    return f"{participant_id}:{first_ts}:{field_id}"


def assign_sessions(
    events: Iterable[FieldSnapshotEvent],
    keying: SessionKeying = SessionKeying(),
) -> Iterator[tuple[str, FieldSnapshotEvent]]:
    """Attach a deterministic session id to each event.

    Events must be sorted by (participant_id, ts); a timestamp regression
    within one participant raises :class:`UnsortedInputError`. A new session
    starts when the (participant, app, field) key changes or the gap since
    the previous event exceeds the timeout.
    """
    cur_key: Optional[tuple[str, str, str]] = None
    cur_sid: Optional[str] = None
    last_ts = 0
    for event in events:
        key = (event.participant_id, event.app_id, event.field_id)
        if cur_key is not None and key[0] == cur_key[0] and event.ts < last_ts:
            raise UnsortedInputError(
                f"timestamp regression for participant {key[0]}: {event.ts} after {last_ts}"
            )
        if (
            cur_key is None
            or key != cur_key
            or event.ts - last_ts > keying.gap_timeout_ms
        ):
            cur_key = key
            cur_sid = make_session_id(event.participant_id, event.ts, event.field_id)
        last_ts = event.ts
        assert cur_sid is not None
        yield cur_sid, event


def collect_session_prompts(
    events: Iterable[FieldSnapshotEvent],
    keying: SessionKeying = SessionKeying(),
) -> dict[str, Optional[str]]:
    """Map session id -> normalized prompt of the session's first snapshot.

    Prompts can vanish once typing starts, so only the first event counts.
    Empty or whitespace-only prompts are treated as absent.
    """
    prompts: dict[str, Optional[str]] = {}
    for sid, event in assign_sessions(events, keying):
        if sid not in prompts:
            normalized = normalize_prompt(event.prompt) if event.prompt is not None else ""
            prompts[sid] = normalized or None
    return prompts


@dataclass
class SessionAudit:
    """Tally of sessions suppressed from the record stream."""

    suppressed_zero_word: int = 0


def build_records(
    word_events: Iterable[WordEvent],
    prompts: Mapping[str, Optional[str]],
    app_categories: AppCategoryMap = AppCategoryMap(),
    audit: Optional[SessionAudit] = None,
) -> Iterator[TextInputRecord]:
    """Aggregate session-contiguous word events into one record per session.

    Removed events count into ``words_removed`` but are excluded from
    ``total_words``, ``matched_words``, and the many-hot category set.
    Sessions whose total is zero are suppressed (and tallied when an audit
    object is supplied).
    """
    cur_sid: Optional[str] = None
    state: Optional[list] = None  # [pid, app, added, changed, removed, matched, cats, start, end]

    def emit(sid: str, s: list) -> Optional[TextInputRecord]:
        pid, app, added, changed, removed, matched, cats, start_ts, end_ts = s
        if added + changed == 0:
            if audit is not None:
                audit.suppressed_zero_word += 1
            return None
        prompt = prompts.get(sid)
        return TextInputRecord(
            session_id=sid,
            participant_id=pid,
            app_id=app,
            words_added=added,
            words_changed=changed,
            words_removed=removed,
            matched_words=matched,
            many_hot=frozenset(cats),
            start_ts=start_ts,
            end_ts=end_ts,
            prompt_text=prompt,
            motive=Motive.NO_PROMPT if prompt is None else Motive.UNLABELED,
            app_category=app_categories.get(app),
        )

    for event in word_events:
        if event.session_id != cur_sid:
            if state is not None and cur_sid is not None:
                record = emit(cur_sid, state)
                if record is not None:
                    yield record
            cur_sid = event.session_id
            state = [
                event.participant_id,
                event.app_id,
                0,
                0,
                0,
                0,
                set(),
                event.ts,
                event.ts,
            ]
        assert state is not None
        if event.kind is EventKind.ADDED:
            state[2] += 1
        elif event.kind is EventKind.CHANGED:
            state[3] += 1
        else:
            state[4] += 1
        if event.kind is not EventKind.REMOVED:
            if event.category_ids:
                state[5] += 1
                state[6].update(event.category_ids)
        if event.ts < state[7]:
            state[7] = event.ts
        if event.ts > state[8]:
            state[8] = event.ts

    if state is not None and cur_sid is not None:
        record = emit(cur_sid, state)
        if record is not None:
            yield record
