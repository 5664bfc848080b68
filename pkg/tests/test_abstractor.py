from functools import lru_cache

from hypothesis import given, settings, strategies as st

from motivelog.abstractor import (
    WordDelta,
    abstract_token,
    diff_tokens,
    process_stream,
    tokenize,
)
from motivelog.io import word_event_to_json
from motivelog.model import (
    Dictionary,
    EventKind,
    FieldSnapshotEvent,
    Whitelist,
)
from motivelog.sessions import assign_sessions


class TestTokenize:
    def test_basic(self):
        assert tokenize("hello world") == ["hello", "world"]

    def test_empty(self):
        assert tokenize("") == []

    def test_punctuation_separators(self):
        assert tokenize("don't stop—now") == ["don't", "stop", "now"]

    def test_unicode_whitespace_and_digits(self):
        assert tokenize("a1 b2 c") == ["a1", "b2", "c"]

    def test_underscore_separates(self):
        assert tokenize("a_b") == ["a", "b"]

    @given(st.text(max_size=60))
    def test_deterministic_and_no_separators_in_tokens(self, text):
        tokens = tokenize(text)
        assert tokens == tokenize(text)
        for token in tokens:
            assert token
            assert not any(ch.isspace() for ch in token)


# --- independent LCS-length oracle for diff_tokens -------------------------


def lcs_length(old: tuple, new: tuple) -> int:
    @lru_cache(maxsize=None)
    def rec(i: int, j: int) -> int:
        if i == len(old) or j == len(new):
            return 0
        if old[i] == new[j]:
            return 1 + rec(i + 1, j + 1)
        return max(rec(i + 1, j), rec(i, j + 1))

    return rec(0, 0)


tokens_lists = st.lists(st.sampled_from(["a", "b", "c", "d", "ee"]), max_size=8)


class TestDiffTokens:
    def test_changed_merge(self):
        assert diff_tokens(["hi", "there"], ["hi", "friends"]) == [
            WordDelta(EventKind.CHANGED, "friends")
        ]

    def test_added_from_empty(self):
        assert diff_tokens([], ["hi"]) == [WordDelta(EventKind.ADDED, "hi")]

    def test_removed_middle(self):
        assert diff_tokens(["a", "b", "c"], ["a", "c"]) == [
            WordDelta(EventKind.REMOVED, "b")
        ]

    def test_no_merge_for_two_removed_one_added(self):
        deltas = diff_tokens(["a", "x", "y", "b"], ["a", "z", "b"])
        kinds = sorted(d.kind.value for d in deltas)
        assert kinds == ["added", "removed", "removed"]

    @given(tokens_lists)
    def test_identity(self, tokens):
        assert diff_tokens(tokens, tokens) == []

    @given(tokens_lists, tokens_lists)
    def test_counts_match_lcs_oracle(self, old, new):
        deltas = diff_tokens(old, new)
        adds = sum(d.kind in (EventKind.ADDED, EventKind.CHANGED) for d in deltas)
        removes = sum(d.kind in (EventKind.REMOVED, EventKind.CHANGED) for d in deltas)
        lcs = lcs_length(tuple(old), tuple(new))
        assert adds == len(new) - lcs
        assert removes == len(old) - lcs


class TestAbstractToken:
    DICT = Dictionary.from_entries({1: "one"}, [("happ*", {1})])

    def test_stem_prefix_match(self):
        assert abstract_token("happiness", self.DICT, Whitelist.of([])) == ({1}, None)

    def test_no_match(self):
        assert abstract_token("zzz", Dictionary.from_entries({}, []), Whitelist.of([])) == (
            frozenset(),
            None,
        )

    def test_whitelist_returns_folded(self):
        cats, wl = abstract_token("Haus", Dictionary.from_entries({}, []), Whitelist.of(["haus"]))
        assert cats == frozenset() and wl == "haus"


def _run(contents, dictionary=None, whitelist=None, participant="p"):
    dictionary = dictionary or Dictionary.from_entries({}, [])
    whitelist = whitelist or Whitelist.of([])
    events = [
        FieldSnapshotEvent(
            ts=1000 * i,
            participant_id=participant,
            app_id="app",
            field_id="f1",
            content=content,
        )
        for i, content in enumerate(contents)
    ]
    return list(process_stream(assign_sessions(events), dictionary, whitelist))


class TestProcessStream:
    def test_pending_word_emits_once(self):
        out = _run(["h", "he", "hey "])
        assert [(w.kind) for w in out] == [EventKind.ADDED]

    def test_single_snapshot_session_end(self):
        out = _run(["ok"])
        assert [(w.kind) for w in out] == [EventKind.ADDED]

    def test_pending_replacement_is_changed(self):
        out = _run(["good day", "good night"])
        assert [w.kind for w in out] == [EventKind.ADDED, EventKind.CHANGED]

    def test_conservation_left_to_right(self):
        words = ["alpha", "beta", "gamma", "delta"]
        contents = [" ".join(words[: i + 1]) + " " for i in range(len(words))]
        out = _run(contents)
        assert [w.kind for w in out] == [EventKind.ADDED] * 4

    def test_removed_events_are_emitted(self):
        out = _run(["alpha beta ", "alpha "])
        assert [w.kind for w in out] == [EventKind.ADDED, EventKind.ADDED, EventKind.REMOVED]

    def test_unsorted_input_raises(self):
        events = [
            FieldSnapshotEvent(ts=10, participant_id="p", app_id="a", field_id="f", content="x "),
            FieldSnapshotEvent(ts=5, participant_id="p", app_id="a", field_id="f", content="x y "),
        ]
        import pytest

        from motivelog.model import UnsortedInputError

        with pytest.raises(UnsortedInputError):
            list(process_stream(assign_sessions(events), Dictionary.from_entries({}, []), Whitelist.of([])))

    def test_determinism(self):
        contents = ["a", "a b", "a b c ", "a c "]
        assert _run(contents) == _run(contents)


# --- the privacy invariant --------------------------------------------------

# Letters drawn outside ASCII so random tokens cannot collide with ids or
# numbers in the serialized output.
_LETTERS = "αβγδεζηθικλμνξπρστυφχψωабвгдежзийклмнопрстуфхцчшщэюя"


def _random_session(rng):
    words = [
        "".join(rng.choice(_LETTERS) for _ in range(rng.randint(2, 9)))
        for _ in range(rng.randint(1, 6))
    ]
    contents = []
    text = ""
    for word in words:
        for i in range(1, len(word) + 1, rng.randint(1, 4)):
            contents.append(text + word[:i])
        text = text + word + rng.choice([" ", ", ", "! ", "　"])
        contents.append(text)
    return words, contents


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=10_000_000))
def test_privacy_no_raw_tokens_in_serialized_output(seed):
    import random

    rng = random.Random(seed)
    words, contents = _random_session(rng)
    wl_members = {w.casefold() for w in words[:1]} if rng.random() < 0.4 else set()
    dictionary = Dictionary.from_entries(
        {1: "cat"}, [(words[0].casefold()[:2] + "*", {1})] if rng.random() < 0.5 else []
    )
    out = _run(contents, dictionary, Whitelist.of(list(wl_members)))
    serialized = "\n".join(word_event_to_json(w) for w in out)
    for content in contents:
        for token in tokenize(content):
            if len(token) < 2 or token.casefold() in wl_members:
                continue
            if any(token.casefold() in member for member in wl_members):
                # inside a whitelisted word: already disclosed by the whitelist
                continue
            assert token not in serialized
