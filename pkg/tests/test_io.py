import io as stdio

import pytest

from motivelog import io as mio
from motivelog.model import (
    AppCategoryMap,
    Dictionary,
    EventKind,
    FieldSnapshotEvent,
    KeywordRuleSet,
    MappingEntry,
    Motive,
    MotiveMapping,
    Provenance,
    TextInputRecord,
    Whitelist,
    WordEvent,
)


def test_event_round_trip():
    event = FieldSnapshotEvent(
        ts=12, participant_id="p1", app_id="com.app", field_id="f9",
        content="héllo wörld", prompt="Type a message",
    )
    assert mio.event_from_json(mio.event_to_json(event)) == event
    bare = FieldSnapshotEvent(ts=0, participant_id="p", app_id="a", field_id="f", content="")
    line = mio.event_to_json(bare)
    assert '"prompt"' not in line
    assert mio.event_from_json(line) == bare


def test_word_event_round_trip():
    event = WordEvent(
        ts=5, participant_id="p", app_id="a", session_id="s",
        kind=EventKind.CHANGED, category_ids=frozenset({3, 1}), whitelist_token="haus",
    )
    assert mio.word_event_from_json(mio.word_event_to_json(event)) == event


def test_record_round_trip():
    record = TextInputRecord(
        session_id="s", participant_id="p", app_id="a",
        words_added=3, words_changed=1, words_removed=2, matched_words=2,
        many_hot=frozenset({2, 7}), start_ts=1, end_ts=9,
        prompt_text="suche", motive=Motive.SEARCH, app_category="System",
    )
    assert mio.record_from_json(mio.record_to_json(record)) == record


def test_records_stream_round_trip():
    records = [
        TextInputRecord(
            session_id=f"s{i}", participant_id="p", app_id="a",
            words_added=i + 1, words_changed=0, words_removed=0, matched_words=0,
            many_hot=frozenset(), start_ts=0, end_ts=0,
        )
        for i in range(3)
    ]
    buf = stdio.StringIO()
    assert mio.write_records(buf, records) == 3
    buf.seek(0)
    assert list(mio.read_records(buf)) == records


def test_dictionary_format_round_trip():
    d = Dictionary.from_entries(
        {1: "affect", 2: "social"}, [("happ*", {1}), ("haus", {1, 2})]
    )
    text = mio.dictionary_to_text(d)
    parsed = mio.parse_dictionary(text)
    assert parsed.categories == d.categories
    assert set(parsed.entries) == set(d.entries)
    assert parsed.lookup("happiness") == {1}


def test_dictionary_parse_liwc_style():
    text = "%\n1\taffect\n2\tposemo\n%\nhapp*\t1 2\ntraurig\t1\n"
    d = mio.parse_dictionary(text)
    assert d.lookup("happy") == {1, 2}
    assert d.lookup("traurig") == {1}


def test_whitelist_round_trip():
    wl = Whitelist.of(["Haus", "baum"])
    assert mio.parse_whitelist(mio.whitelist_to_text(wl)).words == wl.words
    assert mio.parse_whitelist("# comment\nhaus\n\n").words == {"haus"}


def test_mapping_round_trip():
    mapping = MotiveMapping(
        entries={
            "type a message": MappingEntry(Motive.MESSAGING, Provenance.AUTO_KEYWORD),
            "write a caption": MappingEntry(
                Motive.POSTING, Provenance.MANUAL_CODED, coder="R2+R3", round=2
            ),
        }
    )
    parsed = mio.parse_mapping(mio.mapping_to_text(mapping))
    assert parsed.entries == mapping.entries


def test_mapping_rejects_bad_line():
    with pytest.raises(ValueError):
        mio.parse_mapping("just-a-prompt-no-motive\n")


def test_rater_codes_parse():
    text = "tweet your reply\tCommenting\tManualCoded\tR2\t2\n"
    assert mio.parse_rater_codes(text) == {"tweet your reply": Motive.COMMENTING}


def test_app_categories_round_trip():
    cats = AppCategoryMap(categories={"com.a": "Communication", "com.b": "System"})
    assert mio.parse_app_categories(mio.app_categories_to_text(cats)).categories == cats.categories


def test_app_categories_duplicate_rejected():
    with pytest.raises(ValueError):
        mio.parse_app_categories("com.a\tX\ncom.a\tY\n")


def test_rules_round_trip():
    rules = KeywordRuleSet.default()
    assert mio.parse_rules(mio.rules_to_text(rules)).rules == rules.rules


def test_manifest_hashes(tmp_path):
    f = tmp_path / "x.txt"
    f.write_text("abc", encoding="utf-8")
    manifest = mio.build_manifest("cmd", "0.1.0", {"k": 1}, [f], [])
    assert manifest.inputs[str(f)] == (
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    )
    assert '"command": "cmd"' in manifest.to_json()
