"""File contracts: JSONL event/word/session streams, the dictionary and
whitelist formats, mapping/appcats/rules TSVs, and run manifests.

All formats are UTF-8 and line-delimited so million-event corpora stream
with bounded memory.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Iterator

from .model import (
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
    normalize_prompt,
)

# ---------------------------------------------------------------------------
# events.jsonl


def event_to_json(event: FieldSnapshotEvent) -> str:
    obj: dict = {
        "ts": event.ts,
        "pid": event.participant_id,
        "app": event.app_id,
        "field": event.field_id,
    }
    if event.prompt is not None:
        obj["prompt"] = event.prompt
    obj["content"] = event.content
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def event_from_json(line: str) -> FieldSnapshotEvent:
    obj = json.loads(line)
    return FieldSnapshotEvent(
        ts=obj["ts"],
        participant_id=obj["pid"],
        app_id=obj["app"],
        field_id=obj["field"],
        content=obj["content"],
        prompt=obj.get("prompt"),
    )


def read_events(fp: IO[str]) -> Iterator[FieldSnapshotEvent]:
    for line in fp:
        line = line.strip()
        if line:
            yield event_from_json(line)


def write_events(fp: IO[str], events: Iterable[FieldSnapshotEvent]) -> int:
    n = 0
    for event in events:
        fp.write(event_to_json(event))
        fp.write("\n")
        n += 1
    return n


# ---------------------------------------------------------------------------
# words.jsonl


def word_event_to_json(event) -> str:
    obj: dict = {
        "ts": event.ts,
        "pid": event.participant_id,
        "app": event.app_id,
        "sid": event.session_id,
        "kind": event.kind.value,
        "cats": sorted(event.category_ids),
    }
    if event.whitelist_token is not None:
        obj["wl"] = event.whitelist_token
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def word_event_from_json(line: str):
    from .model import WordEvent

    obj = json.loads(line)
    return WordEvent(
        ts=obj["ts"],
        participant_id=obj["pid"],
        app_id=obj["app"],
        session_id=obj["sid"],
        kind=EventKind(obj["kind"]),
        category_ids=frozenset(obj["cats"]),
        whitelist_token=obj.get("wl"),
    )


def read_word_events(fp: IO[str]) -> Iterator:
    for line in fp:
        line = line.strip()
        if line:
            yield word_event_from_json(line)


# ---------------------------------------------------------------------------
# sessions.jsonl


def record_to_json(record: TextInputRecord) -> str:
    obj: dict = {
        "sid": record.session_id,
        "pid": record.participant_id,
        "app": record.app_id,
    }
    if record.app_category is not None:
        obj["app_cat"] = record.app_category
    if record.prompt_text is not None:
        obj["prompt"] = record.prompt_text
    obj.update(
        {
            "motive": record.motive.value,
            "added": record.words_added,
            "changed": record.words_changed,
            "removed": record.words_removed,
            "total": record.total_words,
            "matched": record.matched_words,
            "cats": sorted(record.many_hot),
            "start_ts": record.start_ts,
            "end_ts": record.end_ts,
        }
    )
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def record_from_json(line: str) -> TextInputRecord:
    obj = json.loads(line)
    return TextInputRecord(
        session_id=obj["sid"],
        participant_id=obj["pid"],
        app_id=obj["app"],
        words_added=obj["added"],
        words_changed=obj["changed"],
        words_removed=obj["removed"],
        matched_words=obj["matched"],
        many_hot=frozenset(obj["cats"]),
        start_ts=obj["start_ts"],
        end_ts=obj["end_ts"],
        prompt_text=obj.get("prompt"),
        motive=Motive(obj["motive"]),
        app_category=obj.get("app_cat"),
    )


def read_records(fp: IO[str]) -> Iterator[TextInputRecord]:
    for line in fp:
        line = line.strip()
        if line:
            yield record_from_json(line)


def write_records(fp: IO[str], records: Iterable[TextInputRecord]) -> int:
    n = 0
    for record in records:
        fp.write(record_to_json(record))
        fp.write("\n")
        n += 1
    return n


# ---------------------------------------------------------------------------
# dictionary (.dic): '%'-delimited category header, then entry lines


def parse_dictionary(text: str) -> Dictionary:
    """Parse the closed-vocabulary dictionary format.

    A header between two '%' lines holds ``id<TAB>name`` category lines;
    the body holds ``pattern<TAB>id id ...`` entries, a trailing ``*``
    marking a stem prefix.
    """
    categories: dict[int, str] = {}
    entries: list[tuple[str, set[int]]] = []
    in_header = False
    header_done = False
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line == "%":
            if not header_done and not in_header:
                in_header = True
            else:
                in_header = False
                header_done = True
            continue
        if in_header:
            cat_id, _, name = line.partition("\t")
            categories[int(cat_id)] = name.strip()
        else:
            pattern, _, ids = line.partition("\t")
            entries.append((pattern.strip(), {int(tok) for tok in ids.split()}))
    return Dictionary.from_entries(categories, entries)


def dictionary_to_text(dictionary: Dictionary) -> str:
    lines = ["%"]
    for cat_id in sorted(dictionary.categories):
        lines.append(f"{cat_id}\t{dictionary.categories[cat_id]}")
    lines.append("%")
    for pattern, cats in dictionary.entries:
        lines.append(f"{pattern}\t" + " ".join(str(c) for c in sorted(cats)))
    return "\n".join(lines) + "\n"


def load_dictionary(path: str | Path) -> Dictionary:
    return parse_dictionary(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# whitelist: one word per line, '#' comments


def parse_whitelist(text: str) -> Whitelist:
    words = []
    for raw in text.splitlines():
        line = raw.strip()
        if line and not line.startswith("#"):
            words.append(line)
    return Whitelist.of(words)


def whitelist_to_text(whitelist: Whitelist) -> str:
    return "\n".join(sorted(whitelist.words)) + "\n"


def load_whitelist(path: str | Path) -> Whitelist:
    return parse_whitelist(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# mapping / rater-code TSV: prompt, motive, provenance, coder, round


def parse_mapping(text: str) -> MotiveMapping:
    entries: dict[str, MappingEntry] = {}
    for raw in text.splitlines():
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) < 2:
            raise ValueError(f"mapping line needs at least prompt and motive: {line!r}")
        prompt = normalize_prompt(fields[0])
        motive = Motive(fields[1])
        provenance = Provenance(fields[2]) if len(fields) > 2 and fields[2] else Provenance.MANUAL_CODED
        coder = fields[3] if len(fields) > 3 and fields[3] else None
        rnd = int(fields[4]) if len(fields) > 4 and fields[4] else None
        entries[prompt] = MappingEntry(
            motive=motive, provenance=provenance, coder=coder, round=rnd
        )
    return MotiveMapping(entries=entries)


def mapping_to_text(mapping: MotiveMapping) -> str:
    lines = ["# prompt\tmotive\tprovenance\tcoder\tround"]
    for prompt in sorted(mapping.entries):
        entry = mapping.entries[prompt]
        lines.append(
            "\t".join(
                [
                    prompt,
                    entry.motive.value,
                    entry.provenance.value,
                    entry.coder or "",
                    str(entry.round) if entry.round is not None else "",
                ]
            )
        )
    return "\n".join(lines) + "\n"


def load_mapping(path: str | Path) -> MotiveMapping:
    return parse_mapping(Path(path).read_text(encoding="utf-8"))


def parse_rater_codes(text: str) -> dict[str, Motive]:
    """Rater code files share the mapping schema; only prompt and motive
    matter for agreement computations."""
    mapping = parse_mapping(text)
    return {prompt: entry.motive for prompt, entry in mapping.entries.items()}


# ---------------------------------------------------------------------------
# app categories TSV: app_id, category


def parse_app_categories(text: str) -> AppCategoryMap:
    categories: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        app_id, _, category = line.partition("\t")
        if app_id in categories:
            raise ValueError(f"duplicate app_id: {app_id!r}")
        categories[app_id] = category.strip()
    return AppCategoryMap(categories=categories)


def app_categories_to_text(app_categories: AppCategoryMap) -> str:
    lines = ["# app_id\tcategory"]
    for app_id in sorted(app_categories.categories):
        lines.append(f"{app_id}\t{app_categories.categories[app_id]}")
    return "\n".join(lines) + "\n"


def load_app_categories(path: str | Path) -> AppCategoryMap:
    return parse_app_categories(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# keyword rules TSV: stem, motive (evaluation order = file order)


def parse_rules(text: str) -> KeywordRuleSet:
    rules: list[tuple[str, Motive]] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        stem, _, motive = line.partition("\t")
        rules.append((stem.casefold(), Motive(motive.strip())))
    return KeywordRuleSet(rules=tuple(rules))


def rules_to_text(rules: KeywordRuleSet) -> str:
    lines = ["# stem\tmotive (first match wins)"]
    for stem, motive in rules.rules:
        lines.append(f"{stem}\t{motive.value}")
    return "\n".join(lines) + "\n"


def load_rules(path: str | Path) -> KeywordRuleSet:
    return parse_rules(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# run manifest


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fp:
        for chunk in iter(lambda: fp.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class Manifest:
    command: str
    version: str
    config: dict
    inputs: dict[str, str]
    outputs: dict[str, str]

    def to_json(self) -> str:
        return json.dumps(
            {
                "command": self.command,
                "version": self.version,
                "config": self.config,
                "inputs": self.inputs,
                "outputs": self.outputs,
            },
            ensure_ascii=False,
            sort_keys=True,
        )


def build_manifest(
    command: str,
    version: str,
    config: dict,
    input_paths: Iterable[str | Path],
    output_paths: Iterable[str | Path],
) -> Manifest:
    return Manifest(
        command=command,
        version=version,
        config={k: v for k, v in sorted(config.items())},
        inputs={str(p): sha256_file(p) for p in input_paths},
        outputs={str(p): sha256_file(p) for p in output_paths},
    )
