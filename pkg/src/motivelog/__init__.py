"""motivelog: privacy-preserving keyboard-log abstraction and input-motive
analytics."""

__version__ = "0.1.0"

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
    REDACTED,
    TextInputRecord,
    Whitelist,
    WordEvent,
    normalize_prompt,
)

__all__ = [
    "AppCategoryMap",
    "Dictionary",
    "EventKind",
    "FieldSnapshotEvent",
    "KeywordRuleSet",
    "MappingEntry",
    "Motive",
    "MotiveMapping",
    "Provenance",
    "REDACTED",
    "TextInputRecord",
    "Whitelist",
    "WordEvent",
    "normalize_prompt",
    "__version__",
]
