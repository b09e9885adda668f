"""Annotated user-story backlogs: parsing, validation, serialization.

A backlog file is a JSON array of story objects keyed by PID, Text, Persona,
Action (Primary/Secondary), Entity (Primary/Secondary), Benefit, Triggers,
Targets, and Contains.  ``Contains`` is carried through untouched.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, BinaryIO

from .errors import BacklogParseError, BacklogSchemaError

log = logging.getLogger(__name__)

_PID_TAG = re.compile(r"^\s*#[^#]*#\s*")

_REQUIRED_KEYS = ("PID", "Text", "Persona", "Action", "Entity", "Triggers", "Targets")


@dataclass
class AnnotatedStory:
    pid: str
    text: str
    personas: list[str] = field(default_factory=list)
    primary_actions: list[str] = field(default_factory=list)
    secondary_actions: list[str] = field(default_factory=list)
    primary_entities: list[str] = field(default_factory=list)
    secondary_entities: list[str] = field(default_factory=list)
    benefit: str | None = None
    triggers: list[tuple[str, str]] = field(default_factory=list)
    targets: list[tuple[str, str]] = field(default_factory=list)
    contains: list[Any] = field(default_factory=list)

    @property
    def actions(self) -> list[str]:
        return self.primary_actions + self.secondary_actions

    @property
    def entities(self) -> list[str]:
        return self.primary_entities + self.secondary_entities


@dataclass
class Backlog:
    name: str
    stories: list[AnnotatedStory] = field(default_factory=list)


def strip_pid_tag(text: str) -> str:
    """Remove one leading ``#...#`` marker plus following whitespace.

    Applied once only, so a second marker survives:
    ``"#G02##G02# rest"`` becomes ``"#G02# rest"``.  Idempotent on text
    with at most one leading marker.
    """
    return _PID_TAG.sub("", text, count=1)


def clean_story_text(story: AnnotatedStory) -> str:
    return strip_pid_tag(story.text)


def _string_list(value: Any, context: str) -> list[str]:
    if value is None:
        return []
    if not isinstance(value, list):
        raise BacklogSchemaError(f"{context}: expected a list, got {type(value).__name__}")
    return [str(item) for item in value]


def _pair_list(value: Any, context: str) -> list[tuple[str, str]]:
    pairs = []
    if value is None:
        return pairs
    if not isinstance(value, list):
        raise BacklogSchemaError(f"{context}: expected a list, got {type(value).__name__}")
    for i, item in enumerate(value):
        if not isinstance(item, list) or len(item) != 2:
            raise BacklogSchemaError(f"{context}[{i}]: expected a two-element pair")
        pairs.append((str(item[0]), str(item[1])))
    return pairs


def story_from_dict(obj: dict[str, Any], index: int) -> AnnotatedStory:
    """Build a story from one backlog array element.

    Raises BacklogSchemaError naming the offending key and array index.
    """
    if not isinstance(obj, dict):
        raise BacklogSchemaError(f"story {index}: expected an object")
    for key in _REQUIRED_KEYS:
        if key not in obj:
            raise BacklogSchemaError(f"story {index}: missing required key '{key}'")

    action = obj["Action"] if isinstance(obj["Action"], dict) else {}
    entity = obj["Entity"] if isinstance(obj["Entity"], dict) else {}
    benefit_raw = obj.get("Benefit")
    benefit = None
    if isinstance(benefit_raw, str) and benefit_raw != "":
        benefit = benefit_raw

    where = f"story {index}"
    return AnnotatedStory(
        pid=str(obj["PID"]),
        text=str(obj["Text"]),
        personas=_string_list(obj["Persona"], f"{where}: Persona"),
        primary_actions=_string_list(action.get("Primary Action"), f"{where}: Primary Action"),
        secondary_actions=_string_list(action.get("Secondary Action"), f"{where}: Secondary Action"),
        primary_entities=_string_list(entity.get("Primary Entity"), f"{where}: Primary Entity"),
        secondary_entities=_string_list(entity.get("Secondary Entity"), f"{where}: Secondary Entity"),
        benefit=benefit,
        triggers=_pair_list(obj["Triggers"], f"{where}: Triggers"),
        targets=_pair_list(obj["Targets"], f"{where}: Targets"),
        contains=list(obj.get("Contains", [])),
    )


def story_to_dict(story: AnnotatedStory) -> dict[str, Any]:
    """Serialize back to the backlog schema.

    An absent benefit is written as the empty string, matching how the
    annotation files express it.
    """
    return {
        "PID": story.pid,
        "Text": story.text,
        "Persona": list(story.personas),
        "Action": {
            "Primary Action": list(story.primary_actions),
            "Secondary Action": list(story.secondary_actions),
        },
        "Entity": {
            "Primary Entity": list(story.primary_entities),
            "Secondary Entity": list(story.secondary_entities),
        },
        "Benefit": story.benefit if story.benefit is not None else "",
        "Triggers": [list(pair) for pair in story.triggers],
        "Targets": [list(pair) for pair in story.targets],
        "Contains": list(story.contains),
    }


def parse_backlog_file(raw: bytes | BinaryIO, name: str = "") -> Backlog:
    """Parse a backlog from raw JSON bytes.

    Malformed JSON raises BacklogParseError carrying the byte offset of the
    failure; structural problems raise BacklogSchemaError.  An empty array
    is rejected: a backlog without stories is useless downstream.
    """
    data = raw.read() if hasattr(raw, "read") else raw
    if isinstance(data, bytes):
        text = data.decode("utf-8")
    else:
        text = data
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise BacklogParseError(
            f"invalid JSON at byte offset {offset}: {exc.msg}", byte_offset=offset
        ) from exc

    if not isinstance(payload, list):
        raise BacklogSchemaError("expected a JSON array of stories")
    if not payload:
        raise BacklogSchemaError("empty backlog")

    stories = [story_from_dict(obj, i) for i, obj in enumerate(payload)]
    return Backlog(name=name, stories=stories)


def load_backlog(path: str | Path) -> Backlog:
    path = Path(path)
    with path.open("rb") as fh:
        return parse_backlog_file(fh, name=path.stem)


def backlog_to_json(backlog: Backlog) -> bytes:
    payload = [story_to_dict(story) for story in backlog.stories]
    return (json.dumps(payload, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def validate_story(story: AnnotatedStory) -> list[str]:
    """Referential-integrity check; returns violation descriptions.

    Triggers must reference annotated personas and primary actions; targets
    must lead out of some annotated action.
    """
    problems = []
    if not story.text.strip():
        problems.append("text is empty")
    for persona, action in story.triggers:
        if persona not in story.personas:
            problems.append(f"triggers persona '{persona}' not among personas")
        if action not in story.primary_actions:
            problems.append(f"triggers action '{action}' not among primary actions")
    all_actions = set(story.actions)
    for action, _entity in story.targets:
        if action not in all_actions:
            problems.append(f"targets action '{action}' not among actions")
    return problems


def drop_invalid_stories(backlog: Backlog) -> tuple[Backlog, list[tuple[AnnotatedStory, list[str]]]]:
    """Split a backlog into valid stories and skipped (story, problems) pairs.

    Skipping is logged per story so silent data loss cannot happen.
    """
    kept = []
    skipped = []
    for story in backlog.stories:
        problems = validate_story(story)
        if problems:
            skipped.append((story, problems))
            log.warning(
                "skipping story %s in backlog %s: %s",
                story.pid, backlog.name, "; ".join(problems),
            )
        else:
            kept.append(story)
    return Backlog(name=backlog.name, stories=kept), skipped


def load_corpus(directory: str | Path) -> list[Backlog]:
    """Load every ``*.json`` backlog in a directory, sorted by file name."""
    directory = Path(directory)
    backlogs = []
    for path in sorted(directory.glob("*.json")):
        backlogs.append(load_backlog(path))
    return backlogs
