"""Exception hierarchy shared across the toolchain."""

from __future__ import annotations


class StoryGraphError(Exception):
    """Base class for all toolchain errors."""


class BacklogParseError(StoryGraphError):
    """Backlog file is not valid JSON."""

    def __init__(self, message: str, byte_offset: int | None = None):
        super().__init__(message)
        self.byte_offset = byte_offset


class BacklogSchemaError(StoryGraphError):
    """Backlog JSON does not match the annotated-story schema."""


class TemplateError(StoryGraphError):
    """Prompt template is malformed (e.g. missing the input placeholder)."""


class ConfigError(StoryGraphError):
    """Extractor or sink configuration is invalid."""


class BackendError(StoryGraphError):
    """Language-model backend failed after exhausting retries."""


class ResponseParseError(StoryGraphError):
    """Backend response could not be converted into graph components.

    The unparsed payload is kept on ``raw`` so callers can log it.
    """

    def __init__(self, message: str, raw: str | None = None):
        super().__init__(message)
        self.raw = raw


class TransformError(StoryGraphError):
    """Graph assembly precondition violated."""


class EvaluationError(StoryGraphError):
    """Metric computation received undefined input."""


class SinkError(StoryGraphError):
    """Graph persistence failed."""
