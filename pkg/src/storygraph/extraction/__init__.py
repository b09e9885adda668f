"""Story-to-components extraction: prompts, backends, parsers."""

from .backends import BackendReply, ChatHttpBackend, ReplayFixtureBackend
from .config import KNOWN_BACKENDS, ExtractorConfig
from .connector import extract_components, extract_many, make_backend
from .parsing import (
    components_from_records,
    extract_first_json,
    parse_benefit_response,
    parse_structured_response,
    parse_unstructured_response,
)
from .prompts import (
    BENEFIT_SYSTEM_PROMPT,
    HUMAN_TIP,
    MAIN_SYSTEM_PROMPT,
    PROMPT_CATALOG_VERSION,
    PromptTemplate,
    benefit_prompt,
    few_shot_records,
    main_prompt,
    render_prompt,
    validate_template,
)
from .rule_based import rule_based_extract
from .types import (
    ComponentNode,
    ComponentRelationship,
    DropCounts,
    ExtractionRecord,
    KgComponents,
)

__all__ = [
    "BackendReply",
    "ChatHttpBackend",
    "ReplayFixtureBackend",
    "KNOWN_BACKENDS",
    "ExtractorConfig",
    "extract_components",
    "extract_many",
    "make_backend",
    "components_from_records",
    "extract_first_json",
    "parse_benefit_response",
    "parse_structured_response",
    "parse_unstructured_response",
    "BENEFIT_SYSTEM_PROMPT",
    "HUMAN_TIP",
    "MAIN_SYSTEM_PROMPT",
    "PROMPT_CATALOG_VERSION",
    "PromptTemplate",
    "benefit_prompt",
    "few_shot_records",
    "main_prompt",
    "render_prompt",
    "validate_template",
    "rule_based_extract",
    "ComponentNode",
    "ComponentRelationship",
    "DropCounts",
    "ExtractionRecord",
    "KgComponents",
]
