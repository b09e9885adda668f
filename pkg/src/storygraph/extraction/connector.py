"""Two-step extraction: main chain, then benefit chain, then merge.

The main prompt yields persona, action, and entity nodes plus the TRIGGERS
and TARGETS edges; the benefit prompt yields at most one benefit text.  The
merge keeps at most one Benefit node, preferring the dedicated chain's
answer over anything the main chain produced.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor

from ..errors import ResponseParseError, StoryGraphError
from ..model import NodeKind
from .backends import BackendReply, ChatHttpBackend, ReplayFixtureBackend
from .config import ExtractorConfig
from .parsing import (
    components_from_records,
    extract_first_json,
    parse_benefit_response,
    parse_structured_response,
)
from .prompts import benefit_prompt, main_prompt, render_prompt
from .rule_based import rule_based_extract
from .types import ComponentNode, DropCounts, KgComponents

log = logging.getLogger(__name__)


def make_backend(config: ExtractorConfig):
    """Build the chat backend for a config; None for the rule-based path."""
    config.validate()
    if config.backend == "chat-http":
        return ChatHttpBackend(config)
    if config.backend == "replay-fixture":
        return ReplayFixtureBackend.from_path(config.fixture_path)
    return None


def _parse_main_reply(reply: BackendReply, drops: DropCounts | None) -> KgComponents:
    if reply.structured is not None:
        return parse_structured_response(reply.structured, drops)
    raw = reply.content or ""
    obj = extract_first_json(raw)
    if isinstance(obj, dict) and ("nodes" in obj or "relationships" in obj):
        return parse_structured_response(obj, drops)
    if isinstance(obj, dict):
        obj = [obj]
    if not isinstance(obj, list):
        raise ResponseParseError(
            f"main response JSON is a {type(obj).__name__}, expected records or a graph",
            raw=raw,
        )
    return components_from_records(obj, drops, raw=raw)


def _merge_benefit(
    components: KgComponents, benefit: str | None, drops: DropCounts | None
) -> KgComponents:
    """Reduce to at most one Benefit node.

    The benefit chain's answer wins; main-chain benefit nodes survive only
    when that chain stayed silent.  Edges touching a removed benefit node
    go with it.
    """
    main_benefits = [n for n in components.nodes if n.kind is NodeKind.BENEFIT]
    final = benefit if benefit else (main_benefits[0].id if main_benefits else None)

    nodes = [n for n in components.nodes if n.kind is not NodeKind.BENEFIT]
    removed = {(n.kind, n.id) for n in main_benefits}
    rels = []
    for rel in components.relationships:
        if (rel.source_kind, rel.source_id) in removed or (
            rel.target_kind,
            rel.target_id,
        ) in removed:
            if drops is not None:
                drops.relationships += 1
            continue
        rels.append(rel)
    if drops is not None and main_benefits:
        extra = len(main_benefits) - (0 if benefit else 1)
        drops.nodes += max(extra, 0)

    if final:
        nodes.append(ComponentNode(final, NodeKind.BENEFIT))
    return KgComponents(nodes=nodes, relationships=rels)


def extract_components(
    config: ExtractorConfig,
    story_text: str,
    *,
    backend=None,
    drops: DropCounts | None = None,
) -> KgComponents:
    """Run the full extraction conversation for one story."""
    if not story_text or not story_text.strip():
        raise ValueError("story_text must be non-empty")
    config.validate()
    if config.backend == "rule-based":
        return rule_based_extract(story_text)
    if backend is None:
        backend = make_backend(config)

    main_messages = render_prompt(main_prompt(config.supports_function_calls), story_text)
    reply = backend.run_main(story_text, main_messages)
    try:
        components = _parse_main_reply(reply, drops)
    except ResponseParseError:
        if not config.retry_parse_errors:
            raise
        log.warning("main response unparseable, re-asking once")
        reply = backend.run_main(story_text, main_messages)
        components = _parse_main_reply(reply, drops)

    benefit_messages = render_prompt(benefit_prompt(), story_text)
    breply = backend.run_benefit(story_text, benefit_messages)
    benefit = parse_benefit_response(
        breply.structured if breply.structured is not None else breply.content
    )
    return _merge_benefit(components, benefit, drops)


def extract_many(
    config: ExtractorConfig,
    story_texts: list[str],
    *,
    drops: DropCounts | None = None,
) -> list[KgComponents | StoryGraphError]:
    """Extract a batch, bounding in-flight requests.

    Results line up with the input order.  A story that fails with a
    toolchain error contributes the exception instead of components, so one
    bad story never sinks the batch.
    """
    config.validate()
    backend = make_backend(config)

    def one(text: str) -> tuple[KgComponents, DropCounts]:
        local = DropCounts()
        result = extract_components(config, text, backend=backend, drops=local)
        return result, local

    results: list[KgComponents | StoryGraphError] = []
    with ThreadPoolExecutor(max_workers=config.max_concurrency) as pool:
        futures = [pool.submit(one, text) for text in story_texts]
        for future in futures:
            try:
                components, local = future.result()
            except StoryGraphError as exc:
                results.append(exc)
                continue
            if drops is not None:
                drops.merge(local)
            results.append(components)
    return results
