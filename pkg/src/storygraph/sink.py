"""Persist graph documents: parameterized Cypher, Neo4j, JSON export.

Every statement is fully parameterized; no node id or story text is ever
spliced into statement text.  MERGE keys on the label plus the id property,
so re-loading the same documents is idempotent.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence
from urllib.parse import urlsplit, urlunsplit

import requests

from .errors import SinkError
from .model import GraphDocument, NodeKind, RelKind, document_from_dict, document_to_dict

log = logging.getLogger(__name__)

DEFAULT_MAX_ID_LENGTH = 4000

_LABELS = {kind.value for kind in NodeKind} | {kind.value for kind in RelKind}


@dataclass
class SinkConfig:
    uri: str = "http://localhost:7474"
    user: str = "neo4j"
    password: str = ""
    database_name: str = "neo4j"
    batch_size: int = 100
    request_timeout: float = 60.0
    max_id_length: int = DEFAULT_MAX_ID_LENGTH

    @classmethod
    def from_env(cls, **overrides: Any) -> "SinkConfig":
        """Environment-backed defaults: NEO4J_URI, NEO4J_USER, NEO4J_PASSWORD."""
        config = cls(
            uri=os.environ.get("NEO4J_URI", cls.uri),
            user=os.environ.get("NEO4J_USER", cls.user),
            password=os.environ.get("NEO4J_PASSWORD", cls.password),
        )
        for key, value in overrides.items():
            if value is not None:
                setattr(config, key, value)
        return config


@dataclass(frozen=True)
class CypherStatement:
    text: str
    params: dict[str, Any] = field(default_factory=dict)
    is_node: bool = False


def _check_label(label: str) -> str:
    # Labels come from the NodeKind/RelKind enums, never from user data;
    # this guard keeps it that way.
    if label not in _LABELS:
        raise SinkError(f"illegal label {label!r}")
    return label


def to_cypher(
    doc: GraphDocument, max_id_length: int = DEFAULT_MAX_ID_LENGTH
) -> list[CypherStatement]:
    """One MERGE per node, then one per relationship.

    Ids beyond max_id_length are refused: they are almost certainly runaway
    model output and would bloat the MERGE key index.
    """
    statements = []
    for node in doc.nodes:
        if len(node.id) > max_id_length:
            raise SinkError(
                f"node id exceeds {max_id_length} characters "
                f"({len(node.id)}): {node.id[:60]!r}..."
            )
        label = _check_label(node.kind.value)
        text = f"MERGE (n:{label} {{id: $id}})"
        params: dict[str, Any] = {"id": node.id}
        if node.properties:
            text += " SET n += $props"
            params["props"] = dict(node.properties)
        statements.append(CypherStatement(text=text, params=params, is_node=True))

    for rel in doc.relationships:
        src_label = _check_label(rel.source.kind.value)
        tgt_label = _check_label(rel.target.kind.value)
        rel_type = _check_label(rel.kind.value)
        text = (
            f"MATCH (a:{src_label} {{id: $source_id}}) "
            f"MATCH (b:{tgt_label} {{id: $target_id}}) "
            f"MERGE (a)-[r:{rel_type}]->(b)"
        )
        params = {"source_id": rel.source.id, "target_id": rel.target.id}
        if rel.properties:
            text += " SET r = $props"
            params["props"] = dict(rel.properties)
        statements.append(CypherStatement(text=text, params=params))
    return statements


def _cypher_literal(value: Any) -> str:
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace("'", "\\'")
        escaped = escaped.replace("\r", "\\r").replace("\n", "\\n")
        return f"'{escaped}'"
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, dict):
        inner = ", ".join(f"{k}: {_cypher_literal(v)}" for k, v in value.items())
        return "{" + inner + "}"
    raise SinkError(f"cannot render {type(value).__name__} as a Cypher literal")


def cypher_script(docs: Iterable[GraphDocument], max_id_length: int = DEFAULT_MAX_ID_LENGTH) -> str:
    """Offline replay script with parameters inlined as escaped literals."""
    lines = []
    for doc in docs:
        for statement in to_cypher(doc, max_id_length):
            text = statement.text
            for name, value in statement.params.items():
                text = text.replace(f"${name}", _cypher_literal(value))
            lines.append(text + ";")
    return "\n".join(lines) + ("\n" if lines else "")


@dataclass
class LoadSummary:
    nodes_created: int = 0
    rels_created: int = 0
    nodes_matched: int = 0
    documents_loaded: int = 0
    documents_failed: int = 0


def _redact(uri: str) -> str:
    parts = urlsplit(uri)
    if parts.netloc and "@" in parts.netloc:
        host = parts.netloc.rsplit("@", 1)[1]
        parts = parts._replace(netloc=host)
    return urlunsplit(parts)


def _store_http(config: SinkConfig, docs: Sequence[GraphDocument]) -> LoadSummary:
    endpoint = f"{config.uri.rstrip('/')}/db/{config.database_name}/tx/commit"
    summary = LoadSummary()
    for doc in docs:
        statements = to_cypher(doc, config.max_id_length)
        body = {
            "statements": [
                {
                    "statement": s.text,
                    "parameters": s.params,
                    "includeStats": True,
                }
                for s in statements
            ]
        }
        try:
            response = requests.post(
                endpoint,
                json=body,
                auth=(config.user, config.password),
                timeout=config.request_timeout,
            )
        except requests.RequestException as exc:
            raise SinkError(
                f"cannot reach graph store at {_redact(config.uri)}: "
                f"{type(exc).__name__}"
            ) from exc
        if response.status_code == 401:
            raise SinkError(
                f"authentication failed for user {config.user!r} at {_redact(config.uri)}"
            )
        if response.status_code >= 400:
            raise SinkError(
                f"graph store at {_redact(config.uri)} returned status "
                f"{response.status_code}"
            )
        data = response.json()
        errors = data.get("errors") or []
        if errors:
            # The transactional endpoint rolls the whole request back, so
            # only this document is lost.
            summary.documents_failed += 1
            log.warning(
                "document for %r failed: %s",
                doc.source_text[:60],
                errors[0].get("message", "unknown error"),
            )
            continue
        node_statements = sum(1 for s in statements if s.is_node)
        doc_nodes_created = 0
        doc_rels_created = 0
        for result in data.get("results", []):
            stats = result.get("stats") or {}
            doc_nodes_created += stats.get("nodes_created", 0)
            doc_rels_created += stats.get("relationships_created", 0)
        summary.nodes_created += doc_nodes_created
        summary.rels_created += doc_rels_created
        summary.nodes_matched += node_statements - doc_nodes_created
        summary.documents_loaded += 1
    return summary


def _store_bolt(config: SinkConfig, docs: Sequence[GraphDocument]) -> LoadSummary:
    try:
        import neo4j
    except ImportError as exc:
        raise SinkError(
            "bolt:// and neo4j:// URIs need the optional neo4j driver; "
            "install it or point the sink at the http endpoint"
        ) from exc

    summary = LoadSummary()
    try:
        driver = neo4j.GraphDatabase.driver(config.uri, auth=(config.user, config.password))
    except Exception as exc:
        raise SinkError(f"cannot open bolt connection: {type(exc).__name__}") from exc
    try:
        with driver.session(database=config.database_name) as session:
            for doc in docs:
                statements = to_cypher(doc, config.max_id_length)

                def load(tx, statements=statements):
                    nodes_created = 0
                    rels_created = 0
                    for s in statements:
                        counters = tx.run(s.text, **s.params).consume().counters
                        nodes_created += counters.nodes_created
                        rels_created += counters.relationships_created
                    return nodes_created, rels_created

                try:
                    nodes_created, rels_created = session.execute_write(load)
                except Exception as exc:
                    summary.documents_failed += 1
                    log.warning(
                        "document for %r failed: %s", doc.source_text[:60], exc
                    )
                    continue
                node_statements = sum(1 for s in statements if s.is_node)
                summary.nodes_created += nodes_created
                summary.rels_created += rels_created
                summary.nodes_matched += node_statements - nodes_created
                summary.documents_loaded += 1
    finally:
        driver.close()
    return summary


def store(config: SinkConfig, docs: Sequence[GraphDocument]) -> LoadSummary:
    """Write documents to Neo4j, one transaction per document."""
    scheme = urlsplit(config.uri).scheme
    if scheme in ("http", "https"):
        return _store_http(config, docs)
    if scheme in ("bolt", "neo4j", "bolt+s", "neo4j+s"):
        return _store_bolt(config, docs)
    raise SinkError(f"unsupported graph store scheme {scheme!r}")


def export_json(docs: Sequence[GraphDocument]) -> bytes:
    """Canonical JSON array of documents, UTF-8, stable key order."""
    payload = [document_to_dict(doc) for doc in docs]
    return (json.dumps(payload, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def import_json(data: bytes | str) -> list[GraphDocument]:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    payload = json.loads(data)
    if not isinstance(payload, list):
        raise SinkError("graph JSON must be an array of documents")
    return [document_from_dict(item) for item in payload]
