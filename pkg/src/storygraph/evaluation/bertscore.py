"""Token-embedding similarity scoring.

Given per-token embeddings for the expected and predicted token lists, the
score is greedy cosine matching: precision averages, over predicted tokens,
the best similarity to any expected token; recall mirrors that over
expected tokens; F is their harmonic mean.

The embedder is pluggable.  The bundled one-hot embedder makes the score a
pure lexical-overlap measure, deterministic and dependency-free; an HTTP
embedder can swap in contextual vectors without touching the math.
"""

from __future__ import annotations

import logging
from typing import Protocol, Sequence

import numpy as np
import requests

from ..errors import EvaluationError
from .metrics import MetricRow, f_measure

log = logging.getLogger(__name__)


class Embedder(Protocol):
    def embed(self, tokens: Sequence[str]) -> list[list[float]]:
        """One vector per token, all of equal dimension within one call."""
        ...


class OneHotEmbedder:
    """Grows a vocabulary across calls; identical tokens share an axis.

    Vectors from different calls may differ in length as the vocabulary
    grows; the scorer zero-pads, which leaves cosines unchanged.
    """

    def __init__(self) -> None:
        self.vocab: dict[str, int] = {}

    def embed(self, tokens: Sequence[str]) -> list[list[float]]:
        for token in tokens:
            if token not in self.vocab:
                self.vocab[token] = len(self.vocab)
        dim = len(self.vocab)
        vectors = []
        for token in tokens:
            vec = [0.0] * dim
            vec[self.vocab[token]] = 1.0
            vectors.append(vec)
        return vectors


class HttpEmbedder:
    """Fetches embeddings from an embeddings API endpoint."""

    def __init__(
        self,
        endpoint: str,
        model_name: str = "",
        auth_token: str | None = None,
        request_timeout: float = 60.0,
    ):
        self.endpoint = endpoint
        self.model_name = model_name
        self.auth_token = auth_token
        self.request_timeout = request_timeout

    def embed(self, tokens: Sequence[str]) -> list[list[float]]:
        headers = {"Content-Type": "application/json"}
        if self.auth_token:
            headers["Authorization"] = f"Bearer {self.auth_token}"
        body = {"model": self.model_name, "input": list(tokens)}
        response = requests.post(
            self.endpoint, json=body, headers=headers, timeout=self.request_timeout
        )
        if response.status_code != 200:
            raise EvaluationError(
                f"embeddings endpoint returned status {response.status_code}"
            )
        data = response.json()
        return [item["embedding"] for item in data["data"]]


def _unit_rows(vectors: list[list[float]], dim: int) -> np.ndarray:
    matrix = np.zeros((len(vectors), dim))
    for i, vec in enumerate(vectors):
        matrix[i, : len(vec)] = vec
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return matrix / norms


def bertscore(
    expected_tokens: Sequence[str],
    predicted_tokens: Sequence[str],
    embedder: Embedder,
) -> MetricRow:
    """Greedy-cosine token similarity between two token lists."""
    if not expected_tokens or not predicted_tokens:
        raise EvaluationError("token similarity is undefined for empty token lists")
    expected_vecs = embedder.embed(expected_tokens)
    predicted_vecs = embedder.embed(predicted_tokens)
    dim = max(
        max(len(v) for v in expected_vecs),
        max(len(v) for v in predicted_vecs),
    )
    expected_m = _unit_rows(expected_vecs, dim)
    predicted_m = _unit_rows(predicted_vecs, dim)

    sim = predicted_m @ expected_m.T  # rows: predicted, cols: expected
    sim = np.clip(sim, 0.0, 1.0)
    p = float(sim.max(axis=1).mean())
    r = float(sim.max(axis=0).mean())
    return MetricRow(precision=p, recall=r, f_measure=f_measure(p, r))
