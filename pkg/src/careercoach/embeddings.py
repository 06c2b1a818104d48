"""Text embedding boundary: fixed-dimension unit vectors from any backend.

Two embedders share one contract (``embed_texts`` returning unit-normalized
vectors, order preserved):

* :class:`DeterministicEmbedder` — offline bag-of-tokens construction.
  Each token hashes to a seeded Gaussian vector; the text vector is the
  normalized sum. Shared tokens give related texts higher cosine, which is
  enough retrieval signal for desk-scale tests, and the construction is
  stable across platforms and interpreter versions (blake2b + Box-Muller,
  no RNG library involved).
* :class:`ServiceEmbedder` — HTTP client for a real embedding service
  (``EMBED_URL``), POSTing ``{"texts": [...]}`` and expecting
  ``{"vectors": [[...]]}``.

Both are immutable after construction and safe for concurrent use.
"""

from __future__ import annotations

import hashlib
import math
import os
import re
from dataclasses import dataclass
from typing import Sequence

import httpx

from .errors import DimensionMismatch, EmbedderUnavailable, EmptyText

DETERMINISTIC_KIND = "deterministic_test"
SERVICE_KIND = "external_service"

# matches the sentence-transformer the service wraps by default
SERVICE_DIMENSION = 384
TEST_DIMENSION = 32

# stand-in token when a text has no recognizable tokens at all
NULL_TOKEN = "∅"

_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")


@dataclass(frozen=True)
class EmbedderConfig:
    """Serializable description of an embedder, stored in collection
    snapshots so a query can never be embedded in a different space."""

    embedder_kind: str
    dimension: int
    seed: int = 0
    endpoint: str = ""

    def __post_init__(self):
        if self.dimension <= 0:
            raise ValueError("dimension must be positive")

    def to_dict(self) -> dict:
        return {
            "embedder_kind": self.embedder_kind,
            "dimension": self.dimension,
            "seed": self.seed,
            "endpoint": self.endpoint,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EmbedderConfig":
        return cls(
            embedder_kind=data["embedder_kind"],
            dimension=int(data["dimension"]),
            seed=int(data.get("seed", 0)),
            endpoint=data.get("endpoint", ""),
        )


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumerics; empty result falls back to
    the null token so every text embeds somewhere."""
    tokens = [t for t in _TOKEN_SPLIT.split(text.lower()) if t]
    return tokens or [NULL_TOKEN]


def _token_vector(seed: int, token: str, dimension: int) -> list[float]:
    # Counter-mode blake2b supplies uniform pairs; Box-Muller turns them
    # into Gaussians. Fully deterministic with no RNG-library dependency.
    values: list[float] = []
    base = f"{seed}|{token}".encode("utf-8")
    block = 0
    while len(values) < dimension:
        digest = hashlib.blake2b(base + b"|%d" % block, digest_size=16).digest()
        u1 = (int.from_bytes(digest[:8], "big") + 1) / (2**64 + 1)
        u2 = int.from_bytes(digest[8:], "big") / 2**64
        radius = math.sqrt(-2.0 * math.log(u1))
        values.append(radius * math.cos(2.0 * math.pi * u2))
        values.append(radius * math.sin(2.0 * math.pi * u2))
        block += 1
    return values[:dimension]


def l2_normalize(vector: Sequence[float]) -> list[float]:
    norm = math.sqrt(math.fsum(v * v for v in vector))
    if norm == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return [v / norm for v in vector]


def cosine(a: Sequence[float], b: Sequence[float]) -> float:
    """Cosine similarity, clamped into [-1, 1]."""
    if len(a) != len(b):
        raise DimensionMismatch(f"cosine over dims {len(a)} and {len(b)}")
    dot = math.fsum(x * y for x, y in zip(a, b))
    norm_a = math.sqrt(math.fsum(x * x for x in a))
    norm_b = math.sqrt(math.fsum(y * y for y in b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ValueError("cosine undefined for zero vectors")
    return max(-1.0, min(1.0, dot / (norm_a * norm_b)))


def _check_texts(texts: Sequence[str]) -> None:
    if not texts:
        raise EmptyText("no texts to embed")
    for i, text in enumerate(texts):
        if not text.strip():
            raise EmptyText(f"text {i} is empty after trimming", index=i)


class DeterministicEmbedder:
    """Offline embedder: seeded token Gaussians summed and normalized."""

    def __init__(self, seed: int = 0, dimension: int = TEST_DIMENSION):
        if dimension <= 0:
            raise ValueError("dimension must be positive")
        self.seed = seed
        self.dimension = dimension
        self._token_cache: dict[str, list[float]] = {}

    @property
    def config(self) -> EmbedderConfig:
        return EmbedderConfig(DETERMINISTIC_KIND, self.dimension, seed=self.seed)

    def _vector_for(self, token: str) -> list[float]:
        cached = self._token_cache.get(token)
        if cached is None:
            cached = _token_vector(self.seed, token, self.dimension)
            self._token_cache[token] = cached
        return cached

    def embed_texts(self, texts: Sequence[str]) -> list[list[float]]:
        _check_texts(texts)
        out = []
        for text in texts:
            total = [0.0] * self.dimension
            for token in tokenize(text):
                for i, v in enumerate(self._vector_for(token)):
                    total[i] += v
            try:
                out.append(l2_normalize(total))
            except ValueError:
                # token vectors cancelled exactly; fall back to the null token
                out.append(l2_normalize(self._vector_for(NULL_TOKEN)))
        return out


class ServiceEmbedder:
    """Client for an external embedding service."""

    def __init__(self, endpoint: str | None = None, dimension: int = SERVICE_DIMENSION,
                 timeout: float = 30.0):
        self.endpoint = endpoint or os.environ.get("EMBED_URL", "")
        if not self.endpoint:
            raise ValueError("ServiceEmbedder needs an endpoint (EMBED_URL)")
        self.dimension = dimension
        self.timeout = timeout

    @property
    def config(self) -> EmbedderConfig:
        return EmbedderConfig(SERVICE_KIND, self.dimension, endpoint=self.endpoint)

    def embed_texts(self, texts: Sequence[str]) -> list[list[float]]:
        _check_texts(texts)
        try:
            response = httpx.post(self.endpoint, json={"texts": list(texts)},
                                  timeout=self.timeout)
            response.raise_for_status()
            vectors = response.json()["vectors"]
        except httpx.HTTPError as exc:
            raise EmbedderUnavailable(f"embedding service failed: {exc}") from exc
        except (KeyError, ValueError) as exc:
            raise EmbedderUnavailable(f"malformed service response: {exc}") from exc
        if len(vectors) != len(texts):
            raise EmbedderUnavailable(
                f"service returned {len(vectors)} vectors for {len(texts)} texts"
            )
        normalized = []
        for vector in vectors:
            if len(vector) != self.dimension:
                raise DimensionMismatch(
                    f"service vector has dim {len(vector)}, expected {self.dimension}"
                )
            normalized.append(l2_normalize(vector))
        return normalized


def build_embedder(config: EmbedderConfig):
    """Instantiate the embedder a config describes."""
    if config.embedder_kind == DETERMINISTIC_KIND:
        return DeterministicEmbedder(seed=config.seed, dimension=config.dimension)
    if config.embedder_kind == SERVICE_KIND:
        return ServiceEmbedder(endpoint=config.endpoint or None, dimension=config.dimension)
    raise ValueError(f"unknown embedder kind: {config.embedder_kind!r}")
