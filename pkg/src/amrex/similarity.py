"""Pluggable sentence-embedding backends and cosine similarity.

The pipeline never bundles an embedding model.  It talks to one of three
backends: a precomputed JSONL file of text/vector pairs, a remote embedding
service, or a deterministic model-free test backend that hashes character
n-grams.  All backends cache by exact text string, so repeated lookups are
bitwise identical within a run.
"""

from __future__ import annotations

import json
import math
import threading
import zlib
from dataclasses import dataclass

import requests

from .errors import ConfigError, EmbeddingMissError, SimilarityError, TransportError


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.values:
            raise SimilarityError("empty embedding vector")
        if not all(math.isfinite(v) for v in self.values):
            raise SimilarityError("non-finite value in embedding vector")

    @property
    def dim(self) -> int:
        return len(self.values)


class SimilarityBackend:
    """Base backend: resolves a text to exactly one vector or a typed miss."""

    kind = "abstract"

    def __init__(self):
        self._cache: dict[str, EmbeddingVector] = {}
        self._lock = threading.Lock()

    def embed(self, text: str) -> EmbeddingVector:
        if not text:
            raise SimilarityError("cannot embed empty text")
        with self._lock:
            cached = self._cache.get(text)
        if cached is not None:
            return cached
        vec = self._embed(text)
        with self._lock:
            return self._cache.setdefault(text, vec)

    def _embed(self, text: str) -> EmbeddingVector:
        raise NotImplementedError


class PrecomputedFileBackend(SimilarityBackend):
    """Looks vectors up by exact text key in a JSONL file of
    ``{"text": ..., "vector": [...]}`` records."""

    kind = "precomputed-file"

    def __init__(self, path: str):
        super().__init__()
        self.path = path
        self._table: dict[str, EmbeddingVector] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                    self._table[record["text"]] = EmbeddingVector(tuple(record["vector"]))
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise ConfigError(f"{path}:{lineno}: bad embedding record: {exc}")

    def _embed(self, text: str) -> EmbeddingVector:
        try:
            return self._table[text]
        except KeyError:
            raise EmbeddingMissError(text) from None


class EmbeddingServiceBackend(SimilarityBackend):
    """POSTs ``{"texts": [...]}`` to ``<endpoint>/embed`` and expects
    ``{"vectors": [[...], ...]}`` in the same order."""

    kind = "embedding-service"

    def __init__(self, endpoint: str, timeout: float = 30.0):
        super().__init__()
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout

    def _embed(self, text: str) -> EmbeddingVector:
        return self.embed_many([text])[0]

    def embed_many(self, texts: list[str]) -> list[EmbeddingVector]:
        try:
            resp = requests.post(f"{self.endpoint}/embed",
                                 json={"texts": texts}, timeout=self.timeout)
        except requests.RequestException as exc:
            raise TransportError(f"embedding service unreachable: {exc}")
        if resp.status_code != 200:
            raise TransportError(
                f"embedding service returned HTTP {resp.status_code}")
        try:
            vectors = resp.json()["vectors"]
        except (ValueError, KeyError) as exc:
            raise TransportError(f"malformed embedding response: {exc}")
        if not isinstance(vectors, list) or len(vectors) != len(texts):
            raise TransportError(
                f"embedding response length {len(vectors) if isinstance(vectors, list) else '?'} "
                f"does not match request length {len(texts)}")
        return [EmbeddingVector(tuple(v)) for v in vectors]


class DeterministicTestBackend(SimilarityBackend):
    """Model-free backend hashing character trigrams into a fixed-dim
    vector.  Reproducible across runs and platforms; for tests and demos
    only, the vectors carry no semantics beyond surface overlap."""

    kind = "deterministic-test"

    def __init__(self, dim: int = 256):
        super().__init__()
        if dim < 2:
            raise ConfigError(f"test backend dim must be >= 2, got {dim}")
        self.dim = dim

    def _embed(self, text: str) -> EmbeddingVector:
        padded = f"##{text}##"
        values = [0.0] * self.dim
        for i in range(len(padded) - 2):
            h = zlib.crc32(padded[i:i + 3].encode("utf-8"))
            sign = 1.0 if (h >> 16) & 1 else -1.0
            values[h % self.dim] += sign
        if not any(values):
            values[0] = 1.0
        return EmbeddingVector(tuple(values))


def backend_from_spec(spec: str) -> SimilarityBackend:
    """Build a backend from a CLI spec string.

    ``test`` or ``test:dim=N``, ``file:<path>``, ``service:<url>``.
    """
    kind, _, arg = spec.partition(":")
    if kind == "test":
        if not arg:
            return DeterministicTestBackend()
        key, _, value = arg.partition("=")
        if key != "dim" or not value.isdigit():
            raise ConfigError(f"bad test backend spec: {spec!r}")
        return DeterministicTestBackend(dim=int(value))
    if kind == "file":
        if not arg:
            raise ConfigError("file backend needs a path: file:<path>")
        return PrecomputedFileBackend(arg)
    if kind == "service":
        if not arg:
            raise ConfigError("service backend needs a URL: service:<url>")
        return EmbeddingServiceBackend(arg)
    raise ConfigError(f"unknown similarity backend {spec!r}")


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """dot(a, b) / (|a| |b|).  Dimension mismatch and zero-norm vectors are
    errors rather than silent defaults."""
    if a.dim != b.dim:
        raise SimilarityError(f"dimension mismatch: {a.dim} vs {b.dim}")
    norm_a = math.sqrt(sum(v * v for v in a.values))
    norm_b = math.sqrt(sum(v * v for v in b.values))
    if norm_a == 0.0 or norm_b == 0.0:
        raise SimilarityError("cosine of zero-norm vector")
    dot = sum(x * y for x, y in zip(a.values, b.values))
    return dot / (norm_a * norm_b)
