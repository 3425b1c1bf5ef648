"""Candidate-word providers: embedding space, masked LM, POS tagger, encoder.

Real deployments plug in large pretrained components behind these
interfaces; the bundled implementations are deterministic table- and
hash-driven stand-ins that keep the whole pipeline runnable offline.
"""

from __future__ import annotations

from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .errors import ConfigError, ProtocolError
from .lineproto import LineProtocolClient
from .text import Text

COARSE_TAGS = frozenset(
    {"NOUN", "VERB", "ADJ", "ADV", "PRON", "DET", "ADP", "NUM", "CONJ", "PRT", "PUNCT", "X"}
)


class MaskedLMProvider(Protocol):
    def propose(self, text: Text, position: int, top_n: int) -> list[str]: ...


class PosTagger(Protocol):
    def tag(self, tokens: Sequence[str], position: int) -> str: ...


class SentenceEncoder(Protocol):
    def encode(self, text: Text) -> np.ndarray: ...


class EmbeddingSpace:
    """Word vectors with cosine-similarity neighbor lookup."""

    def __init__(self, vocabulary: dict[str, Sequence[float]]):
        if not vocabulary:
            raise ConfigError("embedding vocabulary is empty")
        self.words = tuple(vocabulary)
        matrix = np.asarray([vocabulary[w] for w in self.words], dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[1] < 1:
            raise ConfigError("embedding vectors must share one dimension >= 1")
        if not np.all(np.isfinite(matrix)):
            raise ConfigError("embedding vectors must be finite")
        norms = np.linalg.norm(matrix, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        self.vectors = matrix / norms  # rows unit length, aligned with words
        self._index: dict[str, int] = {}
        for position, word in enumerate(self.words):
            self._index.setdefault(word.lower(), position)

    @property
    def dimension(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.words)

    def neighbors(self, word: str, n: int) -> list[str]:
        """The ``n`` nearest vocabulary words by cosine similarity.

        The query word itself is excluded (case-insensitively) and ties
        break lexicographically.  Out-of-vocabulary queries return an
        empty list.
        """
        if n <= 0:
            return []
        index = self._index.get(word.lower())
        if index is None:
            return []
        similarities = self.vectors @ self.vectors[index]
        query = word.lower()
        ranked = sorted(
            (-float(similarities[i]), w)
            for i, w in enumerate(self.words)
            if w.lower() != query
        )
        return [w for _, w in ranked[:n]]


def load_embeddings(path: str | Path) -> EmbeddingSpace:
    """Read a text embedding file: ``<count> <dim>`` header, then
    ``word v1 ... vd`` per line."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"embedding file not found: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ConfigError(f"embedding file is empty: {path}")
    try:
        count, dim = (int(part) for part in lines[0].split())
    except ValueError as exc:
        raise ConfigError(f"bad embedding header {lines[0]!r} in {path}") from exc
    vocabulary: dict[str, list[float]] = {}
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != dim + 1:
            raise ConfigError(f"{path}:{line_no}: expected {dim} values, got {len(parts) - 1}")
        word = parts[0]
        if word in vocabulary:
            raise ConfigError(f"{path}:{line_no}: duplicate word {word!r}")
        try:
            vocabulary[word] = [float(v) for v in parts[1:]]
        except ValueError as exc:
            raise ConfigError(f"{path}:{line_no}: non-numeric vector component") from exc
    if len(vocabulary) != count:
        raise ConfigError(
            f"{path}: header promises {count} words, file has {len(vocabulary)}"
        )
    return EmbeddingSpace(vocabulary)


class TableMaskedLM:
    """Masked-LM stand-in backed by a lookup table.

    Proposals are keyed by the lower-cased token under the mask; the
    surrounding context is ignored, which is all the desk-scale
    fixtures need.
    """

    def __init__(self, table: dict[str, Sequence[str]]):
        self._table = {word.lower(): list(proposals) for word, proposals in table.items()}

    def propose(self, text: Text, position: int, top_n: int) -> list[str]:
        masked = text.tokens[position].lower()
        return list(self._table.get(masked, ()))[:top_n]


def load_mlm_table(path: str | Path) -> TableMaskedLM:
    """Read a masked-LM table: ``word<TAB>proposal1,proposal2,...`` per line."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"masked-LM table not found: {path}")
    table: dict[str, list[str]] = {}
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if "\t" not in line:
            raise ConfigError(f"{path}:{line_no}: expected word<TAB>proposals")
        word, proposals = line.split("\t", 1)
        cleaned = [p.strip() for p in proposals.split(",") if p.strip()]
        for proposal in cleaned:
            if any(ch.isspace() for ch in proposal):
                raise ConfigError(
                    f"{path}:{line_no}: proposal {proposal!r} contains whitespace"
                )
        table[word.strip()] = cleaned
    return TableMaskedLM(table)


class SubprocessMaskedLM:
    """Masked-LM provider served by a child process over the line protocol.

    Requests: ``{"id": n, "tokens": [...], "mask_index": i, "top_n": n}``,
    responses: ``{"id": n, "words": [...], "scores": [...]}``.  Words are
    ordered by score descending regardless of how the provider sorts.
    """

    def __init__(self, command: str | Sequence[str]):
        self._client = LineProtocolClient(command)

    def propose(self, text: Text, position: int, top_n: int) -> list[str]:
        response = self._client.request(
            {"tokens": list(text.tokens), "mask_index": position, "top_n": top_n}
        )
        words = response.get("words")
        scores = response.get("scores")
        if not isinstance(words, list) or not isinstance(scores, list) or len(words) != len(scores):
            raise ProtocolError(
                f"masked-LM response must pair words with scores, got {response!r}"
            )
        for word in words:
            if not isinstance(word, str) or not word or any(ch.isspace() for ch in word):
                raise ProtocolError(f"masked-LM proposed an invalid token: {word!r}")
        try:
            ranked = sorted(zip(scores, words), key=lambda pair: -float(pair[0]))
        except (TypeError, ValueError) as exc:
            raise ProtocolError(f"masked-LM scores must be numeric: {scores!r}") from exc
        return [word for _, word in ranked[:top_n]]

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "SubprocessMaskedLM":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()


class LexiconPosTagger:
    """Coarse POS tagger driven by a word list; unknown words tag as X."""

    def __init__(self, lexicon: dict[str, str]):
        self._lexicon = {}
        for word, tag in lexicon.items():
            if tag not in COARSE_TAGS:
                raise ConfigError(f"unknown POS tag {tag!r} for word {word!r}")
            self._lexicon[word.lower()] = tag

    def tag(self, tokens: Sequence[str], position: int) -> str:
        return self._lexicon.get(tokens[position].lower(), "X")


def load_pos_lexicon(path: str | Path) -> LexiconPosTagger:
    """Read a POS lexicon: ``word<TAB>TAG`` per line."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"POS lexicon not found: {path}")
    lexicon: dict[str, str] = {}
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ConfigError(f"{path}:{line_no}: expected word<TAB>TAG")
        lexicon[parts[0].strip()] = parts[1].strip()
    return LexiconPosTagger(lexicon)


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


class HashedBowEncoder:
    """Sentence encoder stand-in: hashed bag-of-words, L2-normalized.

    Each token bumps the bucket ``fnv1a64(token) % dimension``; the
    count vector is normalized to unit length.  Empty texts map to the
    zero vector.
    """

    def __init__(self, dimension: int = 256):
        if dimension < 1:
            raise ConfigError("encoder dimension must be positive")
        self.dimension = dimension

    def encode(self, text: Text) -> np.ndarray:
        vector = np.zeros(self.dimension)
        for token in text.tokens:
            vector[fnv1a64(token.encode("utf-8")) % self.dimension] += 1.0
        norm = np.linalg.norm(vector)
        if norm == 0.0:
            return vector
        return vector / norm
