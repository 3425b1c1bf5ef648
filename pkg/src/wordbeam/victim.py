"""Victim-model abstraction: the attack's only window onto the classifier.

A victim is anything with ``predict_proba(texts) -> list of probability
vectors``.  The package ships a deterministic lexicon classifier for
desk-scale work, an adapter that drives a real classifier in a child
process over the line protocol, and a counting wrapper that meters and
caches oracle queries.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .errors import ConfigError, ProtocolError
from .lineproto import LineProtocolClient
from .text import Text, detokenize

PROB_TOLERANCE = 1e-6


class VictimModel(Protocol):
    labels: "LabelSet"

    def predict_proba(self, texts: Sequence[Text]) -> list[np.ndarray]: ...


@dataclass(frozen=True)
class LabelSet:
    """Ordered class names; the label id is the list index."""

    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.labels) < 2:
            raise ConfigError("a label set needs at least two classes")
        if len(set(self.labels)) != len(self.labels):
            raise ConfigError(f"duplicate label names: {self.labels}")

    def __len__(self) -> int:
        return len(self.labels)


def predicted_label(probs: np.ndarray) -> int:
    """Argmax with ties broken toward the lowest label id."""
    return int(np.argmax(probs))


def check_prob_vector(values: Sequence[float], n_labels: int, origin: str) -> np.ndarray:
    """Validate one probability vector coming from an untrusted source."""
    probs = np.asarray(values, dtype=np.float64)
    if probs.shape != (n_labels,):
        raise ProtocolError(
            f"{origin}: expected {n_labels} class probabilities, got shape {probs.shape}"
        )
    if not np.all(np.isfinite(probs)):
        raise ProtocolError(f"{origin}: non-finite probability in {probs.tolist()}")
    if np.any(probs < -PROB_TOLERANCE) or np.any(probs > 1 + PROB_TOLERANCE):
        raise ProtocolError(f"{origin}: probability outside [0, 1] in {probs.tolist()}")
    total = float(probs.sum())
    if abs(total - 1.0) > PROB_TOLERANCE:
        raise ProtocolError(f"{origin}: probabilities sum to {total}, not 1")
    return probs


class LexiconModel:
    """Deterministic linear bag-of-words classifier.

    Token weights are looked up case-insensitively; unknown tokens weigh
    zero.  With two classes a scalar weight ``w`` scores the classes as
    ``softmax([s, 0])`` (equivalently ``P(class 0) = sigmoid(s)``); with
    more classes each weight is a per-class score vector and the class
    sums go through a softmax.
    """

    def __init__(
        self,
        labels: LabelSet,
        weights: dict[str, float | Sequence[float]],
        bias: float | Sequence[float] = 0.0,
    ):
        self.labels = labels
        k = len(labels)
        self._weights: dict[str, np.ndarray] = {}
        for word, value in weights.items():
            self._weights[word.lower()] = self._as_scores(value, k, f"weight for {word!r}")
        self._bias = self._as_scores(bias, k, "bias")

    @staticmethod
    def _as_scores(value: float | Sequence[float], k: int, what: str) -> np.ndarray:
        if isinstance(value, (int, float)):
            if k == 2:
                return np.array([float(value), 0.0])
            if value == 0:
                return np.zeros(k)
            raise ConfigError(f"{what} must list {k} per-class scores")
        scores = np.asarray(value, dtype=np.float64)
        if scores.shape != (k,):
            raise ConfigError(f"{what} must list {k} per-class scores, got {scores.tolist()}")
        return scores

    def predict_proba(self, texts: Sequence[Text]) -> list[np.ndarray]:
        results = []
        for text in texts:
            scores = self._bias.copy()
            for token in text.tokens:
                weight = self._weights.get(token.lower())
                if weight is not None:
                    scores = scores + weight
            shifted = np.exp(scores - scores.max())
            results.append(shifted / shifted.sum())
        return results


def load_lexicon_model(path: str | Path) -> LexiconModel:
    """Read a lexicon victim from a JSON file.

    Expected fields: ``labels`` (list of names), ``weights`` (token to
    scalar or per-class list) and optional ``bias``.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"victim weights file not found: {path}")
    try:
        spec = json.loads(path.read_text(encoding="utf-8"))
        labels = LabelSet(tuple(spec["labels"]))
        return LexiconModel(labels, spec["weights"], spec.get("bias", 0.0))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigError(f"invalid victim weights file {path}: {exc}") from exc


class CountingVictim:
    """Transparent wrapper that counts forwarded texts and caches results.

    The count measures true oracle cost: a text is counted once, the
    first time it reaches the wrapped model; exact-token-sequence
    repeats are served from the cache for free.  Updates are atomic
    under concurrent batches.
    """

    def __init__(self, model: VictimModel):
        self._model = model
        self.labels = model.labels
        self._cache: dict[tuple[str, ...], np.ndarray] = {}
        self._count = 0
        self._lock = threading.Lock()

    @property
    def count(self) -> int:
        return self._count

    def predict_proba(self, texts: Sequence[Text]) -> list[np.ndarray]:
        with self._lock:
            missing: list[Text] = []
            seen: set[tuple[str, ...]] = set()
            for text in texts:
                key = text.tokens
                if key not in self._cache and key not in seen:
                    missing.append(text)
                    seen.add(key)
            if missing:
                fresh = self._model.predict_proba(missing)
                if len(fresh) != len(missing):
                    raise ProtocolError(
                        f"victim returned {len(fresh)} vectors for {len(missing)} texts"
                    )
                for text, probs in zip(missing, fresh):
                    self._cache[text.tokens] = probs
                self._count += len(missing)
            return [self._cache[text.tokens] for text in texts]


class SubprocessVictim:
    """Victim served by a child process over the line protocol.

    Requests are ``{"id": n, "texts": [...]}``; responses must echo the
    id and carry one probability vector per text.  Every vector is
    validated, not trusted.  The adapter is single-client; access is
    serialized by the underlying transport.
    """

    def __init__(self, command: str | Sequence[str], labels: LabelSet):
        self.labels = labels
        self._client = LineProtocolClient(command)

    def predict_proba(self, texts: Sequence[Text]) -> list[np.ndarray]:
        response = self._client.request({"texts": [detokenize(t) for t in texts]})
        probs = response.get("probs")
        if not isinstance(probs, list) or len(probs) != len(texts):
            raise ProtocolError(
                f"victim response must carry {len(texts)} probability vectors, got {probs!r}"
            )
        origin = f"victim {self._client.command[0]!r}"
        return [check_prob_vector(row, len(self.labels), origin) for row in probs]

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "SubprocessVictim":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()


def spawn_external_victim(command: str | Sequence[str], labels: LabelSet) -> SubprocessVictim:
    """Launch an external victim process speaking the line protocol."""
    return SubprocessVictim(command, labels)
