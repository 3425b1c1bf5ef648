"""Per-position word importance and the stopword-filtered attack order.

Importance of a token is measured by replacing it with an
out-of-vocabulary placeholder and watching the true-class probability:
the score is the drop in the true class, plus the gain of the newly
predicted class whenever the placeholder flips the label.  Stopword and
punctuation positions are filtered out only after scoring, so query
accounting includes them.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ConfigError
from .text import Text, is_punctuation, substitute
from .victim import VictimModel, predicted_label

DEFAULT_OOV_TOKEN = "[oov]"


@dataclass(frozen=True)
class ImportanceScore:
    position: int
    score: float
    flipped: bool  # placeholder changed the predicted label


class StopwordList:
    """Case-insensitive token membership test."""

    def __init__(self, words: Iterable[str]):
        self._words = frozenset(w.lower() for w in words)

    def __contains__(self, token: str) -> bool:
        return token.lower() in self._words

    def __len__(self) -> int:
        return len(self._words)


def load_stopwords(path: str | Path) -> StopwordList:
    """Read a stopword list: one word per line, ``#`` starts a comment."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"stopword file not found: {path}")
    words = []
    for line in path.read_text(encoding="utf-8").splitlines():
        word = line.split("#", 1)[0].strip()
        if word:
            words.append(word)
    return StopwordList(words)


def importance_scores(
    text: Text,
    model: VictimModel,
    y_true: int,
    oov_token: str = DEFAULT_OOV_TOKEN,
) -> list[ImportanceScore]:
    """Score every position of ``text`` by placeholder replacement.

    The original and all n single-placeholder variants go through the
    victim in one batch.  The caller guarantees the model currently
    classifies ``text`` as ``y_true``.
    """
    n = len(text.tokens)
    if n == 0:
        return []
    variants = [substitute(text, i, oov_token) for i in range(n)]
    probs = model.predict_proba([text] + variants)
    original, replaced = probs[0], probs[1:]

    scores = []
    for position, variant_probs in enumerate(replaced):
        score = float(original[y_true] - variant_probs[y_true])
        y_other = predicted_label(variant_probs)
        flipped = y_other != y_true
        if flipped:
            score += float(variant_probs[y_other] - original[y_other])
        scores.append(ImportanceScore(position=position, score=score, flipped=flipped))
    return scores


def rank_positions(
    scores: Sequence[ImportanceScore],
    text: Text,
    stopwords: StopwordList,
) -> list[int]:
    """Attack order: importance descending, stopwords and punctuation removed.

    Ties break toward the smaller position index so identical inputs
    always produce identical orders.
    """
    if len(scores) != len(text.tokens):
        raise ValueError(
            f"got {len(scores)} scores for {len(text.tokens)} tokens"
        )
    keep = [
        s
        for s in scores
        if text.tokens[s.position] not in stopwords
        and not is_punctuation(text.tokens[s.position])
    ]
    keep.sort(key=lambda s: (-s.score, s.position))
    return [s.position for s in keep]
