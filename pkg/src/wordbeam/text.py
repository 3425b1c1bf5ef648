"""Tokenization, detokenization and positional substitution.

Every stage of the attack pipeline works on :class:`Text` values: an
immutable token sequence plus the raw string it was built from.  The
tokenizer is deliberately simple (whitespace split, leading/trailing
ASCII punctuation peeled into separate tokens) so that runs are
reproducible regardless of locale or model vocabulary.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field

_PUNCT = frozenset(string.punctuation)


def is_punctuation(token: str) -> bool:
    """True when the token consists solely of ASCII punctuation."""
    return bool(token) and all(ch in _PUNCT for ch in token)


@dataclass(frozen=True)
class Text:
    """An immutable tokenized sentence.

    ``raw`` holds the original string for texts produced by
    :func:`tokenize`; derived texts (substitutions) drop it because the
    raw form no longer matches the tokens.
    """

    tokens: tuple[str, ...]
    raw: str | None = field(default=None, compare=False)

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class Substitution:
    """A single token replacement: ``tokens[position]: original -> replacement``."""

    position: int
    original: str
    replacement: str

    def __post_init__(self) -> None:
        if self.original == self.replacement:
            raise ValueError("substitution must change the token")
        if self.position < 0:
            raise ValueError("substitution position must be non-negative")


def _split_chunk(chunk: str) -> list[str]:
    # Peel leading/trailing punctuation one character at a time; inner
    # punctuation (don't, e-mail) stays attached.
    leading: list[str] = []
    trailing: list[str] = []
    start, end = 0, len(chunk)
    while start < end and chunk[start] in _PUNCT:
        leading.append(chunk[start])
        start += 1
    while end > start and chunk[end - 1] in _PUNCT:
        trailing.append(chunk[end - 1])
        end -= 1
    core = chunk[start:end]
    return leading + ([core] if core else []) + trailing[::-1]


def tokenize(raw: str) -> Text:
    """Split a string into tokens, preserving case.

    Tokens are whitespace-separated chunks with leading and trailing
    ASCII punctuation split off as their own single-character tokens.
    An empty string yields an empty token list.
    """
    tokens: list[str] = []
    for chunk in raw.split():
        tokens.extend(_split_chunk(chunk))
    return Text(tokens=tuple(tokens), raw=raw)


def detokenize(text: Text) -> str:
    """Join tokens with single spaces; punctuation tokens attach to the
    preceding token without a space."""
    parts: list[str] = []
    for token in text.tokens:
        if parts and is_punctuation(token):
            parts[-1] += token
        else:
            parts.append(token)
    return " ".join(parts)


def substitute(text: Text, position: int, word: str) -> Text:
    """Return a copy of ``text`` with ``tokens[position]`` replaced.

    The input is left untouched.  Replacing a token with itself is
    allowed and returns an equal text.
    """
    if not 0 <= position < len(text.tokens):
        raise IndexError(
            f"substitution position {position} out of range for {len(text.tokens)} tokens"
        )
    if not word or any(ch.isspace() for ch in word):
        raise ValueError(f"replacement token must be non-empty and whitespace-free: {word!r}")
    tokens = list(text.tokens)
    tokens[position] = word
    return Text(tokens=tuple(tokens))
