"""Per-position substitution candidates from mixed sources, filtered.

For one token position the builder unions the embedding-space
neighbors with the masked-LM proposals, drops anything whose coarse
POS tag differs from the original token's, and drops anything whose
single-substitution variant is not strictly more similar to the
original text than the configured threshold.  Candidate sets are
precomputed once per attack and shared by every beam member.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError
from .spaces import EmbeddingSpace, MaskedLMProvider, PosTagger, SentenceEncoder
from .text import Text, substitute

SPACE_MODES = ("embedding", "mlm", "mixed")


@dataclass(frozen=True)
class Candidate:
    word: str
    source: str  # "embedding", "mlm" or "both"
    similarity: float  # of the single-substitution variant to the original text


@dataclass(frozen=True)
class CandidateSet:
    position: int
    candidates: tuple[Candidate, ...]

    @property
    def words(self) -> tuple[str, ...]:
        return tuple(c.word for c in self.candidates)

    def __len__(self) -> int:
        return len(self.candidates)


def sentence_similarity(encoder: SentenceEncoder, a: Text, b: Text) -> float:
    """Cosine similarity of the encoded texts, in [-1, 1].

    Zero-vector encodings (empty texts under the bundled encoder) give
    similarity 0.
    """
    cos = float(encoder.encode(a) @ encoder.encode(b))
    return max(-1.0, min(1.0, cos))


def mlm_candidates(provider: MaskedLMProvider, text: Text, position: int, n: int) -> list[str]:
    """Top-n masked-LM proposals for ``text`` with ``position`` masked,
    the original word excluded."""
    if n <= 0:
        return []
    original = text.tokens[position].lower()
    proposals = provider.propose(text, position, n)
    return [word for word in proposals if word.lower() != original][:n]


def match_case(original: str, candidate: str) -> str:
    """Give ``candidate`` the capitalization pattern of ``original``."""
    lowered = candidate.lower()
    if original.isupper() and len(original) > 1:
        return lowered.upper()
    if original[:1].isupper():
        return lowered[:1].upper() + lowered[1:]
    return lowered


def build_candidate_set(
    text: Text,
    position: int,
    *,
    space: EmbeddingSpace | None = None,
    mlm: MaskedLMProvider | None = None,
    tagger: PosTagger,
    encoder: SentenceEncoder,
    top_n: int,
    sim_threshold: float,
    mode: str = "mixed",
) -> CandidateSet:
    """Assemble the filtered substitution candidates for one position.

    ``mode`` selects the sources: ``embedding``, ``mlm`` or ``mixed``
    (the union).  Surviving candidates are ordered by similarity
    descending, ties lexicographically.
    """
    if mode not in SPACE_MODES:
        raise ConfigError(f"unknown space mode {mode!r}; expected one of {SPACE_MODES}")
    if not -1.0 <= sim_threshold < 1.0:
        raise ConfigError(f"similarity threshold must be in [-1, 1), got {sim_threshold}")
    original = text.tokens[position]

    use_embedding = mode in ("embedding", "mixed")
    use_mlm = mode in ("mlm", "mixed")
    if use_embedding and space is None:
        raise ConfigError(f"space mode {mode!r} needs an embedding space")
    if use_mlm and mlm is None:
        raise ConfigError(f"space mode {mode!r} needs a masked-LM provider")

    # Union with provenance, deduplicated before any filtering.  Keys are
    # the case-adapted surface forms actually substituted into the text.
    sources: dict[str, set[str]] = {}
    if use_embedding:
        assert space is not None
        for word in space.neighbors(original, top_n):
            sources.setdefault(match_case(original, word), set()).add("embedding")
    if use_mlm:
        assert mlm is not None
        for word in mlm_candidates(mlm, text, position, top_n):
            sources.setdefault(match_case(original, word), set()).add("mlm")

    original_lower = original.lower()
    original_tag = tagger.tag(text.tokens, position)
    survivors = []
    for word, origins in sources.items():
        if word.lower() == original_lower:
            continue
        variant = substitute(text, position, word)
        if tagger.tag(variant.tokens, position) != original_tag:
            continue
        similarity = sentence_similarity(encoder, text, variant)
        if similarity <= sim_threshold:
            continue
        source = "both" if len(origins) == 2 else next(iter(origins))
        survivors.append(Candidate(word=word, source=source, similarity=similarity))

    survivors.sort(key=lambda c: (-c.similarity, c.word))
    return CandidateSet(position=position, candidates=tuple(survivors))
