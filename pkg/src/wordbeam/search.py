"""Merged-beam substitution search, its greedy special case, and an
exhaustive verification oracle.

One attack walks the stopword-filtered positions in importance order.
At each position every surviving variant is expanded with every
precomputed candidate, the previous survivors are merged back into the
pool (so "leave this position alone" always stays reachable), the new
variants are scored in one batch, and the pool is pruned to the best K
by drop in true-class probability.  The first iteration in which any
pool member is misclassified ends the attack; among simultaneous
successes the one most similar to the original wins.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

from .candidates import CandidateSet, build_candidate_set, sentence_similarity
from .errors import ConfigError, SearchCapExceeded
from .importance import DEFAULT_OOV_TOKEN, StopwordList, importance_scores, rank_positions
from .spaces import EmbeddingSpace, MaskedLMProvider, PosTagger, SentenceEncoder
from .text import Substitution, Text, substitute
from .victim import CountingVictim, VictimModel, predicted_label

UNBOUNDED = None  # beam size sentinel: keep every pool variant

EXHAUSTIVE_CAP = 1_000_000


@dataclass(frozen=True)
class AttackConfig:
    """Knobs shared by all search entry points.

    ``beam_size=None`` keeps the whole pool (used by the oracle
    checks).  ``wsr_threshold=1.0`` disables the substitution-rate
    bound; smaller values exclude heavily rewritten variants from the
    success check while leaving them in the beam.
    """

    beam_size: int | None = 10
    top_n: int = 50
    sim_threshold: float = 0.5
    wsr_threshold: float = 1.0
    oov_token: str = DEFAULT_OOV_TOKEN
    space_mode: str = "mixed"
    require_final_sim: bool = False

    def __post_init__(self) -> None:
        if self.beam_size is not None and self.beam_size < 1:
            raise ConfigError(f"beam size must be >= 1 or unbounded, got {self.beam_size}")
        if self.top_n < 0:
            raise ConfigError(f"top-n must be >= 0, got {self.top_n}")
        if not -1.0 <= self.sim_threshold < 1.0:
            raise ConfigError(
                f"similarity threshold must be in [-1, 1), got {self.sim_threshold}"
            )
        if not 0.0 < self.wsr_threshold <= 1.0:
            raise ConfigError(
                f"substitution-rate threshold must be in (0, 1], got {self.wsr_threshold}"
            )
        if not self.oov_token or any(ch.isspace() for ch in self.oov_token):
            raise ConfigError(f"placeholder token must be whitespace-free: {self.oov_token!r}")
        if self.space_mode not in ("embedding", "mlm", "mixed"):
            raise ConfigError(f"unknown space mode {self.space_mode!r}")


@dataclass(frozen=True)
class Providers:
    """Loaded candidate/judging components one attack needs."""

    tagger: PosTagger
    encoder: SentenceEncoder
    stopwords: StopwordList
    embedding: EmbeddingSpace | None = None
    mlm: MaskedLMProvider | None = None


@dataclass(frozen=True)
class BeamVariant:
    """One partially substituted text tracked during the search."""

    text: Text
    substitutions: tuple[Substitution, ...]
    pred: int
    true_prob: float
    drop: float  # original true-class probability minus this variant's
    similarity: float  # to the original text

    @property
    def positions(self) -> tuple[int, ...]:
        return tuple(s.position for s in self.substitutions)

    @property
    def words(self) -> tuple[str, ...]:
        return tuple(s.replacement for s in self.substitutions)


@dataclass(frozen=True)
class AttackResult:
    """Outcome of one attack.

    ``wsr``, ``similarity``, ``adversarial`` and ``adv_pred`` are set
    only on success.  ``queries`` counts texts actually sent to the
    victim, importance phase included; cache hits are free.
    """

    status: str  # "success", "failure", "skipped" or "error"
    original: Text
    adversarial: Text | None
    gold_label: int
    original_pred: int | None
    adv_pred: int | None
    substitutions: tuple[Substitution, ...]
    wsr: float | None
    similarity: float | None
    queries: int
    iterations: int
    error: str | None = field(default=None)


Observer = Callable[[int, int, tuple[BeamVariant, ...], tuple[BeamVariant, ...]], None]


def _selection_key(variant: BeamVariant) -> tuple:
    # Rank by drop descending, then similarity descending, then the
    # substitution positions and words for full determinism.
    return (-variant.drop, -variant.similarity, variant.positions, variant.words)


def _success_key(variant: BeamVariant) -> tuple:
    return (-variant.similarity, len(variant.substitutions), variant.positions, variant.words)


def _success_eligible(
    variant: BeamVariant, gold_label: int, n_tokens: int, config: AttackConfig
) -> bool:
    if not variant.substitutions or variant.pred == gold_label:
        return False
    if config.wsr_threshold < 1.0:
        if len(variant.substitutions) / n_tokens >= config.wsr_threshold:
            return False
    if config.require_final_sim and variant.similarity <= config.sim_threshold:
        return False
    return True


def _skipped(text: Text, gold_label: int, original_pred: int, queries: int) -> AttackResult:
    return AttackResult(
        status="skipped",
        original=text,
        adversarial=None,
        gold_label=gold_label,
        original_pred=original_pred,
        adv_pred=None,
        substitutions=(),
        wsr=None,
        similarity=None,
        queries=queries,
        iterations=0,
    )


def _success(
    text: Text, gold_label: int, original_pred: int, best: BeamVariant, queries: int, iterations: int
) -> AttackResult:
    return AttackResult(
        status="success",
        original=text,
        adversarial=best.text,
        gold_label=gold_label,
        original_pred=original_pred,
        adv_pred=best.pred,
        substitutions=best.substitutions,
        wsr=len(best.substitutions) / len(text.tokens),
        similarity=best.similarity,
        queries=queries,
        iterations=iterations,
    )


def _failure(
    text: Text, gold_label: int, original_pred: int, queries: int, iterations: int
) -> AttackResult:
    return AttackResult(
        status="failure",
        original=text,
        adversarial=None,
        gold_label=gold_label,
        original_pred=original_pred,
        adv_pred=None,
        substitutions=(),
        wsr=None,
        similarity=None,
        queries=queries,
        iterations=iterations,
    )


def beam_attack(
    text: Text,
    gold_label: int,
    model: VictimModel,
    providers: Providers,
    config: AttackConfig = AttackConfig(),
    observer: Observer | None = None,
) -> AttackResult:
    """Attack one text with the merged-beam search.

    The victim is wrapped in a fresh counting cache so ``queries`` in
    the result reflects this attack alone.  ``observer``, when given,
    is called as ``observer(iteration, position, pool, beam)`` after
    each completed (non-success) iteration; it exists for verification
    harnesses.
    """
    counter = CountingVictim(model)
    if not 0 <= gold_label < len(counter.labels):
        raise ConfigError(f"gold label {gold_label} outside the {len(counter.labels)}-class label set")

    original_probs = counter.predict_proba([text])[0]
    original_pred = predicted_label(original_probs)
    if original_pred != gold_label:
        return _skipped(text, gold_label, original_pred, counter.count)

    scores = importance_scores(text, counter, gold_label, config.oov_token)
    order = rank_positions(scores, text, providers.stopwords)
    candidate_sets = [
        build_candidate_set(
            text,
            position,
            space=providers.embedding,
            mlm=providers.mlm,
            tagger=providers.tagger,
            encoder=providers.encoder,
            top_n=config.top_n,
            sim_threshold=config.sim_threshold,
            mode=config.space_mode,
        )
        for position in order
    ]

    original_true = float(original_probs[gold_label])
    beam = [
        BeamVariant(
            text=text,
            substitutions=(),
            pred=original_pred,
            true_prob=original_true,
            drop=0.0,
            similarity=1.0,
        )
    ]
    n_tokens = len(text.tokens)

    for iteration, cset in enumerate(candidate_sets, start=1):
        position = cset.position
        original_token = text.tokens[position]
        pending: list[tuple[Text, tuple[Substitution, ...]]] = []
        seen = {member.text.tokens for member in beam}
        for member in beam:
            if any(s.position == position for s in member.substitutions):
                continue  # unreachable: each position is visited once
            for candidate in cset.candidates:
                variant_text = substitute(member.text, position, candidate.word)
                if variant_text.tokens in seen:
                    continue  # identical variant reached along another path
                seen.add(variant_text.tokens)
                pending.append(
                    (
                        variant_text,
                        member.substitutions
                        + (Substitution(position, original_token, candidate.word),),
                    )
                )

        fresh: list[BeamVariant] = []
        if pending:
            batch = counter.predict_proba([variant_text for variant_text, _ in pending])
            for (variant_text, substitutions), probs in zip(pending, batch):
                true_prob = float(probs[gold_label])
                fresh.append(
                    BeamVariant(
                        text=variant_text,
                        substitutions=substitutions,
                        pred=predicted_label(probs),
                        true_prob=true_prob,
                        drop=original_true - true_prob,
                        similarity=sentence_similarity(providers.encoder, text, variant_text),
                    )
                )

        pool = beam + fresh
        successes = [v for v in pool if _success_eligible(v, gold_label, n_tokens, config)]
        if successes:
            best = min(successes, key=_success_key)
            return _success(text, gold_label, original_pred, best, counter.count, iteration)

        pool.sort(key=_selection_key)
        beam = pool if config.beam_size is None else pool[: config.beam_size]
        if observer is not None:
            observer(iteration, position, tuple(pool), tuple(beam))

    return _failure(text, gold_label, original_pred, counter.count, len(candidate_sets))


def greedy_attack(
    text: Text,
    gold_label: int,
    model: VictimModel,
    providers: Providers,
    config: AttackConfig = AttackConfig(),
    observer: Observer | None = None,
) -> AttackResult:
    """The beam search with a single survivor per iteration."""
    return beam_attack(text, gold_label, model, providers, replace(config, beam_size=1), observer)


def exhaustive_attack(
    text: Text,
    gold_label: int,
    model: VictimModel,
    candidate_sets: Sequence[CandidateSet],
    config: AttackConfig = AttackConfig(),
    *,
    encoder: SentenceEncoder,
    cap: int = EXHAUSTIVE_CAP,
    batch_size: int = 512,
) -> AttackResult:
    """Verification oracle: try every keep-or-substitute combination.

    Refuses search spaces larger than ``cap`` combinations.  Among
    successful combinations the one with the fewest substitutions wins,
    ties broken by higher similarity to the original.
    """
    space = 1
    for cset in candidate_sets:
        space *= 1 + len(cset)
        if space > cap:
            raise SearchCapExceeded(
                f"exhaustive search space exceeds cap of {cap} combinations"
            )

    counter = CountingVictim(model)
    original_probs = counter.predict_proba([text])[0]
    original_pred = predicted_label(original_probs)
    if original_pred != gold_label:
        return _skipped(text, gold_label, original_pred, counter.count)

    n_tokens = len(text.tokens)
    original_true = float(original_probs[gold_label])
    choices = [[None, *cset.candidates] for cset in candidate_sets]
    best: BeamVariant | None = None

    def flush(chunk: list[tuple[Text, tuple[Substitution, ...]]]) -> None:
        nonlocal best
        batch = counter.predict_proba([variant_text for variant_text, _ in chunk])
        for (variant_text, substitutions), probs in zip(chunk, batch):
            pred = predicted_label(probs)
            if pred == gold_label:
                continue
            true_prob = float(probs[gold_label])
            variant = BeamVariant(
                text=variant_text,
                substitutions=substitutions,
                pred=pred,
                true_prob=true_prob,
                drop=original_true - true_prob,
                similarity=sentence_similarity(encoder, text, variant_text),
            )
            if not _success_eligible(variant, gold_label, n_tokens, config):
                continue
            key = (len(variant.substitutions), -variant.similarity, variant.positions, variant.words)
            if best is None or key < (len(best.substitutions), -best.similarity, best.positions, best.words):
                best = variant

    chunk: list[tuple[Text, tuple[Substitution, ...]]] = []
    for combo in itertools.product(*choices):
        variant_text = text
        substitutions: tuple[Substitution, ...] = ()
        for cset, choice in zip(candidate_sets, combo):
            if choice is None:
                continue
            variant_text = substitute(variant_text, cset.position, choice.word)
            substitutions += (
                Substitution(cset.position, text.tokens[cset.position], choice.word),
            )
        if not substitutions:
            continue  # the unmodified original cannot be adversarial
        chunk.append((variant_text, substitutions))
        if len(chunk) >= batch_size:
            flush(chunk)
            chunk = []
    if chunk:
        flush(chunk)

    if best is None:
        return _failure(text, gold_label, original_pred, counter.count, len(candidate_sets))
    return _success(text, gold_label, original_pred, best, counter.count, len(candidate_sets))
