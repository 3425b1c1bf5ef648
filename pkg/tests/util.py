"""Shared helpers for the test suite.

Keeps independent re-implementations (sigmoid, softmax, hashed
bag-of-words) used as oracles, plus a generator for tiny random attack
instances small enough for the exhaustive oracle.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass

from wordbeam import (
    AttackConfig,
    HashedBowEncoder,
    LabelSet,
    LexiconModel,
    Providers,
    StopwordList,
    TableMaskedLM,
    Text,
)

STUB_LABELS = LabelSet(("pos", "neg"))


def sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def softmax(scores: list[float]) -> list[float]:
    peak = max(scores)
    exps = [math.exp(s - peak) for s in scores]
    total = sum(exps)
    return [e / total for e in exps]


def fnv1a64_oracle(data: bytes) -> int:
    h = 14695981039346656037
    for byte in data:
        h ^= byte
        h = (h * 1099511628211) % (1 << 64)
    return h


def hashed_bow_oracle(tokens: tuple[str, ...], dimension: int = 256) -> list[float]:
    counts = Counter(fnv1a64_oracle(t.encode("utf-8")) % dimension for t in tokens)
    vector = [float(counts.get(i, 0)) for i in range(dimension)]
    norm = math.sqrt(sum(v * v for v in vector))
    return vector if norm == 0 else [v / norm for v in vector]


class ConstantTagger:
    """Single-tag stub: every token gets the same coarse tag."""

    def __init__(self, tag: str = "X"):
        self._tag = tag

    def tag(self, tokens, position):
        return self._tag


NO_STOPWORDS = StopwordList(())


@dataclass
class TinyInstance:
    """A randomly generated attack small enough to enumerate."""

    text: Text
    gold_label: int
    model: LexiconModel
    providers: Providers
    config: AttackConfig


_POSITION_WORDS = ["alpha", "beta", "gamma", "delta"]
_CANDIDATE_WORDS = ["ca", "cb", "cc", "cd", "ce", "cf", "cg", "ch", "ci", "cj", "ck", "cl"]


def make_tiny_instance(rng: random.Random) -> TinyInstance:
    """Random binary-lexicon attack: 2-4 positions, up to 3 candidates each.

    The gold label is the victim's own prediction on the original text,
    so every instance is genuinely attacked rather than skipped.
    """
    n = rng.randint(2, 4)
    tokens = _POSITION_WORDS[:n]
    table = {}
    pool = list(_CANDIDATE_WORDS)
    rng.shuffle(pool)
    cursor = 0
    for token in tokens:
        count = rng.randint(0, 3)
        table[token] = pool[cursor : cursor + count]
        cursor += count

    weights = {
        word: rng.uniform(-3.0, 3.0) for word in tokens + _CANDIDATE_WORDS
    }
    model = LexiconModel(STUB_LABELS, weights)
    text = Text(tokens=tuple(tokens))
    gold_label = 0 if sum(weights[t] for t in tokens) > 0 else 1

    providers = Providers(
        tagger=ConstantTagger(),
        encoder=HashedBowEncoder(),
        stopwords=NO_STOPWORDS,
        embedding=None,
        mlm=TableMaskedLM(table),
    )
    config = AttackConfig(
        beam_size=None,
        top_n=3,
        sim_threshold=-1.0,
        space_mode="mlm",
    )
    return TinyInstance(text=text, gold_label=gold_label, model=model, providers=providers, config=config)


def ranked_candidate_sets(instance: TinyInstance):
    """Precompute the instance's candidate sets in attack order,
    mirroring what the beam engine does internally."""
    from wordbeam import build_candidate_set, importance_scores, rank_positions

    scores = importance_scores(instance.text, instance.model, instance.gold_label)
    order = rank_positions(scores, instance.text, instance.providers.stopwords)
    return [
        build_candidate_set(
            instance.text,
            position,
            space=instance.providers.embedding,
            mlm=instance.providers.mlm,
            tagger=instance.providers.tagger,
            encoder=instance.providers.encoder,
            top_n=instance.config.top_n,
            sim_threshold=instance.config.sim_threshold,
            mode=instance.config.space_mode,
        )
        for position in order
    ]


def beam_benefit_instance() -> TinyInstance:
    """Hand-built three-class attack where greedy search dead-ends.

    The highest-drop first move boosts a runner-up class that no later
    substitution can push past the gold class, while the second-ranked
    move opens a two-step label flip.  Greedy (one survivor) commits to
    the dead end; a width of two keeps the winning branch alive.
    """
    labels = LabelSet(("c0", "c1", "c2"))
    weights = {
        "alpha": [2.0, 0.0, 0.0],
        "beta": [0.0, 0.0, 0.0],
        "brisk": [2.0, 1.98, -5.0],  # big drop, but c1 can never overtake
        "crisp": [2.0, 0.0, 1.0],  # smaller drop, c2 within reach
        "delta": [0.0, 0.0, 1.1],
    }
    model = LexiconModel(labels, weights, bias=[0.0, 0.0, 0.0])
    table = {"alpha": ["brisk", "crisp"], "beta": ["delta"]}
    providers = Providers(
        tagger=ConstantTagger(),
        encoder=HashedBowEncoder(),
        stopwords=NO_STOPWORDS,
        embedding=None,
        mlm=TableMaskedLM(table),
    )
    config = AttackConfig(beam_size=1, top_n=5, sim_threshold=-1.0, space_mode="mlm")
    return TinyInstance(
        text=Text(tokens=("alpha", "beta")),
        gold_label=0,
        model=model,
        providers=providers,
        config=config,
    )
