import random

import pytest

from util import ConstantTagger, hashed_bow_oracle

from wordbeam.candidates import (
    build_candidate_set,
    match_case,
    mlm_candidates,
    sentence_similarity,
)
from wordbeam.errors import ConfigError
from wordbeam.spaces import EmbeddingSpace, HashedBowEncoder, LexiconPosTagger, TableMaskedLM
from wordbeam.text import Text, substitute, tokenize


@pytest.fixture
def encoder():
    return HashedBowEncoder()


class TestSentenceSimilarity:
    def test_identical_texts(self, encoder):
        text = tokenize("a good movie about nothing")
        assert sentence_similarity(encoder, text, text) == pytest.approx(1.0, abs=1e-9)

    def test_half_overlap_pair(self, encoder):
        # two-token texts sharing one token: cosine is exactly
        # (1/sqrt(2)) * (1/sqrt(2)) = 0.5 when no buckets collide
        a = tokenize("good movie")
        b = tokenize("fine movie")
        assert sentence_similarity(encoder, a, b) == pytest.approx(0.5, abs=1e-9)

    def test_symmetry_on_random_pairs(self, encoder):
        rng = random.Random(23)
        vocabulary = [f"w{i}" for i in range(20)]
        for _ in range(100):
            a = Text(tuple(rng.choices(vocabulary, k=rng.randint(0, 6))))
            b = Text(tuple(rng.choices(vocabulary, k=rng.randint(0, 6))))
            assert sentence_similarity(encoder, a, b) == sentence_similarity(encoder, b, a)

    def test_zero_vector_gives_zero(self, encoder):
        assert sentence_similarity(encoder, Text(()), tokenize("words here")) == 0.0

    def test_matches_oracle_cosine(self, encoder):
        a = tokenize("the plot drags on")
        b = tokenize("the plot moves along")
        oracle = sum(
            x * y for x, y in zip(hashed_bow_oracle(a.tokens), hashed_bow_oracle(b.tokens))
        )
        assert sentence_similarity(encoder, a, b) == pytest.approx(oracle, abs=1e-12)


class TestMlmCandidates:
    def test_excludes_original_word(self):
        provider = TableMaskedLM({"good": ["good", "great"]})
        assert mlm_candidates(provider, Text(("good",)), 0, 5) == ["great"]

    def test_original_excluded_case_insensitively(self):
        provider = TableMaskedLM({"good": ["Good", "great"]})
        assert mlm_candidates(provider, Text(("good",)), 0, 5) == ["great"]

    def test_n_zero(self):
        provider = TableMaskedLM({"good": ["great"]})
        assert mlm_candidates(provider, Text(("good",)), 0, 0) == []


class TestMatchCase:
    def test_lowercase_original(self):
        assert match_case("good", "Great") == "great"

    def test_initial_cap(self):
        assert match_case("Good", "great") == "Great"

    def test_all_caps(self):
        assert match_case("GOOD", "great") == "GREAT"

    def test_single_upper_char(self):
        assert match_case("A", "b") == "B"


def _space(**vocabulary):
    return EmbeddingSpace(vocabulary)


class TestBuildCandidateSet:
    def test_union_with_provenance(self, encoder):
        space = _space(good=(1, 0), great=(0.95, 0.05), fine=(0.9, 0.1), far=(0, 1))
        provider = TableMaskedLM({"good": ["great", "nice"]})
        cset = build_candidate_set(
            Text(("good", "movie")),
            0,
            space=space,
            mlm=provider,
            tagger=ConstantTagger(),
            encoder=encoder,
            top_n=2,
            sim_threshold=-1.0,
            mode="mixed",
        )
        by_word = {c.word: c.source for c in cset.candidates}
        assert by_word == {"great": "both", "fine": "embedding", "nice": "mlm"}

    def test_original_word_never_included(self, encoder):
        provider = TableMaskedLM({"good": ["good", "Good", "great"]})
        cset = build_candidate_set(
            Text(("good",)),
            0,
            mlm=provider,
            tagger=ConstantTagger(),
            encoder=encoder,
            top_n=5,
            sim_threshold=-1.0,
            mode="mlm",
        )
        assert cset.words == ("great",)

    def test_strict_similarity_threshold(self, encoder):
        # single-substitution variant of a two-token text scores exactly
        # 0.5, so a threshold of 0.5 must remove it (strict inequality)
        provider = TableMaskedLM({"good": ["fine"]})
        kwargs = dict(
            mlm=provider,
            tagger=ConstantTagger(),
            encoder=encoder,
            top_n=5,
            mode="mlm",
        )
        text = Text(("good", "movie"))
        at_threshold = build_candidate_set(text, 0, sim_threshold=0.5, **kwargs)
        below = build_candidate_set(text, 0, sim_threshold=0.49, **kwargs)
        assert at_threshold.words == ()
        assert below.words == ("fine",)

    def test_pos_filter_drops_mismatched_tags(self, encoder):
        tagger = LexiconPosTagger({"good": "ADJ", "well": "ADV", "great": "ADJ"})
        provider = TableMaskedLM({"good": ["well", "great"]})
        cset = build_candidate_set(
            Text(("good", "movie")),
            0,
            mlm=provider,
            tagger=tagger,
            encoder=encoder,
            top_n=5,
            sim_threshold=-1.0,
            mode="mlm",
        )
        assert cset.words == ("great",)

    def test_candidate_tagged_in_context(self, encoder):
        # The tagger sees the candidate substituted into the original
        # sentence, not the word in isolation.
        calls = []

        class RecordingTagger:
            def tag(self, tokens, position):
                calls.append(tuple(tokens))
                return "X"

        provider = TableMaskedLM({"good": ["fine"]})
        text = Text(("good", "movie"))
        build_candidate_set(
            text,
            0,
            mlm=provider,
            tagger=RecordingTagger(),
            encoder=encoder,
            top_n=5,
            sim_threshold=-1.0,
            mode="mlm",
        )
        assert ("good", "movie") in calls
        assert ("fine", "movie") in calls

    def test_mode_validation(self, encoder):
        with pytest.raises(ConfigError):
            build_candidate_set(
                Text(("a",)),
                0,
                tagger=ConstantTagger(),
                encoder=encoder,
                top_n=5,
                sim_threshold=0.5,
                mode="nonsense",
            )

    def test_embedding_mode_requires_space(self, encoder):
        with pytest.raises(ConfigError):
            build_candidate_set(
                Text(("a",)),
                0,
                tagger=ConstantTagger(),
                encoder=encoder,
                top_n=5,
                sim_threshold=0.5,
                mode="embedding",
            )

    def test_ordering_by_similarity_then_word(self, encoder):
        provider = TableMaskedLM({"good": ["zz", "aa"]})
        cset = build_candidate_set(
            Text(("good", "movie", "tonight")),
            0,
            mlm=provider,
            tagger=ConstantTagger(),
            encoder=encoder,
            top_n=5,
            sim_threshold=-1.0,
            mode="mlm",
        )
        sims = [c.similarity for c in cset.candidates]
        assert sims == sorted(sims, reverse=True)
        if sims[0] == sims[1]:
            assert cset.words == ("aa", "zz")

    def test_case_adapted_candidates(self, encoder):
        provider = TableMaskedLM({"good": ["great"]})
        cset = build_candidate_set(
            Text(("Good", "movie")),
            0,
            mlm=provider,
            tagger=ConstantTagger(),
            encoder=encoder,
            top_n=5,
            sim_threshold=-1.0,
            mode="mlm",
        )
        assert cset.words == ("Great",)


def _random_world(rng):
    vocabulary = {}
    tags = {}
    tag_choices = ("ADJ", "NOUN", "VERB")
    words = [f"w{i:02d}" for i in range(30)]
    for word in words:
        vocabulary[word] = [rng.uniform(-1, 1) for _ in range(5)]
        tags[word] = rng.choice(tag_choices)
    table = {
        word: rng.sample([w for w in words if w != word], rng.randint(0, 5))
        for word in words
    }
    space = EmbeddingSpace(vocabulary)
    tagger = LexiconPosTagger(tags)
    provider = TableMaskedLM(table)
    tokens = tuple(rng.choices(words, k=rng.randint(2, 7)))
    return space, tagger, provider, Text(tokens)


class TestFilterGuarantees:
    def test_survivors_satisfy_both_filters(self, encoder):
        rng = random.Random(77)
        checked = 0
        for _ in range(120):
            space, tagger, provider, text = _random_world(rng)
            position = rng.randrange(len(text.tokens))
            threshold = rng.choice([0.0, 0.3, 0.5])
            cset = build_candidate_set(
                text,
                position,
                space=space,
                mlm=provider,
                tagger=tagger,
                encoder=encoder,
                top_n=rng.randint(1, 8),
                sim_threshold=threshold,
                mode="mixed",
            )
            original_tag = tagger.tag(text.tokens, position)
            for candidate in cset.candidates:
                variant = substitute(text, position, candidate.word)
                assert tagger.tag(variant.tokens, position) == original_tag
                assert candidate.similarity > threshold
                recomputed = sentence_similarity(encoder, text, variant)
                assert candidate.similarity == pytest.approx(recomputed, abs=1e-12)
                checked += 1
        assert checked > 100

    def test_monotone_in_threshold(self, encoder):
        rng = random.Random(78)
        for _ in range(60):
            space, tagger, provider, text = _random_world(rng)
            position = rng.randrange(len(text.tokens))
            kwargs = dict(
                space=space,
                mlm=provider,
                tagger=tagger,
                encoder=encoder,
                top_n=6,
                mode="mixed",
            )
            loose = build_candidate_set(text, position, sim_threshold=0.3, **kwargs)
            tight = build_candidate_set(text, position, sim_threshold=0.7, **kwargs)
            assert set(tight.words) <= set(loose.words)

    def test_monotone_in_top_n_before_filtering(self, encoder):
        rng = random.Random(79)
        for _ in range(40):
            space, tagger, provider, text = _random_world(rng)
            position = rng.randrange(len(text.tokens))
            kwargs = dict(
                space=space,
                mlm=provider,
                tagger=tagger,
                encoder=encoder,
                sim_threshold=-1.0,
                mode="mixed",
            )
            small = build_candidate_set(text, position, top_n=2, **kwargs)
            large = build_candidate_set(text, position, top_n=8, **kwargs)
            assert set(small.words) <= set(large.words)

    def test_mixed_equals_union_of_single_modes(self, encoder):
        rng = random.Random(80)
        for _ in range(50):
            space, tagger, provider, text = _random_world(rng)
            position = rng.randrange(len(text.tokens))
            kwargs = dict(
                space=space,
                mlm=provider,
                tagger=ConstantTagger(),
                encoder=encoder,
                top_n=6,
                sim_threshold=-1.0,
            )
            mixed = build_candidate_set(text, position, mode="mixed", **kwargs)
            emb = build_candidate_set(text, position, mode="embedding", **kwargs)
            mlm = build_candidate_set(text, position, mode="mlm", **kwargs)
            assert set(mixed.words) == set(emb.words) | set(mlm.words)
