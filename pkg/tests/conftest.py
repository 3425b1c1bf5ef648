import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from wordbeam import Providers
from wordbeam.config import fixture_path
from wordbeam.importance import load_stopwords
from wordbeam.spaces import HashedBowEncoder, load_embeddings, load_mlm_table, load_pos_lexicon
from wordbeam.victim import load_lexicon_model

STUBS = Path(__file__).parent / "stubs"


@pytest.fixture(scope="session")
def toy_victim():
    return load_lexicon_model(fixture_path("victim_toy.json"))


@pytest.fixture(scope="session")
def toy_providers():
    return Providers(
        tagger=load_pos_lexicon(fixture_path("pos_lexicon_toy.tsv")),
        encoder=HashedBowEncoder(),
        stopwords=load_stopwords(fixture_path("stopwords_en.txt")),
        embedding=load_embeddings(fixture_path("embeddings_toy.txt")),
        mlm=load_mlm_table(fixture_path("mlm_table_toy.tsv")),
    )


@pytest.fixture(scope="session")
def toy_corpus_path():
    return fixture_path("corpus_toy.jsonl")
