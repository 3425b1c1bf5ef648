"""Black-box word-substitution attacks with merged-beam search.

The package splits into a small core (text handling, victims,
importance ranking, candidate generation, search, evaluation), a
FastAPI service wrapping that core, and a command-line client of the
service.
"""

from .candidates import Candidate, CandidateSet, build_candidate_set, sentence_similarity
from .errors import ConfigError, ProtocolError, SearchCapExceeded, WordbeamError
from .evaluate import (
    Dataset,
    MetricsReport,
    evaluate,
    export_advtrain,
    fold_metrics,
    load_dataset,
    load_results,
    save_results,
    transfer_evaluate,
)
from .importance import ImportanceScore, StopwordList, importance_scores, rank_positions
from .search import (
    UNBOUNDED,
    AttackConfig,
    AttackResult,
    Providers,
    beam_attack,
    exhaustive_attack,
    greedy_attack,
)
from .spaces import (
    EmbeddingSpace,
    HashedBowEncoder,
    LexiconPosTagger,
    SubprocessMaskedLM,
    TableMaskedLM,
)
from .text import Substitution, Text, detokenize, substitute, tokenize
from .victim import CountingVictim, LabelSet, LexiconModel, spawn_external_victim

__version__ = "0.1.0"

__all__ = [
    "AttackConfig",
    "AttackResult",
    "Candidate",
    "CandidateSet",
    "ConfigError",
    "CountingVictim",
    "Dataset",
    "EmbeddingSpace",
    "HashedBowEncoder",
    "ImportanceScore",
    "LabelSet",
    "LexiconModel",
    "LexiconPosTagger",
    "MetricsReport",
    "ProtocolError",
    "Providers",
    "SearchCapExceeded",
    "StopwordList",
    "SubprocessMaskedLM",
    "Substitution",
    "TableMaskedLM",
    "Text",
    "UNBOUNDED",
    "WordbeamError",
    "beam_attack",
    "build_candidate_set",
    "detokenize",
    "evaluate",
    "exhaustive_attack",
    "export_advtrain",
    "fold_metrics",
    "greedy_attack",
    "importance_scores",
    "load_dataset",
    "load_results",
    "rank_positions",
    "save_results",
    "sentence_similarity",
    "spawn_external_victim",
    "substitute",
    "tokenize",
    "transfer_evaluate",
]
