"""Word-embedding similarity features for sarcasm detection.

Pipeline stages: embedding tables -> tokenization and content-word
selection -> pairwise similarity features (raw and distance-weighted)
-> prior feature sets (n-grams, lexicon categories, pragmatic markers,
polarity-sequence incongruity) -> linear classifier -> cross-validated
experiment grid with gain reports.
"""

from .classify import LinearModel, TrainConfig, load_model, save_model, train
from .embeddings import (
    EmbeddingTable,
    cosine_similarity,
    intersect_vocabularies,
    load_embeddings,
    save_text_vectors,
)
from .features import (
    ExperimentConfig,
    FeatureRegistry,
    FeatureVector,
    Lexicon,
    build_config_features,
    default_lexicon,
    load_lexicon,
)
from .harness import (
    LabeledInstance,
    MatrixResult,
    MetricsReport,
    Resources,
    compute_gains,
    emit_report,
    load_dataset,
    run_config,
    run_matrix,
    stratified_kfold,
)
from .similarity import (
    Augmentation,
    PairwiseScores,
    embed_features,
    pairwise_scores,
    unweighted_features,
    weighted_features,
)
from .synthetic import generate_corpus, toy_embedding_tables
from .text import (
    CasingPolicy,
    ContentWordSet,
    TokenizedSentence,
    content_words,
    default_stopwords,
    load_stopwords,
    tokenize,
)

__version__ = "0.1.0"

__all__ = [
    "Augmentation",
    "CasingPolicy",
    "ContentWordSet",
    "EmbeddingTable",
    "ExperimentConfig",
    "FeatureRegistry",
    "FeatureVector",
    "LabeledInstance",
    "Lexicon",
    "LinearModel",
    "MatrixResult",
    "MetricsReport",
    "PairwiseScores",
    "Resources",
    "TokenizedSentence",
    "TrainConfig",
    "build_config_features",
    "compute_gains",
    "content_words",
    "cosine_similarity",
    "default_lexicon",
    "default_stopwords",
    "emit_report",
    "embed_features",
    "generate_corpus",
    "intersect_vocabularies",
    "load_dataset",
    "load_embeddings",
    "load_lexicon",
    "load_model",
    "load_stopwords",
    "pairwise_scores",
    "run_config",
    "run_matrix",
    "save_model",
    "save_text_vectors",
    "stratified_kfold",
    "tokenize",
    "toy_embedding_tables",
    "train",
    "unweighted_features",
    "weighted_features",
]
