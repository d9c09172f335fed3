"""Cross-modal text-to-music retrieval over emotion embedding spaces.

Six strategies bridge mismatched emotion vocabularies: per-modality
classification, multi-head classification with a shared trunk, regression
into valence/arousal or word-embedding space, and two- / three-branch
triplet metric learning. Everything runs on precomputed feature vectors
with a small hand-rolled numpy core.
"""

from .errors import (
    ConfigError,
    DataError,
    MoodBridgeError,
    NumericError,
    ShapeError,
    UnsupportedOperation,
)
from .features import (
    FeatureRecord,
    FeatureTable,
    VadLexicon,
    Vocabulary,
    WordEmbeddingTable,
    default_synth_spec,
    load_features,
    load_vad_lexicon,
    load_word_embeddings,
    stratified_split,
    synth_generate,
    write_features,
)
from .models import (
    EmbeddingSpaceSpec,
    EmbeddingVector,
    ModelParams,
    StrategyConfig,
    embed,
    embed_many,
    load_checkpoint,
    rank_by_classification,
    save_checkpoint,
    strategy_loss,
    triplet_loss,
)
from .taxonomy import TaxonomyMap, manual_map, map_va, map_w2v, relevant_set
from .retrieval import build_index, query
from .evaluation import (
    EvalReport,
    confusion_matrix,
    evaluate,
    pca_project,
    precision_at_k,
    reciprocal_rank,
)
from .experiment import ExperimentConfig, run_suite, train

__version__ = "0.1.0"
