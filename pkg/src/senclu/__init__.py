"""Bag-of-sentences topic modeling toolkit.

Pipeline: tokenize documents into sentence groups, embed each group with an
external provider, optionally build a cleaned triplet dataset to fine-tune
that provider, then infer topics with hard-assignment EM and report ranked
topic words plus NMI/NPMI quality metrics.
"""

from ._backend import available_backends, get_backend
from .corpus import (
    Corpus,
    Document,
    LoadReport,
    SentenceGroup,
    build_document,
    group_sentences,
    load_corpus,
    split_sentences,
    tokenize_words,
)
from .embeddings import (
    EmbeddingMatrix,
    cosine,
    load_embeddings,
    normalize,
    request_embeddings,
    write_embeddings,
)
from .errors import (
    AlignmentError,
    CorpusFormatError,
    DegenerateVectorError,
    EmbeddingFormatError,
    InsufficientDataError,
    InsufficientDocumentsError,
    IntegrityError,
    OverFilterError,
    ProviderError,
    SenCluError,
    UndefinedCoherenceError,
)
from .evaluate import (
    CoherenceSource,
    build_coherence_source,
    doc_clusters,
    nmi,
    npmi_coherence,
    npmi_pair,
    per_topic_npmi,
)
from .model import (
    SenCluParams,
    TopicModel,
    anneal,
    e_step,
    fit,
    init_topics,
    load_model,
    m_step,
    perturbation_ranks,
    save_model,
    transform,
)
from .report import (
    WordTopicCounts,
    count_words,
    n_min,
    score,
    top_words,
)
from .triplets import (
    FtParams,
    GroupRef,
    Triplet,
    build_triplets,
    export_triplets,
    filter_triplets,
    write_trainer_sidecar,
)

__version__ = "0.1.0"
