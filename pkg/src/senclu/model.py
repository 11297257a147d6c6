"""Hard-assignment EM topic inference over sentence-group embeddings.

Each document carries a topic distribution p(t|d); each group is assigned to
the topic maximizing cos(v_g, v_t) * p(t|d). Topic vectors are centroids of
their assigned group vectors. A smoothing constant c starts at max(8, alpha)
and halves every epoch down to the user prior alpha, keeping early p(t|d)
flat so topics cannot collapse before they form; early epochs also
occasionally assign a whole document's groups to their second-best topics to
escape local minima.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._backend import get_backend
from .corpus import Corpus
from .embeddings import EmbeddingMatrix
from .errors import AlignmentError, InsufficientDataError

# Documents per kernel call. Fixed so that results are byte-identical for any
# worker count: partial sums are always reduced in chunk order.
DOC_CHUNK = 1024

MODEL_FORMAT = "senclu-model"


@dataclass(frozen=True)
class SenCluParams:
    k: int = 50
    alpha: float = 2.0
    epochs: int = 10
    n_s: int = 3
    seed: int = 0

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.n_s < 1:
            raise ValueError(f"n_s must be >= 1, got {self.n_s}")
        if self.seed < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed}")

    @property
    def c0(self) -> float:
        """Initial smoothing constant."""
        return max(8.0, float(self.alpha))


@dataclass
class TopicModel:
    topic_vectors: np.ndarray  # (k, dim) float64 centroids
    topic_doc: np.ndarray  # (n_docs, k) float64 rows of p(t|d)
    assignments: np.ndarray  # (n_groups,) int32 topic per group row
    params: SenCluParams
    epoch_log: list[dict] = field(default_factory=list)
    history: list[np.ndarray] | None = None  # per-epoch p(t|d) when recorded

    @property
    def k(self) -> int:
        return self.topic_vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.topic_vectors.shape[1]


def _as_unit_f64(emb: EmbeddingMatrix | np.ndarray) -> np.ndarray:
    if isinstance(emb, EmbeddingMatrix):
        emb = emb.vectors
    return np.ascontiguousarray(emb, dtype=np.float64)


def _inverse_norms(topic_vectors: np.ndarray) -> np.ndarray:
    norms = np.sqrt(np.einsum("ij,ij->i", topic_vectors, topic_vectors))
    inv = np.zeros_like(norms)
    np.divide(1.0, norms, out=inv, where=norms > 0.0)
    return inv


def _chunk_bounds(n_docs: int) -> list[tuple[int, int]]:
    return [(s, min(s + DOC_CHUNK, n_docs)) for s in range(0, n_docs, DOC_CHUNK)]


def init_topics(emb: EmbeddingMatrix, k: int, seed: int) -> np.ndarray:
    """Choose k distinct group vectors by k-means++ seeding under cosine.

    The first vector is uniform; each later one is drawn with probability
    proportional to (1 - best cosine to any chosen vector)^2. When every
    candidate weight is zero (duplicated vectors), the draw falls back to
    uniform over the unchosen rows.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not emb.normalized:
        raise ValueError("init_topics requires unit-normalized embeddings")
    x = _as_unit_f64(emb)
    n = x.shape[0]
    if n < k:
        raise InsufficientDataError(f"need at least k={k} groups, have {n}")
    rng = np.random.default_rng([seed, 0])
    chosen = [int(rng.integers(0, n))]
    best_sim = x @ x[chosen[0]]
    for _ in range(1, k):
        weights = np.square(1.0 - best_sim)
        weights[chosen] = 0.0
        total = weights.sum()
        if total > 0.0:
            idx = int(rng.choice(n, p=weights / total))
        else:
            unchosen = np.setdiff1d(np.arange(n), chosen)
            idx = int(unchosen[rng.integers(0, len(unchosen))])
        chosen.append(idx)
        np.maximum(best_sim, x @ x[idx], out=best_sim)
    return x[chosen].copy()


def perturbation_ranks(n_docs: int, epoch: int, epochs: int, seed: int, k: int) -> np.ndarray:
    """Per-document assignment ranks for one epoch (1-based).

    Each document draws r uniform in [0,1) from the stream seeded by
    (seed, epoch), indexed by document row; rank is 1 when
    r < 0.5 + epoch/(2*epochs), else 2. With a single topic the rank is
    always 1. Precomputing the whole vector keeps parallel E-steps identical
    to serial ones.
    """
    r = np.random.default_rng([seed, epoch]).random(n_docs)
    threshold = 0.5 + epoch / (2.0 * epochs)
    ranks = np.where(r < threshold, 1, 2).astype(np.int8)
    if k == 1:
        ranks[:] = 1
    return ranks


def e_step(
    vectors: EmbeddingMatrix | np.ndarray,
    topic_vectors: np.ndarray,
    topic_doc: np.ndarray,
    sizes: np.ndarray,
    ranks: np.ndarray,
    *,
    backend: str | None = None,
    threads: int = 1,
) -> np.ndarray:
    """Assign every group to its rank-th best topic by cos(v_g, v_t) * p(t|d)."""
    x = _as_unit_f64(vectors)
    topics = np.ascontiguousarray(topic_vectors, dtype=np.float64)
    priors = np.ascontiguousarray(topic_doc, dtype=np.float64)
    sizes = np.ascontiguousarray(sizes, dtype=np.int64)
    ranks = np.ascontiguousarray(ranks, dtype=np.int8)
    inv_norms = _inverse_norms(topics)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    kernels = get_backend(backend)

    topics_t = np.ascontiguousarray(topics.T)

    def work(bound: tuple[int, int]) -> np.ndarray:
        d0, d1 = bound
        r0, r1 = int(offsets[d0]), int(offsets[d1])
        sims = x[r0:r1] @ topics_t  # BLAS; kernels fuse the rest
        return kernels.e_step_chunk(sims, inv_norms, priors[d0:d1], ranks[d0:d1], sizes[d0:d1])

    bounds = _chunk_bounds(len(sizes))
    if not bounds:
        return np.empty(0, dtype=np.int32)
    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, bounds))
    else:
        parts = [work(b) for b in bounds]
    return np.concatenate(parts)


def m_step(
    vectors: EmbeddingMatrix | np.ndarray,
    assignments: np.ndarray,
    sizes: np.ndarray,
    c: float,
    k: int,
    *,
    backend: str | None = None,
    threads: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Recompute topic centroids and smoothed topic-document distributions.

    v_t is the mean of the group vectors assigned to t; p(t|d) is
    (count of t in d + c) / (|d| + k*c), which sums to one by construction.
    A topic with no assigned groups is reseeded to the group vector least
    similar to every currently defined topic (lowest row number on ties).
    """
    x = _as_unit_f64(vectors)
    assignments = np.ascontiguousarray(assignments, dtype=np.int32)
    sizes = np.ascontiguousarray(sizes, dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    kernels = get_backend(backend)

    def work(bound: tuple[int, int]):
        d0, d1 = bound
        r0, r1 = int(offsets[d0]), int(offsets[d1])
        return kernels.accumulate_chunk(x[r0:r1], assignments[r0:r1], sizes[d0:d1], k)

    bounds = _chunk_bounds(len(sizes))
    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, bounds))
    else:
        parts = [work(b) for b in bounds]

    dim = x.shape[1]
    sums = np.zeros((k, dim), dtype=np.float64)
    counts = np.zeros(k, dtype=np.int64)
    doc_topic_parts = []
    for part_sums, part_counts, part_doc_topic in parts:  # fixed reduction order
        sums += part_sums
        counts += part_counts
        doc_topic_parts.append(part_doc_topic)
    doc_topic = (
        np.concatenate(doc_topic_parts)
        if doc_topic_parts
        else np.zeros((0, k), dtype=np.int64)
    )

    topic_vectors = _centroids_with_reseed(x, sums, counts)
    denom = sizes.astype(np.float64) + k * c
    topic_doc = (doc_topic.astype(np.float64) + c) / denom[:, None]
    return topic_vectors, topic_doc


def _centroids_with_reseed(x: np.ndarray, sums: np.ndarray, counts: np.ndarray) -> np.ndarray:
    k, dim = sums.shape
    topics = np.zeros((k, dim), dtype=np.float64)
    nonempty = counts > 0
    topics[nonempty] = sums[nonempty] / counts[nonempty, None]
    defined = list(np.flatnonzero(nonempty))
    for t in np.flatnonzero(~nonempty):
        current = topics[defined]
        sims = (x @ current.T) * _inverse_norms(current)
        farthest = int(np.argmin(sims.max(axis=1)))
        topics[t] = x[farthest]
        defined.append(int(t))
    return topics


def anneal(c: float, alpha: float) -> float:
    """Halve the smoothing constant, floored at the user prior."""
    return max(c / 2.0, alpha)


def fit(
    corpus: Corpus,
    emb: EmbeddingMatrix,
    params: SenCluParams,
    *,
    backend: str | None = None,
    threads: int = 1,
    record_history: bool = False,
) -> TopicModel:
    """Run the full EM loop and return the fitted model.

    p(t|d) starts uniform and c at max(8, alpha); every epoch runs an E-step
    (with per-document perturbation ranks), an M-step using the current c,
    then halves c toward alpha. The epoch log records each epoch's c and how
    many group assignments changed.
    """
    if not emb.normalized:
        raise ValueError("fit requires unit-normalized embeddings; call normalize() first")
    if emb.count != corpus.group_count:
        raise AlignmentError(
            f"embeddings have {emb.count} rows but corpus has {corpus.group_count} groups"
        )
    if params.n_s != corpus.n_s:
        raise ValueError(f"params.n_s={params.n_s} does not match corpus n_s={corpus.n_s}")
    k = params.k
    if corpus.group_count < k:
        raise InsufficientDataError(
            f"need at least k={k} groups, have {corpus.group_count}"
        )

    x = _as_unit_f64(emb)
    sizes = np.asarray(corpus.doc_sizes(), dtype=np.int64)
    n_docs = len(sizes)

    topic_vectors = init_topics(emb, k, params.seed)
    topic_doc = np.full((n_docs, k), 1.0 / k, dtype=np.float64)
    c = params.c0
    previous: np.ndarray | None = None
    assignments = np.empty(0, dtype=np.int32)
    epoch_log: list[dict] = []
    history: list[np.ndarray] = []

    for epoch in range(1, params.epochs + 1):
        ranks = perturbation_ranks(n_docs, epoch, params.epochs, params.seed, k)
        assignments = e_step(
            x, topic_vectors, topic_doc, sizes, ranks, backend=backend, threads=threads
        )
        changes = len(assignments) if previous is None else int((assignments != previous).sum())
        topic_vectors, topic_doc = m_step(
            x, assignments, sizes, c, k, backend=backend, threads=threads
        )
        epoch_log.append({"epoch": epoch, "c": c, "changes": changes})
        if record_history:
            history.append(topic_doc.copy())
        c = anneal(c, params.alpha)
        previous = assignments

    return TopicModel(
        topic_vectors=topic_vectors,
        topic_doc=topic_doc,
        assignments=assignments,
        params=params,
        epoch_log=epoch_log,
        history=history if record_history else None,
    )


TRANSFORM_ITERATIONS = 5


def transform(model: TopicModel, emb_new: EmbeddingMatrix, corpus_new: Corpus) -> np.ndarray:
    """Infer p(t|d) for held-out documents with topic vectors held fixed.

    Runs a short E/M loop updating only the document distributions, with the
    smoothing constant pinned at alpha and no perturbation.
    """
    if emb_new.count != corpus_new.group_count:
        raise AlignmentError(
            f"embeddings have {emb_new.count} rows but corpus has {corpus_new.group_count} groups"
        )
    k = model.k
    sizes = np.asarray(corpus_new.doc_sizes(), dtype=np.int64)
    n_docs = len(sizes)
    if n_docs == 0:
        return np.zeros((0, k), dtype=np.float64)
    if emb_new.dim != model.dim:
        raise ValueError(f"embedding dim {emb_new.dim} does not match model dim {model.dim}")
    if not emb_new.normalized:
        raise ValueError("transform requires unit-normalized embeddings")

    x = _as_unit_f64(emb_new)
    alpha = float(model.params.alpha)
    topic_doc = np.full((n_docs, k), 1.0 / k, dtype=np.float64)
    ranks = np.ones(n_docs, dtype=np.int8)
    inv_norms = _inverse_norms(model.topic_vectors)
    denom = sizes.astype(np.float64) + k * alpha
    backend = get_backend(None)
    sims = x @ np.ascontiguousarray(model.topic_vectors.T)
    for _ in range(TRANSFORM_ITERATIONS):
        assignments = backend.e_step_chunk(sims, inv_norms, topic_doc, ranks, sizes)
        doc_idx = np.repeat(np.arange(n_docs), sizes)
        counts = np.zeros((n_docs, k), dtype=np.int64)
        np.add.at(counts, (doc_idx, assignments), 1)
        topic_doc = (counts.astype(np.float64) + alpha) / denom[:, None]
    return topic_doc


def save_model(model: TopicModel, path: str | Path, extra: dict | None = None) -> None:
    payload: dict = {
        "format": MODEL_FORMAT,
        "params": {
            "k": model.params.k,
            "alpha": model.params.alpha,
            "epochs": model.params.epochs,
            "n_s": model.params.n_s,
            "seed": model.params.seed,
        },
        "dim": model.dim,
        "topic_vectors": model.topic_vectors.tolist(),
        "topic_doc": model.topic_doc.tolist(),
        "assignments": model.assignments.tolist(),
        "epoch_log": model.epoch_log,
    }
    if extra:
        payload.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_model(path: str | Path) -> TopicModel:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != MODEL_FORMAT:
        raise ValueError(f"{path}: not a senclu model file")
    params = SenCluParams(**payload["params"])
    return TopicModel(
        topic_vectors=np.asarray(payload["topic_vectors"], dtype=np.float64),
        topic_doc=np.asarray(payload["topic_doc"], dtype=np.float64),
        assignments=np.asarray(payload["assignments"], dtype=np.int32),
        params=params,
        epoch_log=payload.get("epoch_log", []),
    )
