"""Shared fixture builders for the test suite."""

from __future__ import annotations

import numpy as np

from senclu import EmbeddingMatrix
from senclu.corpus import Corpus, Document, SentenceGroup


def make_corpus(group_counts: list[int], n_s: int = 3, labels: list[str] | None = None) -> Corpus:
    """A corpus with the given number of groups per document; texts are synthetic."""
    docs = []
    for di, n_groups in enumerate(group_counts):
        doc_id = f"d{di}"
        groups = tuple(
            SentenceGroup(
                doc_id=doc_id,
                index=gi,
                sentences=(f"sentence {di} {gi}",),
                words=(f"w{di}", f"g{gi}"),
            )
            for gi in range(n_groups)
        )
        label = labels[di] if labels else None
        docs.append(Document(id=doc_id, label=label, groups=groups))
    return Corpus(documents=docs, n_s=n_s)


def random_unit_rows(n: int, dim: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    rows = rng.standard_normal((n, dim))
    return rows / np.linalg.norm(rows, axis=1, keepdims=True)


def unit_matrix(rows: np.ndarray) -> EmbeddingMatrix:
    rows = np.asarray(rows, dtype=np.float64)
    rows = rows / np.linalg.norm(rows, axis=1, keepdims=True)
    return EmbeddingMatrix(rows.astype(np.float32), normalized=True)


def simplex_centroids(k: int, dim: int) -> np.ndarray:
    """k maximally separated unit vectors (regular simplex); 120 deg apart for k=3."""
    if k == 1:
        cents = np.zeros((1, dim))
        cents[0, 0] = 1.0
        return cents
    eye = np.eye(k)
    pts = eye - eye.mean(axis=0)
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    cents = np.zeros((k, dim))
    cents[:, :k] = pts
    return cents


def orthogonal_centroids(k: int, dim: int) -> np.ndarray:
    return np.eye(dim)[:k]


def planted_corpus(
    seed: int,
    n_docs: int = 300,
    groups_per_doc: int = 6,
    k: int = 3,
    dim: int = 16,
    noise_deg: float = 15.0,
    purity: float = 0.9,
    centroids: np.ndarray | None = None,
    n_s: int = 3,
):
    """Documents whose group embeddings come from k planted unit-sphere clusters.

    Each document belongs to one cluster; each of its groups is drawn from
    that cluster with the given purity, else from a uniformly random other
    one. A group vector is its cluster centroid rotated by a uniform angle up
    to noise_deg along a random orthogonal direction.
    """
    rng = np.random.default_rng(seed)
    cents = simplex_centroids(k, dim) if centroids is None else centroids
    labels = rng.integers(0, k, n_docs)
    rows, docs, group_clusters = [], [], []
    for d in range(n_docs):
        groups = []
        for g in range(groups_per_doc):
            c = int(labels[d])
            if k > 1 and rng.random() >= purity:
                c = (c + 1 + int(rng.integers(0, k - 1))) % k
            cent = cents[c]
            z = rng.standard_normal(dim)
            z -= z.dot(cent) * cent
            z /= np.linalg.norm(z)
            theta = np.deg2rad(rng.random() * noise_deg)
            rows.append(np.cos(theta) * cent + np.sin(theta) * z)
            group_clusters.append(c)
            groups.append(
                SentenceGroup(
                    doc_id=f"d{d}", index=g, sentences=(f"s{g}",), words=(f"w{c}",)
                )
            )
        docs.append(Document(id=f"d{d}", label=str(int(labels[d])), groups=tuple(groups)))
    corpus = Corpus(documents=docs, n_s=n_s)
    emb = unit_matrix(np.asarray(rows))
    return corpus, emb, labels, np.asarray(group_clusters)
