"""Pure-numpy inference kernels; drop-in fallback for the compiled module.

Both backends share a contract: the driver precomputes the group-topic dot
products (one BLAS call per document chunk), kernels turn them into
assignments and M-step partials. Argmax ties resolve to the lowest topic
index; rank 2 picks the second-largest score.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def e_step_chunk(sims, inv_norms, priors, ranks, sizes):
    """Assign each group row to its rank-1 or rank-2 best topic.

    sims: (G, k) float64 dot products of unit group rows with topic vectors.
    inv_norms: (k,) float64 inverse topic norms, 0 for zero-norm topics.
    priors: (D, k) float64 rows of p(t|d); ranks: (D,) int8 of 1s and 2s;
    sizes: (D,) int64 group counts. Returns (G,) int32 assignments.
    """
    doc_idx = np.repeat(np.arange(len(sizes)), sizes)
    scores = sims * inv_norms
    scores *= priors[doc_idx]
    best = scores.argmax(axis=1)
    out = best.astype(np.int32)
    second_rows = np.flatnonzero(ranks[doc_idx] == 2)
    if second_rows.size:
        sub = scores[second_rows]
        sub[np.arange(sub.shape[0]), best[second_rows]] = -np.inf
        out[second_rows] = sub.argmax(axis=1).astype(np.int32)
    return out


def accumulate_chunk(x, assignments, sizes, k):
    """Per-chunk M-step partials: topic vector sums, topic counts, per-doc counts."""
    dim = x.shape[1]
    sums = np.zeros((k, dim), dtype=np.float64)
    counts = np.zeros(k, dtype=np.int64)
    for t in range(k):
        mask = assignments == t
        n = int(mask.sum())
        if n:
            sums[t] = x[mask].sum(axis=0)
            counts[t] = n
    doc_idx = np.repeat(np.arange(len(sizes)), sizes)
    doc_topic = np.zeros((len(sizes), k), dtype=np.int64)
    np.add.at(doc_topic, (doc_idx, assignments), 1)
    return sums, counts, doc_topic
