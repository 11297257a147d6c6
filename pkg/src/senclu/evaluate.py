"""Clustering and coherence metrics for fitted models.

NMI compares model-induced document clusters (argmax of p(t|d)) against
ground-truth labels, normalized by the arithmetic mean of the two entropies.
Topic coherence is document-level normalized PMI over the top-word pairs of
each topic, computed against a reference corpus.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

from .corpus import load_corpus
from .errors import UndefinedCoherenceError
from .model import TopicModel
from .report import TopicWordList


def doc_clusters(model: TopicModel) -> np.ndarray:
    """Most probable topic per document; ties go to the lowest index."""
    return np.argmax(model.topic_doc, axis=1)


def nmi(pred, truth) -> float:
    """Mutual information over the mean of the two label entropies, natural log.

    Two constant labelings describe the same one-block partition and score 1.
    """
    pred = list(pred)
    truth = list(truth)
    if len(pred) != len(truth):
        raise ValueError(f"label length mismatch: {len(pred)} vs {len(truth)}")
    n = len(pred)
    if n == 0:
        raise ValueError("cannot compute NMI of empty labelings")

    joint = Counter(zip(pred, truth))
    pred_counts = Counter(pred)
    truth_counts = Counter(truth)

    h_pred = -sum((c / n) * math.log(c / n) for c in pred_counts.values())
    h_truth = -sum((c / n) * math.log(c / n) for c in truth_counts.values())
    if h_pred == 0.0 and h_truth == 0.0:
        return 1.0

    info = 0.0
    for (a, b), c in joint.items():
        p_ab = c / n
        info += p_ab * math.log(p_ab / ((pred_counts[a] / n) * (truth_counts[b] / n)))
    value = max(info, 0.0) / ((h_pred + h_truth) / 2.0)
    return max(0.0, min(1.0, value))


@dataclass
class CoherenceSource:
    """Document-level binary co-occurrence statistics from a reference corpus."""

    doc_count: int
    word_doc_freq: dict[str, int]
    pair_doc_freq: dict[tuple[str, str], int]


def build_coherence_source(
    reference_corpus_path: str | Path, vocabulary: set[str]
) -> CoherenceSource:
    """Count, per reference document, which vocabulary words (and pairs) occur."""
    reference = load_corpus(reference_corpus_path, n_s=1)
    if not reference.documents:
        raise ValueError(f"{reference_corpus_path}: reference corpus has no documents")
    vocabulary = set(vocabulary)
    word_doc_freq: Counter = Counter()
    pair_doc_freq: Counter = Counter()
    for doc in reference.documents:
        present = {w for g in doc.groups for w in g.words if w in vocabulary}
        for word in present:
            word_doc_freq[word] += 1
        for pair in combinations(sorted(present), 2):
            pair_doc_freq[pair] += 1
    return CoherenceSource(
        doc_count=len(reference.documents),
        word_doc_freq=dict(word_doc_freq),
        pair_doc_freq=dict(pair_doc_freq),
    )


def npmi_pair(w1: str, w2: str, source: CoherenceSource) -> float | None:
    """NPMI of one word pair, or None when a marginal is zero (unscorable).

    Probabilities are document frequencies over the reference size; a joint
    count of zero is smoothed up to one occurrence so the pair scores finitely
    negative instead of -inf. Words co-occurring in every document score 1.
    """
    f1 = source.word_doc_freq.get(w1, 0)
    f2 = source.word_doc_freq.get(w2, 0)
    if f1 == 0 or f2 == 0:
        return None
    dc = source.doc_count
    key = (w1, w2) if w1 <= w2 else (w2, w1)
    joint = source.pair_doc_freq.get(key, 0)
    p12 = (joint if joint > 0 else 1) / dc
    if p12 >= 1.0:
        return 1.0
    p1 = f1 / dc
    p2 = f2 / dc
    return math.log(p12 / (p1 * p2)) / (-math.log(p12))


def per_topic_npmi(
    topic_words: TopicWordList, source: CoherenceSource, top_n: int
) -> list[float | None]:
    """Mean pair NPMI per topic; None for topics without a scorable pair."""
    result: list[float | None] = []
    for words_scored in topic_words:
        words = [w for w, _ in words_scored[:top_n]]
        scores = [
            s
            for w1, w2 in combinations(words, 2)
            if (s := npmi_pair(w1, w2, source)) is not None
        ]
        result.append(sum(scores) / len(scores) if scores else None)
    return result


def npmi_coherence(topic_words: TopicWordList, source: CoherenceSource, top_n: int) -> float:
    """Mean topic coherence over the topics that have scorable word pairs."""
    per_topic = [v for v in per_topic_npmi(topic_words, source, top_n) if v is not None]
    if not per_topic:
        raise UndefinedCoherenceError("no topic has two reference-scorable words")
    return sum(per_topic) / len(per_topic)
