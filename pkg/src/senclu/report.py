"""Word-topic counting, scoring, and ranked top-word lists.

A word inherits the topic of the group it occurs in. Its score for a topic
combines a damped frequency term sqrt(max(n(w|t) - n_min, 0)) with the excess
probability p(t|w) - 1/k; n_min is a noise floor built from the word's
expected uniform share, its spread across topics, and its peak count inside
any single document. Words scoring <= 0 are not reported.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .corpus import Corpus

# Per topic: (word, score) pairs, scores positive and non-increasing.
TopicWordList = list[list[tuple[str, float]]]


@dataclass
class WordTopicCounts:
    vocab: list[str]  # first-occurrence order
    index: dict[str, int]
    n_wt: np.ndarray  # (V, k) int64
    n_wd_max: np.ndarray  # (V,) int64, max count of the word in any one document
    num_topics: int

    @property
    def n_w(self) -> np.ndarray:
        return self.n_wt.sum(axis=1)

    def row(self, word: str) -> int:
        if word not in self.index:
            raise KeyError(f"word {word!r} does not occur in the corpus")
        return self.index[word]


def count_words(corpus: Corpus, assignments, num_topics: int) -> WordTopicCounts:
    """Count word occurrences per topic and per document."""
    assignments = np.asarray(assignments)
    if len(assignments) != corpus.group_count:
        raise ValueError(
            f"{len(assignments)} assignments for {corpus.group_count} groups"
        )
    vocab: list[str] = []
    index: dict[str, int] = {}
    wt: list[Counter] = []  # per word: topic -> count
    wd_max: list[int] = []

    row = 0
    for doc in corpus.documents:
        doc_counts: Counter = Counter()
        for group in doc.groups:
            topic = int(assignments[row])
            row += 1
            for word in group.words:
                wi = index.get(word)
                if wi is None:
                    wi = len(vocab)
                    index[word] = wi
                    vocab.append(word)
                    wt.append(Counter())
                    wd_max.append(0)
                wt[wi][topic] += 1
                doc_counts[word] += 1
        for word, count in doc_counts.items():
            wi = index[word]
            if count > wd_max[wi]:
                wd_max[wi] = count

    n_wt = np.zeros((len(vocab), num_topics), dtype=np.int64)
    for wi, counts in enumerate(wt):
        for topic, count in counts.items():
            n_wt[wi, topic] = count
    return WordTopicCounts(
        vocab=vocab,
        index=index,
        n_wt=n_wt,
        n_wd_max=np.asarray(wd_max, dtype=np.int64),
        num_topics=num_topics,
    )


def n_min(word: str, counts: WordTopicCounts) -> float:
    """Noise floor: uniform share + population std across topics + peak per-doc count."""
    wi = counts.row(word)
    row = counts.n_wt[wi]
    return float(row.sum() / counts.num_topics + np.std(row) + counts.n_wd_max[wi])


def score(word: str, topic: int, counts: WordTopicCounts) -> float:
    """sqrt(max(n(w|t) - n_min, 0)) * (p(t|w) - 1/k); <= 0 means not reported."""
    wi = counts.row(word)
    row = counts.n_wt[wi]
    total = row.sum()
    freq = np.sqrt(max(float(row[topic]) - n_min(word, counts), 0.0))
    relevance = row[topic] / total - 1.0 / counts.num_topics
    return float(freq * relevance)


def _score_matrix(counts: WordTopicCounts) -> np.ndarray:
    n_wt = counts.n_wt.astype(np.float64)
    n_w = n_wt.sum(axis=1)
    floor = n_w / counts.num_topics + np.std(n_wt, axis=1) + counts.n_wd_max
    freq = np.sqrt(np.clip(n_wt - floor[:, None], 0.0, None))
    relevance = n_wt / n_w[:, None] - 1.0 / counts.num_topics
    return freq * relevance


def stem(word: str) -> str:
    """Strip one of the suffixes ing/es/ed/s when at least 3 letters remain."""
    for suffix in ("ing", "es", "ed", "s"):
        if word.endswith(suffix) and len(word) - len(suffix) >= 3:
            return word[: -len(suffix)]
    return word


def top_words(counts: WordTopicCounts, top_n: int, postprocess: bool = True) -> TopicWordList:
    """Ranked positive-score words per topic.

    Sorting is by descending score with lexicographic tie-break. With
    postprocessing on, words are stemmed and duplicate stems merged keeping
    the best score before truncating to top_n. Topics may come out empty.
    """
    if top_n < 1:
        raise ValueError(f"top_n must be >= 1, got {top_n}")
    scores = _score_matrix(counts)
    result: TopicWordList = []
    for topic in range(counts.num_topics):
        positive = [
            (counts.vocab[wi], float(scores[wi, topic]))
            for wi in np.flatnonzero(scores[:, topic] > 0.0)
        ]
        positive.sort(key=lambda pair: (-pair[1], pair[0]))
        if postprocess:
            merged: list[tuple[str, float]] = []
            seen: set[str] = set()
            for word, value in positive:
                stemmed = stem(word)
                if stemmed in seen:
                    continue  # sorted descending, so the first stem carries the max score
                seen.add(stemmed)
                merged.append((stemmed, value))
            positive = merged
        result.append(positive[:top_n])
    return result


def report_payload(topic_words: TopicWordList) -> list[dict]:
    return [
        {"topic": t, "words": [{"w": w, "score": s} for w, s in words]}
        for t, words in enumerate(topic_words)
    ]


def format_text_table(topic_words: TopicWordList, width: int = 10) -> str:
    """One topic per line, its top words comma-separated."""
    lines = []
    for t, words in enumerate(topic_words):
        shown = ", ".join(w for w, _ in words[:width])
        lines.append(f"{t:>4}  {shown}")
    return "\n".join(lines) + "\n"
