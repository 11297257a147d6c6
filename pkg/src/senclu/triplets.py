"""Triplet dataset construction and filtering for encoder fine-tuning.

Anchors pair with their adjacent sentence group in the same document
(assumed same topic) and with a random group from another document (assumed
different topic). Two cleaning passes then drop the triplets most likely to
violate those assumptions, ranked by embedding distances.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .corpus import Corpus
from .embeddings import EmbeddingMatrix
from .errors import InsufficientDocumentsError, IntegrityError, OverFilterError


class GroupRef(NamedTuple):
    doc: str
    group: int


@dataclass(frozen=True)
class Triplet:
    anchor: GroupRef
    positive: GroupRef
    negative: GroupRef


@dataclass(frozen=True)
class FtParams:
    """Knobs for triplet generation, cleaning, and the downstream trainer."""

    f_pos: float = 0.08
    f_tri: float = 0.24
    n_neg: int = 2
    margin: float = 0.16
    epochs: int = 4
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.f_pos < 1.0:
            raise ValueError(f"f_pos must be in [0, 1), got {self.f_pos}")
        if not 0.0 <= self.f_tri < 1.0:
            raise ValueError(f"f_tri must be in [0, 1), got {self.f_tri}")
        if self.f_pos + self.f_tri >= 1.0:
            raise ValueError(f"f_pos + f_tri must be < 1, got {self.f_pos + self.f_tri}")
        if self.n_neg < 1:
            raise ValueError(f"n_neg must be >= 1, got {self.n_neg}")
        if self.margin <= 0:
            raise ValueError(f"margin must be > 0, got {self.margin}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")


def build_triplets(corpus: Corpus, n_neg: int, seed: int) -> list[Triplet]:
    """Emit (anchor, positive, negative) triplets from group adjacency.

    For every group position i of every document, and for each of n_neg
    repetitions: the following group is a positive when one exists, then the
    preceding group, each paired with a fresh negative drawn by picking a
    uniformly random other document and then a uniformly random group inside
    it. A document with g groups therefore contributes n_neg * (2g - 2)
    triplets. Deterministic for a given seed.
    """
    if n_neg < 1:
        raise ValueError(f"n_neg must be >= 1, got {n_neg}")
    docs = corpus.documents
    if len(docs) < 2:
        raise InsufficientDocumentsError(
            f"triplet generation needs >= 2 documents, corpus has {len(docs)}"
        )
    rng = np.random.default_rng(seed)
    n_docs = len(docs)

    def draw_negative(own: int) -> GroupRef:
        other = int(rng.integers(0, n_docs - 1))
        if other >= own:
            other += 1
        doc = docs[other]
        gi = int(rng.integers(0, doc.n_groups))
        return GroupRef(doc.id, gi)

    triplets: list[Triplet] = []
    for di, doc in enumerate(docs):
        n_groups = doc.n_groups
        for i in range(n_groups):
            for _ in range(n_neg):
                if i < n_groups - 1:
                    triplets.append(
                        Triplet(GroupRef(doc.id, i), GroupRef(doc.id, i + 1), draw_negative(di))
                    )
                if i > 0:
                    triplets.append(
                        Triplet(GroupRef(doc.id, i), GroupRef(doc.id, i - 1), draw_negative(di))
                    )
    return triplets


def _resolve_rows(triplets: list[Triplet], corpus: Corpus) -> np.ndarray:
    rows = np.empty((len(triplets), 3), dtype=np.int64)
    for i, t in enumerate(triplets):
        for j, ref in enumerate((t.anchor, t.positive, t.negative)):
            if not corpus.has_group(ref.doc, ref.group):
                raise IntegrityError(f"unresolvable group reference {ref!r}")
            rows[i, j] = corpus.row_of(ref.doc, ref.group)
    return rows


def filter_triplets(
    triplets: list[Triplet],
    emb: EmbeddingMatrix,
    f_pos: float,
    f_tri: float,
    corpus: Corpus,
) -> list[Triplet]:
    """Drop likely-mislabeled triplets by two distance criteria.

    Both removal counts are fractions of the ORIGINAL triplet count, floored,
    and applied sequentially: first the floor(f_pos*N) triplets with the
    largest anchor-positive distance, then, among the remainder, the
    floor(f_tri*N) with the largest anchor-positive minus anchor-negative
    distance. Ties keep the earlier-created triplet. Survivors come back in
    creation order.
    """
    for name, frac in (("f_pos", f_pos), ("f_tri", f_tri)):
        if not 0.0 <= frac < 1.0:
            raise ValueError(f"{name} must be in [0, 1), got {frac}")
    n0 = len(triplets)
    if n0 == 0:
        return []
    n_pos = math.floor(f_pos * n0)
    n_tri = math.floor(f_tri * n0)
    if n_pos + n_tri >= n0:
        raise OverFilterError(
            f"removing {n_pos} + {n_tri} of {n0} triplets would leave nothing"
        )
    rows = _resolve_rows(triplets, corpus)
    if rows.size and int(rows.max()) >= emb.count:
        raise IntegrityError(
            f"triplets reference row {int(rows.max())} but embeddings have {emb.count} rows"
        )
    vecs = emb.vectors.astype(np.float64)
    d_ap = np.linalg.norm(vecs[rows[:, 0]] - vecs[rows[:, 1]], axis=1)
    d_an = np.linalg.norm(vecs[rows[:, 0]] - vecs[rows[:, 2]], axis=1)

    # Stable ascending sort: among equal keys, later-created triplets sit
    # later and are removed first when cutting from the top.
    keep = np.ones(n0, dtype=bool)
    if n_pos:
        order = np.argsort(d_ap, kind="stable")
        keep[order[n0 - n_pos :]] = False
    if n_tri:
        gap = d_ap - d_an
        survivors = np.flatnonzero(keep)
        order = survivors[np.argsort(gap[survivors], kind="stable")]
        keep[order[len(survivors) - n_tri :]] = False
    return [triplets[i] for i in np.flatnonzero(keep)]


def export_triplets(triplets: list[Triplet], corpus: Corpus, path: str | Path) -> int:
    """Write one JSON object per triplet with resolved group texts; returns line count."""
    lines = []
    for t in triplets:
        record = {}
        for role, ref in (("anchor", t.anchor), ("positive", t.positive), ("negative", t.negative)):
            if not corpus.has_group(ref.doc, ref.group):
                raise IntegrityError(f"unresolvable group reference {ref!r}")
            group = corpus.group(corpus.row_of(ref.doc, ref.group))
            record[role] = {"doc": ref.doc, "group": ref.group, "text": group.text}
        lines.append(json.dumps(record))
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line + "\n")
    return len(lines)


def write_trainer_sidecar(path: str | Path, params: FtParams, extra: dict | None = None) -> None:
    """Write the trainer config next to a triplet file: margin and epochs travel with the data."""
    payload: dict = {"margin": params.margin, "epochs": params.epochs}
    if extra:
        payload.update(extra)
    with open(f"{path}.config.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
