"""Per-group embedding vectors and the EMB1 binary interchange format.

EMB1 layout (little-endian): 8 magic bytes ``BOSEMB1\\0``, u32 row count,
u32 dimension, then ``rows * dim`` IEEE-754 float32 values in row-major
order. A companion ``<path>.idx.jsonl`` file maps rows back to
(document, group) pairs.
"""

from __future__ import annotations

import json
import shlex
import struct
import subprocess
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import Corpus
from .errors import (
    AlignmentError,
    DegenerateVectorError,
    EmbeddingFormatError,
    ProviderError,
)

MAGIC = b"BOSEMB1\0"
_HEADER = struct.Struct("<II")
_HEADER_SIZE = len(MAGIC) + _HEADER.size


class EmbeddingMatrix:
    """One float32 vector per sentence group, row-aligned with a group index."""

    def __init__(self, vectors: np.ndarray, normalized: bool = False):
        vectors = np.ascontiguousarray(vectors, dtype=np.float32)
        if vectors.ndim != 2:
            raise ValueError(f"expected a 2-D array, got shape {vectors.shape}")
        self.vectors = vectors
        self.normalized = normalized

    @property
    def count(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __repr__(self) -> str:
        return f"EmbeddingMatrix(count={self.count}, dim={self.dim}, normalized={self.normalized})"


def load_embeddings(path: str | Path) -> EmbeddingMatrix:
    """Read an EMB1 file. Zero-norm rows are rejected outright."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER_SIZE:
        raise EmbeddingFormatError(
            f"{path}: file ends at byte {len(data)}, before the {_HEADER_SIZE}-byte header"
        )
    if data[: len(MAGIC)] != MAGIC:
        raise EmbeddingFormatError(f"{path}: bad magic {data[:len(MAGIC)]!r}")
    count, dim = _HEADER.unpack_from(data, len(MAGIC))
    expected = _HEADER_SIZE + count * dim * 4
    if len(data) != expected:
        raise EmbeddingFormatError(
            f"{path}: expected {expected} bytes for {count}x{dim} rows, file ends at byte {len(data)}"
        )
    vectors = np.frombuffer(data, dtype="<f4", offset=_HEADER_SIZE).reshape(count, dim).copy()
    if count:
        norms = np.linalg.norm(vectors, axis=1)
        zero = np.flatnonzero(norms == 0.0)
        if zero.size:
            raise DegenerateVectorError(f"{path}: row {zero[0]} has zero norm")
    return EmbeddingMatrix(vectors)


def write_embeddings(
    matrix: EmbeddingMatrix | np.ndarray,
    path: str | Path,
    index: Iterable[tuple[str, int]] | None = None,
) -> None:
    """Write an EMB1 file, plus the idx sidecar when (doc, group) pairs are given."""
    vectors = matrix.vectors if isinstance(matrix, EmbeddingMatrix) else np.asarray(matrix)
    vectors = np.ascontiguousarray(vectors, dtype="<f4")
    count, dim = vectors.shape
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_HEADER.pack(count, dim))
        fh.write(vectors.tobytes())
    if index is not None:
        write_index_sidecar(path, index)


def write_index_sidecar(path: str | Path, index: Iterable[tuple[str, int]]) -> None:
    with open(f"{path}.idx.jsonl", "w", encoding="utf-8") as fh:
        for row, (doc_id, group) in enumerate(index):
            fh.write(json.dumps({"row": row, "doc": doc_id, "group": group}) + "\n")


def normalize(matrix: EmbeddingMatrix) -> EmbeddingMatrix:
    """Scale every row to unit Euclidean norm."""
    norms = np.linalg.norm(matrix.vectors.astype(np.float64), axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DegenerateVectorError(f"row {zero[0]} has zero norm")
    if matrix.count == 0:
        return EmbeddingMatrix(matrix.vectors.copy(), normalized=True)
    scaled = (matrix.vectors.astype(np.float64) / norms[:, None]).astype(np.float32)
    return EmbeddingMatrix(scaled, normalized=True)


def cosine(a, b) -> float:
    """Cosine similarity of two vectors; equals the dot product on unit vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1 or a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise DegenerateVectorError("cosine of a zero vector is undefined")
    value = float(np.dot(a, b) / (na * nb))
    return max(-1.0, min(1.0, value))


def provider_payload(corpus: Corpus) -> str:
    """The line-delimited JSON fed to an embedding provider, one group per line."""
    lines = []
    for row, group in corpus.iter_groups():
        lines.append(
            json.dumps({"row": row, "doc": group.doc_id, "group": group.index, "text": group.text})
        )
    return "\n".join(lines) + ("\n" if lines else "")


def request_embeddings(
    corpus: Corpus,
    provider_command: Sequence[str] | str,
    out: str | Path,
) -> EmbeddingMatrix:
    """Run an external embedding provider and load its output.

    The provider receives the group texts of ``corpus`` as line-delimited JSON
    objects {"row", "doc", "group", "text"} on standard input, plus the output
    path appended as its final argument, and must write an EMB1 file there with
    one row per input line, in input order.
    """
    if isinstance(provider_command, str):
        argv = shlex.split(provider_command)
    else:
        argv = list(provider_command)
    if not argv:
        raise ValueError("empty provider command")
    argv.append(str(out))
    proc = subprocess.run(
        argv,
        input=provider_payload(corpus).encode("utf-8"),
        capture_output=True,
    )
    if proc.returncode != 0:
        stderr = proc.stderr.decode("utf-8", "replace").strip()
        raise ProviderError(
            f"provider exited with status {proc.returncode}: {stderr or '(no diagnostics)'}"
        )
    matrix = load_embeddings(out)
    if matrix.count != corpus.group_count:
        raise AlignmentError(
            f"provider wrote {matrix.count} rows for {corpus.group_count} groups"
        )
    write_index_sidecar(out, ((g.doc_id, g.index) for _, g in corpus.iter_groups()))
    return matrix
