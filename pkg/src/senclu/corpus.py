"""Documents as bags of sentence groups.

A document is an ordered sequence of disjoint groups of ``n_s`` consecutive
sentences; the group is the elementary unit that receives an embedding and a
topic assignment. This module owns the rule-based sentence splitter, the word
tokenizer, and the line-delimited JSON corpus loader.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import CorpusFormatError

_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)
_NEWLINES = "\n\r"


def split_sentences(text: str) -> list[str]:
    """Split text into sentences.

    Boundaries are '.', '!', '?' and runs of newlines. Two guards keep a
    period from splitting: a digit on both sides (decimals such as "3.14"),
    and a following lowercase letter (abbreviations such as "e.g. this").
    Every non-whitespace character of the input ends up in exactly one
    sentence, so a trailing fragment without terminal punctuation is kept.
    """
    sentences: list[str] = []
    buf: list[str] = []

    def flush() -> None:
        sentence = "".join(buf).strip()
        if sentence:
            sentences.append(sentence)
        buf.clear()

    n = len(text)
    i = 0
    while i < n:
        ch = text[i]
        if ch in _NEWLINES:
            flush()
            while i < n and text[i] in _NEWLINES:
                i += 1
            continue
        buf.append(ch)
        if ch in "!?":
            flush()
        elif ch == ".":
            if not _period_guarded(text, i):
                flush()
        i += 1
    flush()
    return sentences


def _period_guarded(text: str, i: int) -> bool:
    """True when the period at position i must not end a sentence."""
    nxt = text[i + 1] if i + 1 < len(text) else ""
    if i > 0 and text[i - 1].isdigit() and nxt.isdigit():
        return True
    j = i + 1
    while j < len(text) and text[j].isspace():
        j += 1
    return j < len(text) and text[j].islower()


def tokenize_words(sentence: str) -> list[str]:
    """Lowercased maximal alphanumeric runs; punctuation-only fragments vanish."""
    return _WORD_RE.findall(sentence.lower())


@dataclass(frozen=True)
class SentenceGroup:
    """One bag-of-sentences unit: up to n_s consecutive sentences of a document."""

    doc_id: str
    index: int
    sentences: tuple[str, ...]
    words: tuple[str, ...]

    @property
    def text(self) -> str:
        return " ".join(self.sentences)


@dataclass(frozen=True)
class Document:
    id: str
    label: str | None
    groups: tuple[SentenceGroup, ...]

    @property
    def n_groups(self) -> int:
        return len(self.groups)


def group_sentences(sentences: list[str], n_s: int, doc_id: str = "") -> list[SentenceGroup]:
    """Partition sentences into disjoint groups of n_s; the last may be short."""
    if n_s < 1:
        raise ValueError(f"n_s must be >= 1, got {n_s}")
    groups = []
    for gi, start in enumerate(range(0, len(sentences), n_s)):
        chunk = tuple(sentences[start : start + n_s])
        words = tuple(w for s in chunk for w in tokenize_words(s))
        groups.append(SentenceGroup(doc_id=doc_id, index=gi, sentences=chunk, words=words))
    return groups


@dataclass(frozen=True)
class LoadReport:
    records: int
    loaded: int
    dropped: int
    dropped_ids: tuple[str, ...]


@dataclass
class Corpus:
    """An immutable document collection with a global group enumeration.

    ``group_index`` maps (doc_id, group position) to a contiguous row number;
    rows enumerate documents in load order and groups in document order, so
    one document's groups occupy a contiguous row range.
    """

    documents: list[Document]
    n_s: int
    report: LoadReport | None = None
    _rows: list[SentenceGroup] = field(init=False, repr=False)
    _row_of: dict[tuple[str, int], int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._rows = []
        self._row_of = {}
        for doc in self.documents:
            for group in doc.groups:
                self._row_of[(doc.id, group.index)] = len(self._rows)
                self._rows.append(group)

    @property
    def group_count(self) -> int:
        return len(self._rows)

    def group(self, row: int) -> SentenceGroup:
        return self._rows[row]

    def row_of(self, doc_id: str, index: int) -> int:
        return self._row_of[(doc_id, index)]

    def has_group(self, doc_id: str, index: int) -> bool:
        return (doc_id, index) in self._row_of

    def iter_groups(self):
        """Yield (row, group) in row order."""
        return enumerate(self._rows)

    def group_doc_indices(self) -> list[int]:
        """Document position (0-based) of every group row."""
        out = []
        for di, doc in enumerate(self.documents):
            out.extend([di] * doc.n_groups)
        return out

    def doc_sizes(self) -> list[int]:
        return [doc.n_groups for doc in self.documents]


def build_document(doc_id: str, text: str, n_s: int, label: str | None = None) -> Document:
    sentences = split_sentences(text)
    groups = tuple(group_sentences(sentences, n_s, doc_id=doc_id))
    return Document(id=doc_id, label=label, groups=groups)


def load_corpus(path: str | Path, n_s: int) -> Corpus:
    """Load a line-delimited JSON corpus: {"id", "text", "label"?} per line.

    Documents whose text yields zero sentences are dropped and counted in the
    corpus load report. Malformed lines and duplicate ids abort the load.
    """
    if n_s < 1:
        raise ValueError(f"n_s must be >= 1, got {n_s}")
    documents: list[Document] = []
    seen: set[str] = set()
    records = 0
    dropped: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            records += 1
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(record, dict):
                raise CorpusFormatError(f"line {lineno}: expected a JSON object")
            doc_id = record.get("id")
            text = record.get("text")
            if not isinstance(doc_id, str) or not doc_id:
                raise CorpusFormatError(f"line {lineno}: missing or non-string 'id'")
            if not isinstance(text, str):
                raise CorpusFormatError(f"line {lineno}: missing or non-string 'text'")
            label = record.get("label")
            if label is not None and not isinstance(label, str):
                raise CorpusFormatError(f"line {lineno}: 'label' must be a string")
            if doc_id in seen:
                raise CorpusFormatError(f"line {lineno}: duplicate document id {doc_id!r}")
            seen.add(doc_id)
            doc = build_document(doc_id, text, n_s, label=label)
            if doc.n_groups == 0:
                dropped.append(doc_id)
                continue
            documents.append(doc)
    report = LoadReport(
        records=records,
        loaded=len(documents),
        dropped=len(dropped),
        dropped_ids=tuple(dropped),
    )
    return Corpus(documents=documents, n_s=n_s, report=report)
