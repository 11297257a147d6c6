import json
import math

import numpy as np
import pytest

from senclu import (
    EmbeddingMatrix,
    FtParams,
    InsufficientDocumentsError,
    IntegrityError,
    OverFilterError,
    build_triplets,
    export_triplets,
    filter_triplets,
)

from helpers import make_corpus, random_unit_rows, unit_matrix


def brute_force_filter(triplets, vectors, row_of, f_pos, f_tri):
    """Independent reference: fully sorts both criteria over explicit distances."""
    n0 = len(triplets)
    if n0 == 0:
        return []

    def dist(r1, r2):
        return math.sqrt(sum((a - b) ** 2 for a, b in zip(vectors[r1], vectors[r2])))

    entries = []
    for i, t in enumerate(triplets):
        ra, rp, rn = row_of(t.anchor), row_of(t.positive), row_of(t.negative)
        entries.append((i, dist(ra, rp), dist(ra, rp) - dist(ra, rn)))

    n_pos = math.floor(f_pos * n0)
    n_tri = math.floor(f_tri * n0)
    # Largest d_ap removed first; earlier creation order survives ties.
    by_pos = sorted(entries, key=lambda e: (-e[1], -e[0]))
    removed = {e[0] for e in by_pos[:n_pos]}
    remaining = [e for e in entries if e[0] not in removed]
    by_tri = sorted(remaining, key=lambda e: (-e[2], -e[0]))
    removed |= {e[0] for e in by_tri[:n_tri]}
    return [triplets[i] for i in range(n0) if i not in removed]


class TestBuildTriplets:
    def test_count_small_example(self):
        corpus = make_corpus([3, 2])
        triplets = build_triplets(corpus, n_neg=1, seed=0)
        assert len(triplets) == 6  # (2*3-2) + (2*2-2)

    def test_count_scales_with_n_neg(self):
        corpus = make_corpus([3, 2])
        assert len(build_triplets(corpus, n_neg=2, seed=0)) == 12

    def test_single_group_document_contributes_nothing(self):
        corpus = make_corpus([1, 4])
        triplets = build_triplets(corpus, n_neg=1, seed=0)
        assert len(triplets) == 6
        assert all(t.anchor.doc != "d0" for t in triplets)

    def test_single_document_corpus_rejected(self):
        with pytest.raises(InsufficientDocumentsError):
            build_triplets(make_corpus([5]), n_neg=1, seed=0)

    def test_invalid_n_neg(self):
        with pytest.raises(ValueError):
            build_triplets(make_corpus([2, 2]), n_neg=0, seed=0)

    def test_adjacency_invariant(self):
        corpus = make_corpus([4, 3, 5])
        for t in build_triplets(corpus, n_neg=2, seed=5):
            assert t.positive.doc == t.anchor.doc
            assert abs(t.positive.group - t.anchor.group) == 1
            assert t.negative.doc != t.anchor.doc

    def test_count_law_random_corpora(self):
        rng = np.random.default_rng(42)
        for _ in range(25):
            counts = [int(rng.integers(1, 8)) for _ in range(int(rng.integers(2, 7)))]
            n_neg = int(rng.integers(1, 4))
            corpus = make_corpus(counts)
            expected = sum(n_neg * max(2 * c - 2, 0) for c in counts)
            assert len(build_triplets(corpus, n_neg, seed=1)) == expected

    def test_determinism(self):
        corpus = make_corpus([4, 3, 5])
        a = build_triplets(corpus, n_neg=2, seed=9)
        b = build_triplets(corpus, n_neg=2, seed=9)
        assert a == b
        c = build_triplets(corpus, n_neg=2, seed=10)
        assert a != c  # different negatives almost surely

    def test_negatives_cover_other_documents(self):
        corpus = make_corpus([3, 3, 3, 3])
        triplets = build_triplets(corpus, n_neg=3, seed=2)
        negatives_for_d0 = {t.negative.doc for t in triplets if t.anchor.doc == "d0"}
        assert negatives_for_d0 <= {"d1", "d2", "d3"}
        assert len(negatives_for_d0) > 1


class TestFilterTriplets:
    def _setup(self, group_counts, seed=0, dim=6):
        corpus = make_corpus(group_counts)
        emb = unit_matrix(random_unit_rows(corpus.group_count, dim, seed))
        triplets = build_triplets(corpus, n_neg=1, seed=seed)
        return corpus, emb, triplets

    def test_identity_when_fractions_zero(self):
        corpus, emb, triplets = self._setup([4, 3])
        assert filter_triplets(triplets, emb, 0.0, 0.0, corpus) == triplets

    def test_quarter_removes_two_of_eight(self):
        corpus, emb, triplets = self._setup([3, 3])
        assert len(triplets) == 8
        kept = filter_triplets(triplets, emb, 0.25, 0.0, corpus)
        assert len(kept) == 6
        # the two largest anchor-positive distances are gone
        vecs = emb.vectors.astype(np.float64)
        def d_ap(t):
            ra = corpus.row_of(*t.anchor)
            rp = corpus.row_of(*t.positive)
            return float(np.linalg.norm(vecs[ra] - vecs[rp]))
        removed = [t for t in triplets if t not in kept]
        assert len(removed) == 2
        assert min(d_ap(t) for t in removed) >= max(d_ap(t) for t in kept) - 1e-12

    def test_floor_semantics(self):
        corpus, emb, triplets = self._setup([4, 3])
        assert len(triplets) == 10
        kept = filter_triplets(triplets, emb, 0.08, 0.0, corpus)
        assert len(kept) == 10  # floor(0.8) = 0 removed

    def test_survivors_in_original_order(self):
        corpus, emb, triplets = self._setup([5, 4, 3])
        kept = filter_triplets(triplets, emb, 0.2, 0.3, corpus)
        positions = [triplets.index(t) for t in kept]
        assert positions == sorted(positions)

    def test_over_filtering_error(self):
        corpus, emb, triplets = self._setup([3, 3])
        with pytest.raises(OverFilterError):
            filter_triplets(triplets, emb, 0.6, 0.6, corpus)

    def test_invalid_fraction(self):
        corpus, emb, triplets = self._setup([3, 3])
        with pytest.raises(ValueError):
            filter_triplets(triplets, emb, 1.0, 0.0, corpus)

    def test_empty_input(self):
        corpus, emb, _ = self._setup([3, 3])
        assert filter_triplets([], emb, 0.3, 0.3, corpus) == []

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(77)
        for trial in range(30):
            counts = [int(rng.integers(2, 6)) for _ in range(int(rng.integers(2, 5)))]
            corpus = make_corpus(counts)
            emb = unit_matrix(random_unit_rows(corpus.group_count, 5, trial))
            triplets = build_triplets(corpus, n_neg=1, seed=trial)
            assert len(triplets) <= 50
            f_pos = float(rng.choice([0.0, 0.08, 0.2, 0.4]))
            f_tri = float(rng.choice([0.0, 0.24, 0.3]))
            vectors = emb.vectors.astype(np.float64).tolist()
            expected = brute_force_filter(
                triplets, vectors, lambda r: corpus.row_of(*r), f_pos, f_tri
            )
            got = filter_triplets(triplets, emb, f_pos, f_tri, corpus)
            assert got == expected

    def test_size_law(self):
        rng = np.random.default_rng(5)
        for trial in range(20):
            counts = [int(rng.integers(2, 7)) for _ in range(int(rng.integers(2, 6)))]
            corpus = make_corpus(counts)
            emb = unit_matrix(random_unit_rows(corpus.group_count, 4, trial + 100))
            triplets = build_triplets(corpus, n_neg=2, seed=trial)
            n0 = len(triplets)
            kept = filter_triplets(triplets, emb, 0.08, 0.24, corpus)
            assert len(kept) == n0 - math.floor(0.08 * n0) - math.floor(0.24 * n0)


class TestExportTriplets:
    def test_export_lines_parse(self, tmp_path):
        corpus = make_corpus([3, 2])
        triplets = build_triplets(corpus, n_neg=1, seed=0)
        out = tmp_path / "t.jsonl"
        assert export_triplets(triplets, corpus, out) == 6
        lines = [json.loads(l) for l in open(out, encoding="utf-8")]
        assert len(lines) == 6
        for rec in lines:
            for role in ("anchor", "positive", "negative"):
                assert rec[role]["text"]
                assert set(rec[role]) == {"doc", "group", "text"}

    def test_empty_export(self, tmp_path):
        corpus = make_corpus([3, 2])
        out = tmp_path / "t.jsonl"
        assert export_triplets([], corpus, out) == 0
        assert out.read_text(encoding="utf-8") == ""

    def test_unresolvable_reference(self, tmp_path):
        corpus = make_corpus([3, 2])
        other = make_corpus([2, 2, 2])
        triplets = build_triplets(other, n_neg=1, seed=0)
        bad = [t for t in triplets if t.anchor.doc == "d2" or t.negative.doc == "d2"]
        with pytest.raises(IntegrityError):
            export_triplets(bad, corpus, tmp_path / "t.jsonl")


class TestFtParams:
    def test_defaults_match_reference_settings(self):
        p = FtParams()
        assert (p.f_pos, p.f_tri, p.margin, p.n_neg, p.epochs) == (0.08, 0.24, 0.16, 2, 4)

    def test_fraction_sum_validated(self):
        with pytest.raises(ValueError):
            FtParams(f_pos=0.5, f_tri=0.5)

    def test_negative_margin_rejected(self):
        with pytest.raises(ValueError):
            FtParams(margin=0.0)
