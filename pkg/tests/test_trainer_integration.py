"""End-to-end run of the CLI pipeline with the trainer as embedding provider.

Needs the trainer built (`cd trainer && npm install && npm run build`); skipped
otherwise, so the primary suite never depends on it.

The fixture gives each document's groups disjoint sub-vocabularies of its
class: a bag-of-tokens base encoder cannot relate adjacent groups, so only
adjacency-based fine-tuning can pull a class together. That makes the
fine-tuning step load-bearing rather than decorative.
"""

import json
import shutil
import subprocess
from pathlib import Path

import numpy as np
import pytest

import senclu
from senclu.cli import main

TRAINER_CLI = Path(__file__).resolve().parent.parent / "trainer" / "dist" / "cli.js"
NODE = shutil.which("node")

pytestmark = pytest.mark.skipif(
    NODE is None or not TRAINER_CLI.exists(),
    reason="trainer not built (cd trainer && npm run build)",
)


def write_subvocab_corpus(path, n_docs=36, seed=0):
    """3 classes x 3 sub-vocabularies x 8 disjoint words; group g of a class-c
    document draws only from sub-vocabulary (c, g)."""
    rng = np.random.default_rng(seed)
    with open(path, "w", encoding="utf-8") as fh:
        for d in range(n_docs):
            cls = d % 3
            sentences = []
            for s in range(9):
                vocab = [f"c{cls}s{s // 3}w{w}" for w in range(8)]
                picked = [vocab[int(rng.integers(0, 8))] for _ in range(5)]
                sentences.append(" ".join(picked).capitalize() + ".")
            fh.write(json.dumps({
                "id": f"doc{d}",
                "text": " ".join(sentences),
                "label": f"class{cls}",
            }) + "\n")


def class_separation_gap(corpus, emb_path):
    emb = senclu.normalize(senclu.load_embeddings(emb_path))
    x = emb.vectors.astype(np.float64)
    cls = np.array([int(g.doc_id[3:]) % 3 for _, g in corpus.iter_groups()])
    sims = x @ x.T
    same = cls[:, None] == cls[None, :]
    upper = np.triu(np.ones_like(sims, dtype=bool), k=1)
    return float(sims[same & upper].mean() - sims[~same & upper].mean())


def run_trainer(args, input_bytes=None):
    return subprocess.run(
        [NODE, str(TRAINER_CLI), *args], input=input_bytes, capture_output=True
    )


class TestTrainerPipeline:
    def test_finetune_pipeline_end_to_end(self, tmp_path):
        corpus_path = tmp_path / "corpus.jsonl"
        write_subvocab_corpus(corpus_path)
        base_dir = tmp_path / "base"
        proc = run_trainer(["init", str(base_dir), "--dim", "48", "--vocab", "2048", "--seed", "1"])
        assert proc.returncode == 0, proc.stderr

        out_dir = tmp_path / "run"
        rc = main([
            "pipeline",
            "--corpus", str(corpus_path),
            "--out-dir", str(out_dir),
            "--embed-cmd", f"{NODE} {TRAINER_CLI} embed {base_dir}",
            "--finetune-cmd", f"{NODE} {TRAINER_CLI} train --dim 48 --vocab 2048 --seed 1",
            "--post-embed-cmd", f"{NODE} {TRAINER_CLI} embed {out_dir / 'encoder'}",
            "--k", "3", "--seed", "0",
        ])
        assert rc == 0

        # fine-tuning ran, honored the sidecar, and its loss never increased
        log = json.loads((out_dir / "encoder" / "train_log.json").read_text())
        assert log["margin"] == 0.16 and log["epochs"] == 4
        losses = [e["meanLoss"] for e in log["epochLog"]]
        assert all(b <= a + 1e-9 for a, b in zip(losses, losses[1:]))

        # fine-tuning must widen the within-class vs cross-class cosine gap
        corpus = senclu.load_corpus(corpus_path, 3)
        base_gap = class_separation_gap(corpus, out_dir / "embeddings.bin")
        ft_gap = class_separation_gap(corpus, out_dir / "embeddings_ft.bin")
        assert ft_gap > base_gap + 0.2

        metrics = json.loads((out_dir / "metrics.json").read_text())
        assert metrics["nmi"] >= 0.9
        assert metrics["npmi"] >= 0.5
        assert metrics["docs_scored"] == 36

        # the report surfaces the planted class vocabulary
        topics = json.loads((out_dir / "topics.json").read_text())
        reported = {w["w"] for t in topics for w in t["words"]}
        assert sum(1 for w in reported if w.startswith("c") and "w" in w) >= 6

    def test_trainer_fulfills_provider_contract(self, tmp_path):
        corpus_path = tmp_path / "corpus.jsonl"
        write_subvocab_corpus(corpus_path, n_docs=6)
        corpus = senclu.load_corpus(corpus_path, 3)
        base_dir = tmp_path / "base"
        assert run_trainer(["init", str(base_dir), "--dim", "16", "--seed", "2"]).returncode == 0
        out = tmp_path / "e.bin"
        emb = senclu.request_embeddings(
            corpus, [NODE, str(TRAINER_CLI), "embed", str(base_dir)], out
        )
        assert emb.count == corpus.group_count
        assert emb.dim == 16
        norms = np.linalg.norm(emb.vectors.astype(np.float64), axis=1)
        assert np.abs(norms - 1.0).max() < 1e-4
        sidecar = [json.loads(l) for l in open(f"{out}.idx.jsonl", encoding="utf-8")]
        assert sidecar[0] == {"row": 0, "doc": "doc0", "group": 0}
