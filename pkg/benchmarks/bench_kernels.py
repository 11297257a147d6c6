"""Benchmark the compiled EM kernels against the pure-numpy fallback.

Generates a synthetic planted-cluster workload, fits the same model with both
backends, and reports wall-clock times plus an agreement check. Takes a few
seconds at the default sizes:

    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --docs 5000 --groups-per-doc 8 --dim 384 --k 50
"""

import argparse
import time

import numpy as np

from senclu import EmbeddingMatrix, SenCluParams, available_backends, fit
from senclu.corpus import Corpus, Document, SentenceGroup


def synth(n_docs, groups_per_doc, dim, k, seed):
    rng = np.random.default_rng(seed)
    cents = rng.standard_normal((k, dim))
    cents /= np.linalg.norm(cents, axis=1, keepdims=True)
    docs = []
    rows = np.empty((n_docs * groups_per_doc, dim), dtype=np.float64)
    r = 0
    for d in range(n_docs):
        cluster = int(rng.integers(0, k))
        groups = []
        for g in range(groups_per_doc):
            v = cents[cluster] + 0.35 * rng.standard_normal(dim)
            rows[r] = v / np.linalg.norm(v)
            r += 1
            groups.append(SentenceGroup(f"d{d}", g, (f"s{g}",), ("w",)))
        docs.append(Document(id=f"d{d}", label=None, groups=tuple(groups)))
    corpus = Corpus(documents=docs, n_s=3)
    emb = EmbeddingMatrix(rows.astype(np.float32), normalized=True)
    return corpus, emb


def run(backend, corpus, emb, params, threads, repeats):
    best = float("inf")
    model = None
    for _ in range(repeats):
        start = time.perf_counter()
        model = fit(corpus, emb, params, backend=backend, threads=threads)
        best = min(best, time.perf_counter() - start)
    return best, model


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--docs", type=int, default=2000)
    parser.add_argument("--groups-per-doc", type=int, default=10)
    parser.add_argument("--dim", type=int, default=128)
    parser.add_argument("--k", type=int, default=25)
    parser.add_argument("--epochs", type=int, default=10)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    corpus, emb = synth(args.docs, args.groups_per_doc, args.dim, args.k, args.seed)
    params = SenCluParams(k=args.k, alpha=2.0, epochs=args.epochs, n_s=3, seed=args.seed)
    print(f"workload: {corpus.group_count} groups, dim={args.dim}, k={args.k}, "
          f"epochs={args.epochs}, threads={args.threads}")

    results = {}
    for backend in available_backends():
        elapsed, model = run(backend, corpus, emb, params, args.threads, args.repeats)
        results[backend] = (elapsed, model)
        print(f"  {backend:>7}: {elapsed:8.3f}s  "
              f"({corpus.group_count * args.epochs / elapsed / 1e6:.2f}M group-assignments/s)")

    if len(results) == 2:
        fast, slow = results["cython"], results["python"]
        print(f"  speedup: {slow[0] / fast[0]:.2f}x (cython over python)")
        same = np.array_equal(fast[1].assignments, slow[1].assignments)
        drift = float(np.abs(fast[1].topic_doc - slow[1].topic_doc).max())
        print(f"  agreement: assignments identical={same}, max |dp(t|d)|={drift:.2e}")
        if not same or drift > 1e-9:
            raise SystemExit("backends disagree beyond round-off")


if __name__ == "__main__":
    main()
