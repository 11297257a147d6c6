"""Command-line pipeline: tokenize -> embed -> triplets -> fit -> topics -> eval.

Flag defaults mirror the published hyperparameter settings (k=50, alpha=2,
n_s=3, 10 inference epochs, f_pos=0.08, f_tri=0.24, margin 0.16, 2 negatives,
4 fine-tuning epochs), so a bare invocation reproduces the reference
configuration. Every artifact records the run configuration that produced it.
"""

from __future__ import annotations

import argparse
import json
import shlex
import subprocess
import sys
from pathlib import Path

from . import evaluate, report
from .corpus import Corpus, load_corpus
from .embeddings import (
    load_embeddings,
    normalize,
    provider_payload,
    request_embeddings,
)
from .errors import ProviderError, SenCluError
from .model import SenCluParams, fit, load_model, save_model
from .triplets import FtParams, build_triplets, export_triplets, filter_triplets, write_trainer_sidecar


def _config(args: argparse.Namespace) -> dict:
    skip = {"func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _write_json(path: str | Path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def _write_meta(path: str | Path, payload: dict) -> None:
    _write_json(f"{path}.meta.json", payload)


def _load_normalized(path: str | Path):
    return normalize(load_embeddings(path))


def _dump_groups(corpus: Corpus, out: str | Path) -> None:
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(provider_payload(corpus))


def cmd_tokenize(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus, args.n_s)
    _dump_groups(corpus, args.out)
    rep = corpus.report
    _write_meta(
        args.out,
        {
            "config": _config(args),
            "documents": len(corpus.documents),
            "groups": corpus.group_count,
            "dropped": rep.dropped if rep else 0,
            "dropped_ids": list(rep.dropped_ids) if rep else [],
        },
    )
    print(f"tokenize: {len(corpus.documents)} documents, {corpus.group_count} groups "
          f"({rep.dropped if rep else 0} dropped) -> {args.out}")
    return 0


def cmd_triplets(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus, args.n_s)
    emb = _load_normalized(args.emb)
    params = FtParams(
        f_pos=args.f_pos,
        f_tri=args.f_tri,
        n_neg=args.n_neg,
        margin=args.margin,
        epochs=args.ft_epochs,
        seed=args.seed,
    )
    raw = build_triplets(corpus, params.n_neg, params.seed)
    kept = filter_triplets(raw, emb, params.f_pos, params.f_tri, corpus)
    written = export_triplets(kept, corpus, args.out)
    write_trainer_sidecar(args.out, params, extra={"config": _config(args)})
    print(f"triplets: built {len(raw)}, kept {written} -> {args.out}")
    return 0


def cmd_fit(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus, args.n_s)
    emb = _load_normalized(args.emb)
    params = SenCluParams(
        k=args.k, alpha=args.alpha, epochs=args.epochs, n_s=args.n_s, seed=args.seed
    )
    model = fit(corpus, emb, params, backend=args.backend, threads=args.threads)
    save_model(model, args.out, extra={"config": _config(args)})
    final = model.epoch_log[-1] if model.epoch_log else {}
    print(f"fit: k={params.k} over {corpus.group_count} groups, "
          f"last-epoch changes={final.get('changes')} -> {args.out}")
    return 0


def cmd_topics(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    corpus = load_corpus(args.corpus, model.params.n_s)
    counts = report.count_words(corpus, model.assignments, model.k)
    words = report.top_words(counts, args.top_n, postprocess=args.postprocess)
    if args.format == "json":
        _write_json(args.out, report.report_payload(words))
        _write_meta(args.out, {"config": _config(args)})
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(f"# config: {json.dumps(_config(args))}\n")
            fh.write(report.format_text_table(words, width=args.top_n))
    print(f"topics: {model.k} topics -> {args.out}")
    return 0


def _metrics(model, corpus: Corpus, reference_path, top_n: int) -> dict:
    labels = [doc.label for doc in corpus.documents]
    labeled = [i for i, lab in enumerate(labels) if lab is not None]
    clusters = evaluate.doc_clusters(model)
    nmi_value = None
    if labeled:
        nmi_value = evaluate.nmi(
            [int(clusters[i]) for i in labeled], [labels[i] for i in labeled]
        )
    counts = report.count_words(corpus, model.assignments, model.k)
    words = report.top_words(counts, top_n, postprocess=False)
    vocabulary = {w for topic in words for w, _ in topic}
    source = evaluate.build_coherence_source(reference_path, vocabulary)
    per_topic = evaluate.per_topic_npmi(words, source, top_n)
    scored = [v for v in per_topic if v is not None]
    if not scored:
        raise SenCluError("no topic has two reference-scorable words")
    return {
        "nmi": nmi_value,
        "npmi": sum(scored) / len(scored),
        "per_topic_npmi": per_topic,
        "docs_scored": len(labeled),
    }


def cmd_eval(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    corpus = load_corpus(args.corpus, model.params.n_s)
    reference = args.reference if args.reference else args.corpus
    metrics = _metrics(model, corpus, reference, args.top_n)
    payload = {"config": _config(args), **metrics}
    if args.format == "json":
        _write_json(args.out, payload)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(f"# config: {json.dumps(_config(args))}\n")
            fh.write(f"nmi: {metrics['nmi']}\n")
            fh.write(f"npmi: {metrics['npmi']:.4f}\n")
            fh.write(f"docs_scored: {metrics['docs_scored']}\n")
    print(f"eval: nmi={metrics['nmi']} npmi={metrics['npmi']:.4f} -> {args.out}")
    return 0


def _run_external(argv: list[str], what: str) -> None:
    proc = subprocess.run(argv, capture_output=True)
    if proc.returncode != 0:
        stderr = proc.stderr.decode("utf-8", "replace").strip()
        raise ProviderError(f"{what} exited with status {proc.returncode}: {stderr or '(no diagnostics)'}")


def cmd_pipeline(args: argparse.Namespace) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus = load_corpus(args.corpus, args.n_s)
    _dump_groups(corpus, out_dir / "groups.jsonl")

    if args.emb:
        emb_path = Path(args.emb)
    elif args.embed_cmd:
        emb_path = out_dir / "embeddings.bin"
        request_embeddings(corpus, args.embed_cmd, emb_path)
    else:
        raise SenCluError("pipeline needs --emb or --embed-cmd to obtain embeddings")
    emb = _load_normalized(emb_path)

    ft = FtParams(
        f_pos=args.f_pos,
        f_tri=args.f_tri,
        n_neg=args.n_neg,
        margin=args.margin,
        epochs=args.ft_epochs,
        seed=args.seed,
    )
    triplet_path = out_dir / "triplets.jsonl"
    raw = build_triplets(corpus, ft.n_neg, ft.seed)
    kept = filter_triplets(raw, emb, ft.f_pos, ft.f_tri, corpus)
    export_triplets(kept, corpus, triplet_path)
    write_trainer_sidecar(triplet_path, ft, extra={"config": _config(args)})

    if args.finetune_cmd:
        encoder_dir = out_dir / "encoder"
        _run_external(
            shlex.split(args.finetune_cmd) + [str(triplet_path), str(encoder_dir)],
            "fine-tune command",
        )
        if not args.post_embed_cmd:
            raise SenCluError("--finetune-cmd requires --post-embed-cmd to re-embed")
    if args.post_embed_cmd:
        emb_path = out_dir / "embeddings_ft.bin"
        request_embeddings(corpus, args.post_embed_cmd, emb_path)
        emb = _load_normalized(emb_path)

    params = SenCluParams(
        k=args.k, alpha=args.alpha, epochs=args.epochs, n_s=args.n_s, seed=args.seed
    )
    model = fit(corpus, emb, params, backend=args.backend, threads=args.threads)
    save_model(model, out_dir / "model.json", extra={"config": _config(args)})

    counts = report.count_words(corpus, model.assignments, model.k)
    words = report.top_words(counts, args.top_n, postprocess=True)
    _write_json(out_dir / "topics.json", report.report_payload(words))
    _write_meta(out_dir / "topics.json", {"config": _config(args)})
    with open(out_dir / "topics.txt", "w", encoding="utf-8") as fh:
        fh.write(f"# config: {json.dumps(_config(args))}\n")
        fh.write(report.format_text_table(words, width=args.top_n))

    reference = args.reference if args.reference else args.corpus
    metrics = _metrics(model, corpus, reference, args.top_n)
    _write_json(out_dir / "metrics.json", {"config": _config(args), **metrics})
    print(f"pipeline: model + reports in {out_dir} "
          f"(nmi={metrics['nmi']} npmi={metrics['npmi']:.4f})")
    return 0


def _add_corpus_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--corpus", required=True, help="corpus JSONL file")
    p.add_argument("--n-s", type=int, default=3, dest="n_s", help="sentences per group")


def _add_ft_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--f-pos", type=float, default=0.08, dest="f_pos")
    p.add_argument("--f-tri", type=float, default=0.24, dest="f_tri")
    p.add_argument("--n-neg", type=int, default=2, dest="n_neg")
    p.add_argument("--margin", type=float, default=0.16)
    p.add_argument("--ft-epochs", type=int, default=4, dest="ft_epochs")


def _add_fit_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, default=50, help="number of topics")
    p.add_argument("--alpha", type=float, default=2.0, help="topic-document prior")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--threads", type=int, default=1, help="worker cap for the EM kernels")
    p.add_argument("--backend", default=None, choices=["auto", "cython", "python"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="senclu", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tokenize", help="split a corpus into sentence groups")
    _add_corpus_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_tokenize)

    p = sub.add_parser("triplets", help="build, filter, and export a triplet dataset")
    _add_corpus_flags(p)
    p.add_argument("--emb", required=True, help="EMB1 embedding file")
    p.add_argument("--out", required=True)
    _add_ft_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_triplets)

    p = sub.add_parser("fit", help="fit a topic model from corpus + embeddings")
    _add_corpus_flags(p)
    p.add_argument("--emb", required=True)
    p.add_argument("--out", required=True)
    _add_fit_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("topics", help="write ranked topic words for a fitted model")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--top-n", type=int, default=10, dest="top_n")
    p.add_argument("--format", default="json", choices=["json", "text"])
    p.add_argument("--no-postprocess", dest="postprocess", action="store_false",
                   help="skip stemming and duplicate merging")
    p.set_defaults(func=cmd_topics, postprocess=True)

    p = sub.add_parser("eval", help="NMI against labels and NPMI against a reference")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--reference", default=None,
                   help="reference corpus JSONL (defaults to the corpus itself)")
    p.add_argument("--out", required=True)
    p.add_argument("--top-n", type=int, default=10, dest="top_n")
    p.add_argument("--format", default="json", choices=["json", "text"])
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("pipeline", help="run the whole chain into an output directory")
    _add_corpus_flags(p)
    p.add_argument("--out-dir", required=True, dest="out_dir")
    p.add_argument("--emb", default=None, help="existing EMB1 file (skips the provider)")
    p.add_argument("--embed-cmd", default=None, dest="embed_cmd",
                   help="embedding provider command (output path is appended)")
    p.add_argument("--finetune-cmd", default=None, dest="finetune_cmd",
                   help="fine-tune command (triplet path and model dir are appended)")
    p.add_argument("--post-embed-cmd", default=None, dest="post_embed_cmd",
                   help="provider command for embeddings after fine-tuning")
    p.add_argument("--reference", default=None)
    p.add_argument("--top-n", type=int, default=10, dest="top_n")
    _add_ft_flags(p)
    _add_fit_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SenCluError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
