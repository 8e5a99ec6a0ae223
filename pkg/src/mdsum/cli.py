"""Command-line entry point: ``mdsum <subcommand> ...``.

Exit status is 0 on success, 1 on data/runtime errors and 2 on usage errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .config import RunConfig
from .corpus import SPLITS, build_vocabulary, ingest_corpus, tokenize
from .errors import ConfigError, DataError, MdsumError
from .extractive import PIPELINE_NAMES, pipeline_spec, run_pipeline
from .metrics import EvalReport, format_table, score_set
from .model import Model
from .numerics import kernels
from .training import (
    finetune_mds,
    finetune_parameter_names,
    load_checkpoint,
    model_gradcheck,
    pretrain_sds,
    save_checkpoint,
)

log = logging.getLogger("mdsum")

ABLATIONS = (
    # name, docset encoder, attention, tuned
    ("Model-1", "uniform", "raw", False),
    ("Model-2", "uniform", "concentrated", False),
    ("Model-3", "uniform", "concentrated", True),
    ("Our Model", "learned", "concentrated", True),
)


def _pmap(fn, items, workers):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _config(args):
    return RunConfig.load(args.config, args.set or ())


def _split(cfg, args):
    split = getattr(args, "split", None) or cfg.get("run", "split")
    if split not in SPLITS:
        raise ConfigError(f"unknown split {split!r}")
    return split


def _load_model(path, cfg):
    model = load_checkpoint(path)
    return cfg.apply_to_model(model)


def write_summary(path, sentences):
    path.write_text("".join(" ".join(s.words) + "\n" for s in sentences), encoding="utf-8")


def read_summary(path):
    """Summary file -> list of token lists (one line per sentence, no re-splitting)."""
    if not path.is_file():
        raise DataError(f"missing summary file {path}")
    out = []
    for line in path.read_text(encoding="utf-8").splitlines():
        words = [t.surface for t in tokenize(line)]
        if words:
            out.append(words)
    return out


def summarize_sets(spec, docsets, model, gen_config, workers):
    return _pmap(lambda ds: run_pipeline(spec, ds, model, gen_config), docsets, workers)


def evaluate_dir(directory, docsets):
    report = EvalReport()
    for ds in docsets:
        summary = read_summary(Path(directory) / f"{ds.id}.sum.txt")
        refs = [[s.words for s in r] for r in ds.references]
        sources = [s.words for s in ds.all_sentences()]
        report.per_set[ds.id] = score_set(summary, refs, sources)
    return report


def cmd_ingest(args):
    corpus = ingest_corpus(args.corpus)
    print(f"{'split':<6}{'sets':>6}{'docs':>7}{'sents':>8}{'tokens':>9}{'refs':>6}")
    for split in SPLITS:
        sets = corpus[split]
        docs = [d for ds in sets for d in ds.documents]
        sents = [s for d in docs for s in d.sentences]
        refs = sum(len(ds.reference_texts) for ds in sets)
        print(f"{split:<6}{len(sets):>6}{len(docs):>7}{len(sents):>8}{sum(len(s) for s in sents):>9}{refs:>6}")
    return 0


def cmd_train(args):
    cfg = _config(args)
    corpus = ingest_corpus(args.corpus)
    vocab = build_vocabulary(corpus, cfg.get("model", "max_vocab"), cfg.get("model", "min_freq"), ("train",))
    model = Model(vocab, cfg.model_config(), seed=cfg.get("model", "seed"))
    report = pretrain_sds(model, corpus, cfg.train_config("pretrain_sds"), cfg.generation_config())
    _save_run(args.out, cfg, model, report)
    print(f"trained {report.stopped_epoch} epochs, final loss {report.train_loss[-1]:.4f}, best epoch {report.best_epoch}")
    return 0


def cmd_finetune(args):
    cfg = _config(args)
    corpus = ingest_corpus(args.corpus)
    model = _load_model(args.checkpoint, cfg)
    report = finetune_mds(model, corpus, cfg.train_config("finetune_mds"), cfg.generation_config())
    _save_run(args.out, cfg, model, report)
    print(f"fine-tuned {report.stopped_epoch} epochs ({', '.join(report.trainable)}), "
          f"final loss {report.train_loss[-1]:.4f}")
    return 0


def _save_run(out, cfg, model, report):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    save_checkpoint(model, out / "checkpoint.json")
    (out / "train_report.json").write_text(report.to_json(), encoding="utf-8")
    cfg.write(out)


def cmd_summarize(args):
    cfg = _config(args)
    name = args.pipeline or cfg.get("pipeline", "name")
    spec = pipeline_spec(name, cfg.get("pipeline", "intermediate_budget"), cfg.get("pipeline", "final_budget"))
    model = None
    if spec.needs_model:
        if not args.checkpoint:
            raise ConfigError(f"pipeline {name!r} needs --checkpoint")
        model = _load_model(args.checkpoint, cfg)
    docsets = ingest_corpus(args.corpus)[_split(cfg, args)]
    workers = args.workers or cfg.get("run", "workers")
    results = summarize_sets(spec, docsets, model, cfg.generation_config(), workers)
    out = Path(args.out) / name
    out.mkdir(parents=True, exist_ok=True)
    for ds, res in zip(docsets, results):
        write_summary(out / f"{ds.id}.sum.txt", res.sentences)
    cfg.write(out)
    print(f"wrote {len(docsets)} summaries to {out}")
    return 0


def cmd_evaluate(args):
    cfg = _config(args)
    docsets = ingest_corpus(args.corpus)[_split(cfg, args)]
    reports = {Path(d).name: evaluate_dir(d, docsets) for d in args.summaries}
    table = format_table(reports)
    out = Path(args.out) if args.out else Path(args.summaries[0]).parent / "report.txt"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(table, encoding="utf-8")
    out.with_suffix(".json").write_text(
        json.dumps({m: json.loads(r.to_json()) for m, r in reports.items()}, indent=2, sort_keys=True),
        encoding="utf-8")
    sys.stdout.write(table)
    return 0


def cmd_gradcheck(args):
    worst = 0.0
    for mode, docset_mode in (("raw", "learned"), ("concentrated", "learned"), ("concentrated", "softmax")):
        rep = model_gradcheck(seed=args.seed, dim=args.dim, attention_mode=mode, docset_mode=docset_mode, tol=args.tol)
        worst = max(worst, rep.max_rel_error)
        print(f"{mode:<13} {docset_mode:<8} coords={rep.n_checked:<5} max_rel_error={rep.max_rel_error:.3e}")
    print(f"max relative error {worst:.3e} ({'ok' if worst < args.tol else 'FAIL'}, tol {args.tol:g})")
    return 0 if worst < args.tol else 1


def run_ablation(base, corpus, cfg, out, workers=1):
    """Evaluate the four ablation configurations from one checkpoint.

    Returns ({name: EvalReport}, diagnostics).
    """
    out = Path(out)
    test_sets = corpus[cfg.get("run", "split")]
    gen_config = cfg.generation_config()
    spec = pipeline_spec("ours", final_budget=cfg.get("pipeline", "final_budget"))
    attention = cfg.attention_config()
    reports, diagnostics = {}, {}
    for name, docset_mode, att_mode, tuned in ABLATIONS:
        model = base.clone(docset_mode=docset_mode, attention=type(attention)(att_mode, attention.K, attention.lam))
        q_before = model.q.value.copy()
        trained = []
        if tuned:
            finetune_mds(model, corpus, cfg.train_config("finetune_mds"), gen_config)
            trained = finetune_parameter_names(model, cfg.get("train", "tune_projection"))
        results = summarize_sets(spec, test_sets, model, gen_config, workers)
        support = [int(np.count_nonzero(a)) for ds in test_sets
                   for a in model.summarize(ds.documents, gen_config).attention]
        set_dir = out / name.replace(" ", "_")
        set_dir.mkdir(parents=True, exist_ok=True)
        for ds, res in zip(test_sets, results):
            write_summary(set_dir / f"{ds.id}.sum.txt", res.sentences)
        reports[name] = evaluate_dir(set_dir, test_sets)
        diagnostics[name] = {
            "encoder": "learned" if docset_mode == "learned" else "fixed",
            "attention": att_mode,
            "tuning": "yes" if tuned else "no",
            "max_attention_support": max(support) if support else 0,
            "trained_parameters": trained,
            "q_changed": bool(np.any(model.q.value != q_before)),
        }
    return reports, diagnostics


def cmd_ablate(args):
    cfg = _config(args)
    corpus = ingest_corpus(args.corpus)
    base = load_checkpoint(args.checkpoint)
    reports, diagnostics = run_ablation(base, corpus, cfg, args.out, args.workers or cfg.get("run", "workers"))
    out = Path(args.out)
    table = format_table(reports)
    (out / "report.txt").write_text(table, encoding="utf-8")
    (out / "diagnostics.json").write_text(json.dumps(diagnostics, indent=2, sort_keys=True), encoding="utf-8")
    cfg.write(out)
    sys.stdout.write(table)
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI config file")
    common.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE", help="override a config value")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="mdsum", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"mdsum (kernels: {kernels.BACKEND})")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="validate a corpus and print statistics")
    p.add_argument("--corpus", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", parents=[common], help="pre-train on a single-document corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("finetune", parents=[common], help="fine-tune decoders and q on a multi-document corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_finetune)

    p = sub.add_parser("summarize", parents=[common], help="write one summary per document set")
    p.add_argument("--pipeline", choices=PIPELINE_NAMES)
    p.add_argument("--corpus", required=True)
    p.add_argument("--checkpoint")
    p.add_argument("--out", required=True)
    p.add_argument("--split", choices=SPLITS)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("evaluate", parents=[common], help="score summary directories")
    p.add_argument("summaries", nargs="+", help="directories of <set_id>.sum.txt files")
    p.add_argument("--corpus", required=True)
    p.add_argument("--split", choices=SPLITS)
    p.add_argument("--out", help="report path (default: report.txt beside the first directory)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("gradcheck", parents=[common], help="finite-difference check on a tiny model")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, default=4)
    p.add_argument("--tol", type=float, default=1e-4)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("ablate", parents=[common], help="run the Model-1/2/3/full comparison")
    p.add_argument("--corpus", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_ablate)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except MdsumError as exc:
        print(f"mdsum {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
