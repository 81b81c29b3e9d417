"""Command-line entry point: validate, stats, augment, train, tune, eval, classify."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import default_data_path
from . import augment as aug
from . import corpus as corpus_mod
from . import evaluation
from . import model as model_mod
from . import sentiment as sentiment_mod
from .embed import build_matrix, build_vocab, load_embeddings
from .preprocess import CleanConfig, clean, load_word_map


def _default_clean_config() -> CleanConfig:
    return CleanConfig(slang_map=load_word_map(default_data_path("slang.tsv")),
                       emoji_map=load_word_map(default_data_path("emoji.tsv")))


def _load_stopwords():
    with open(default_data_path("stopwords.txt"), encoding="utf-8") as fh:
        return frozenset(w.strip() for w in fh if w.strip())


def _write(path, text):
    Path(path).write_text(text, encoding="utf-8")


def cmd_validate(args):
    corpus = corpus_mod.load_csv(args.data)
    report = corpus_mod.validate(corpus)
    out = report.to_json()
    if args.out:
        _write(args.out, out)
    else:
        print(out)
    return 0


def cmd_stats(args):
    corpus = corpus_mod.load_csv(args.data)
    dist = corpus_mod.class_distribution(corpus)
    lexicon = sentiment_mod.load_lexicon(args.lexicon or default_data_path("lexicon.txt"))
    report = sentiment_mod.class_sentiment_report(corpus, lexicon, _default_clean_config())
    doc = {
        "n": len(corpus),
        "class_distribution": {"hate": dist[0], "offensive": dist[1], "neither": dist[2]},
        "sentiment": {str(k): {"polarity": v.polarity, "subjectivity": v.subjectivity}
                      for k, v in report.items()},
    }
    out = json.dumps(doc, indent=2)
    if args.out:
        _write(args.out, out)
    else:
        print(out)
    return 0


def _clean_corpus(corpus, config):
    cleaned = [corpus_mod.LabeledExample(id=ex.id, count=ex.count, votes=ex.votes,
                                         label=ex.label, text=clean(ex.text, config),
                                         synthetic=ex.synthetic)
               for ex in corpus]
    return corpus_mod.Corpus(tuple(cleaned))


def _policy_from_args(args, have_table):
    if args.policy:
        return aug.AugmentPolicy.from_json(Path(args.policy).read_text(encoding="utf-8"))
    stop = _load_stopwords()
    if have_table:
        ops = (("synonym_replace", 2), ("random_insert", 1),
               ("random_swap", 1), ("random_delete", 0.1))
    else:
        # synonym ops need an embedding table
        ops = (("random_swap", 1), ("random_delete", 0.1))
    return aug.AugmentPolicy(ops=ops, stopwords=stop, seed=args.seed)


def _embedding_table(args):
    if args.embeddings:
        return load_embeddings(args.embeddings, args.embed_dim)
    return None


def cmd_augment(args):
    corpus = corpus_mod.load_csv(args.data)
    config = _default_clean_config()
    cleaned = _clean_corpus(corpus, config)
    table = _embedding_table(args)
    policy = _policy_from_args(args, table is not None)
    ratios = tuple(None if r.strip() in ("", "-") else float(r)
                   for r in args.targets.split(","))
    rebalanced = aug.rebalance(cleaned, aug.RebalanceTarget(ratios), policy, table)
    corpus_mod.save_csv(rebalanced, args.out)
    print(f"wrote {len(rebalanced)} rows to {args.out}", file=sys.stderr)
    return 0


def _run_config(args, extra=None):
    doc = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    doc = {k: (str(v) if isinstance(v, Path) else v) for k, v in doc.items()}
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2, sort_keys=True)


def _prepare_datasets(args, config):
    corpus = corpus_mod.load_csv(args.data)
    spec = corpus_mod.SplitSpec(seed=args.seed)
    train_c, val_c, test_c = corpus_mod.split(corpus, spec)
    train_c = _clean_corpus(train_c, config)
    val_c = _clean_corpus(val_c, config)
    test_c = _clean_corpus(test_c, config)
    table = _embedding_table(args)
    if args.rebalance:
        policy = _policy_from_args(args, table is not None)
        train_c = aug.rebalance(train_c, aug.RebalanceTarget((args.rebalance, None, None)),
                                policy, table)
    identity = CleanConfig(lowercase=False, strip_mentions=False, strip_urls=False,
                           keep_hashtag_text=False, strip_special=False)
    vocab = build_vocab([ex.text.split() for ex in train_c], args.vocab_size)
    matrix = build_matrix(vocab, table, args.embed_dim, init_seed=args.seed)
    enc = lambda c: model_mod.encode_corpus(c, identity, vocab, args.max_len)
    return vocab, matrix, enc(train_c), enc(val_c), enc(test_c)


def _model_spec(args, vocab):
    return model_mod.ModelSpec(
        vocab_size=len(vocab), embed_dim=args.embed_dim, max_len=args.max_len,
        lstm1_units=args.hidden, lstm2_units=args.hidden,
        dense1_units=args.dense1, dense2_units=args.dense2,
        head_input=args.head_input, l2=args.l2)


def cmd_train(args):
    config = _default_clean_config()
    vocab, matrix, train_ds, val_ds, _ = _prepare_datasets(args, config)
    spec = _model_spec(args, vocab)
    cfg = model_mod.TrainConfig(batch_size=args.batch_size, epochs=args.epochs,
                                lr=args.lr, seed=args.seed)
    classifier = model_mod.build_classifier(spec, matrix, init_seed=args.seed)
    history = model_mod.train(classifier, train_ds, val_ds, cfg)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    model_mod.save_checkpoint(out_dir / "model.toxm", classifier, vocab, config)
    _write(out_dir / "history.csv", history.to_csv())
    _write(out_dir / "run_config.json", _run_config(args))
    print(f"final val accuracy {history.val_acc[-1]:.4f}", file=sys.stderr)
    return 0


def cmd_tune(args):
    config = _default_clean_config()
    vocab, matrix, train_ds, val_ds, _ = _prepare_datasets(args, config)
    base = _model_spec(args, vocab)
    space = model_mod.SearchSpace()
    best_spec, best_cfg, leaderboard = model_mod.tune(
        space, args.budget, train_ds, val_ds, base, matrix,
        seed=args.seed, epochs=args.tune_epochs, batch_size=args.batch_size)
    doc = {"best_spec": asdict(best_spec), "best_train_config": asdict(best_cfg),
           "leaderboard": leaderboard}
    out = json.dumps(doc, indent=2)
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        _write(out_dir / "leaderboard.json", out)
        _write(out_dir / "run_config.json", _run_config(args))
    else:
        print(out)
    return 0


def cmd_eval(args):
    classifier, vocab, config = model_mod.load_checkpoint(args.model)
    corpus = corpus_mod.load_csv(args.data)
    spec = classifier.spec
    ds = model_mod.encode_corpus(corpus, config, vocab, spec.max_len)
    preds = []
    for start in range(0, len(ds), 256):
        probs = classifier.predict_probs(ds.ids[start:start + 256])
        preds.extend(probs.argmax(axis=1).tolist())
    cm = evaluation.confusion(preds, ds.labels.tolist())
    costs = evaluation.CostMatrix.from_binary(args.fp_cost, args.fn_cost)
    out = evaluation.report_to_json(cm, costs)
    if args.out:
        _write(args.out, out)
    else:
        print(out)
    return 0


def cmd_classify(args):
    classifier, vocab, config = model_mod.load_checkpoint(args.model)
    spec = classifier.spec
    if args.text is not None:
        texts = [args.text]
    else:
        with open(args.file, encoding="utf-8") as fh:
            texts = [line.rstrip("\n") for line in fh]
    for text in texts:
        cls, probs = model_mod.predict(classifier, text, config, vocab, spec.max_len)
        print(f"{cls} {probs[0]:.6f} {probs[1]:.6f} {probs[2]:.6f}")
    return 0


def _add_model_flags(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--vocab-size", dest="vocab_size", type=int, default=2000)
    p.add_argument("--embed-dim", dest="embed_dim", type=int, default=100)
    p.add_argument("--max-len", dest="max_len", type=int, default=512)
    p.add_argument("--hidden", type=int, default=100)
    p.add_argument("--dense1", type=int, default=128)
    p.add_argument("--dense2", type=int, default=64)
    p.add_argument("--head-input", dest="head_input", default="final_state",
                   choices=["final_state", "flatten"])
    p.add_argument("--l2", type=float, default=0.01)
    p.add_argument("--batch-size", dest="batch_size", type=int, default=128)
    p.add_argument("--embeddings", help="pre-trained embedding text file")
    p.add_argument("--rebalance", type=float, default=None,
                   help="augment hate class up to this fraction of the majority count")
    p.add_argument("--policy", help="augmentation policy JSON")


def build_parser():
    parser = argparse.ArgumentParser(prog="toxpipe",
                                     description="hate/offensive/neither tweet classifier")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="corpus integrity checks -> JSON report")
    p.add_argument("--data", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("stats", help="class distribution and sentiment report")
    p.add_argument("--data", required=True)
    p.add_argument("--lexicon")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("augment", help="rebalance a training CSV via augmentation")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--targets", default="0.5,-,-",
                   help="per-class target ratios vs majority; '-' leaves a class alone")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--embeddings")
    p.add_argument("--embed-dim", dest="embed_dim", type=int, default=100)
    p.add_argument("--policy")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("train", help="full pipeline -> checkpoint + history CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--lr", type=float, default=0.001)
    _add_model_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("tune", help="hyperparameter random search -> leaderboard")
    p.add_argument("--data", required=True)
    p.add_argument("--out")
    p.add_argument("--budget", type=int, default=10)
    p.add_argument("--tune-epochs", dest="tune_epochs", type=int, default=5)
    _add_model_flags(p)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("eval", help="checkpoint + labeled CSV -> metrics/cost JSON")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--fp-cost", dest="fp_cost", type=float, default=0.0)
    p.add_argument("--fn-cost", dest="fn_cost", type=float, default=0.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("classify", help="checkpoint + text(s) -> class + probabilities")
    p.add_argument("--model", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--text")
    group.add_argument("--file")
    p.set_defaults(func=cmd_classify)

    return parser


def main(argv=None):
    # TOXPIPE_THREADS caps worker threads; all work is currently single-threaded
    threads = os.environ.get("TOXPIPE_THREADS")
    if threads is not None and not threads.isdigit():
        print(f"toxpipe: TOXPIPE_THREADS must be an integer, got {threads!r}",
              file=sys.stderr)
        return 2
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (corpus_mod.CorpusError, model_mod.ModelError, aug.AugmentError,
            sentiment_mod.LexiconError, evaluation.EvalError, OSError) as e:
        print(f"toxpipe {args.command}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
