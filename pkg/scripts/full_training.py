#!/usr/bin/env python3
"""End-to-end experiment on the public tweet CSV.

Trains the bidirectional-LSTM classifier at sequence length 64 on an 80/10/10
stratified split, optionally rebalancing the hate class with augmentation, and
reports held-out accuracy, per-class F1, and expected misclassification cost.

Usage:
    python3 scripts/full_training.py --data /path/to/labeled_data.csv \
        [--out runs/full] [--epochs 10] [--rebalance 0.5] [--seed 0]
"""

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import numpy as np

from toxpipe import default_data_path
from toxpipe.augment import AugmentPolicy, RebalanceTarget, rebalance
from toxpipe.corpus import Corpus, LabeledExample, SplitSpec, load_csv, split
from toxpipe.embed import EmbeddingTable, build_matrix, build_vocab, encode, pad
from toxpipe.evaluation import CostMatrix, confusion, expected_cost, metrics
from toxpipe.model import (EncodedDataset, ModelSpec, TrainConfig, build_classifier,
                           save_checkpoint, train)
from toxpipe.preprocess import CleanConfig, clean, load_word_map


def parse_args():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--data", required=True)
    p.add_argument("--out", default="runs/full")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--max-len", type=int, default=64)
    p.add_argument("--vocab-size", type=int, default=2000)
    p.add_argument("--hidden", type=int, default=100)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--rebalance", type=float, default=None,
                   help="target hate-class ratio relative to the majority class")
    p.add_argument("--fp-cost", type=float, default=1.0)
    p.add_argument("--fn-cost", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=0)
    return p.parse_args()


def cleaned(corpus, config):
    return Corpus(tuple(
        LabeledExample(ex.id, ex.count, ex.votes, ex.label,
                       clean(ex.text, config), ex.synthetic)
        for ex in corpus))


def encode_split(corpus, vocab, max_len):
    ids = np.stack([pad(encode(ex.text.split(), vocab), max_len) for ex in corpus])
    return EncodedDataset(ids, np.array(corpus.labels()))


def main():
    args = parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = CleanConfig(slang_map=load_word_map(default_data_path("slang.tsv")),
                         emoji_map=load_word_map(default_data_path("emoji.tsv")))

    corpus = load_csv(args.data)
    print(f"loaded {len(corpus)} examples")
    train_c, val_c, test_c = split(corpus, SplitSpec(seed=args.seed))
    train_c, val_c, test_c = (cleaned(c, config) for c in (train_c, val_c, test_c))

    vocab = build_vocab((ex.text.split() for ex in train_c), args.vocab_size)
    matrix = build_matrix(vocab, None, dim=100, init_seed=args.seed)

    if args.rebalance is not None:
        table = EmbeddingTable(
            {w: matrix[i] for w, i in vocab.word_to_index.items()}, matrix.shape[1])
        train_c = rebalance(train_c, RebalanceTarget((args.rebalance, None, None)),
                            AugmentPolicy(seed=args.seed), table)
        print(f"rebalanced training set to {len(train_c)} examples")

    train_ds = encode_split(train_c, vocab, args.max_len)
    val_ds = encode_split(val_c, vocab, args.max_len)
    test_ds = encode_split(test_c, vocab, args.max_len)

    spec = ModelSpec(vocab_size=len(vocab), embed_dim=100, max_len=args.max_len,
                     lstm1_units=args.hidden, lstm2_units=args.hidden)
    model = build_classifier(spec, matrix, init_seed=args.seed)
    print(f"trainable parameters: {model.param_count():,}")

    cfg = TrainConfig(batch_size=args.batch_size, epochs=args.epochs, lr=args.lr,
                      seed=args.seed)
    history = train(model, train_ds, val_ds, cfg)
    for ep in range(len(history.val_acc)):
        print(f"epoch {ep + 1}: train_acc={history.train_acc[ep]:.4f} "
              f"val_acc={history.val_acc[ep]:.4f}")
    (out / "history.csv").write_text(history.to_csv())
    save_checkpoint(out / "model.toxm", model, vocab, config)

    preds = model.predict_probs(test_ds.ids).argmax(axis=1)
    cm = confusion(preds.tolist(), test_ds.labels.tolist())
    m = metrics(cm)
    cost = expected_cost(cm, CostMatrix.from_binary(args.fp_cost, args.fn_cost))
    result = {"test_accuracy": m["accuracy"],
              "per_class_f1": {str(k): v["f1"] for k, v in m["per_class"].items()},
              "expected_cost": cost,
              "confusion": [list(r) for r in cm.counts]}
    (out / "test_metrics.json").write_text(json.dumps(result, indent=2))
    print(json.dumps(result, indent=2))


if __name__ == "__main__":
    main()
