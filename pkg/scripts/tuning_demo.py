#!/usr/bin/env python3
"""Random-search tuning demo on a synthetic capacity-threshold task.

Generates a dataset whose label is encoded purely in token ordering (ascending,
descending, or interleaved), runs the tuner over a tiny search grid, and prints
the leaderboard. A second-layer hidden width of 1 cannot represent the task, so
the tuner should always return the wider model. Needs no external data.

Usage:
    python3 scripts/tuning_demo.py [--seed 0] [--budget 4] [--epochs 10]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))
sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

import numpy as np

from toxpipe.model import ModelSpec, SearchSpace, tune
from test_acceptance import _order_task


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=4)
    p.add_argument("--epochs", type=int, default=10)
    args = p.parse_args()

    space = SearchSpace(lstm_units=(1, 8), dense_units=(16,), dropouts=(0.0,),
                        lrs=(0.005,))
    base = ModelSpec(vocab_size=12, embed_dim=4, max_len=8, l2=0.0)
    train_ds = _order_task(300, args.seed)
    val_ds = _order_task(150, 100 + args.seed)
    matrix = np.random.default_rng(args.seed).uniform(-0.05, 0.05, (13, 4))
    best_spec, best_cfg, board = tune(space, args.budget, train_ds, val_ds, base,
                                      matrix, seed=args.seed, epochs=args.epochs,
                                      batch_size=32)
    print("leaderboard (best first):")
    for entry in board:
        pt = entry["point"]
        print(f"  lstm=({pt['lstm1_units']},{pt['lstm2_units']}) "
              f"dense=({pt['dense1_units']},{pt['dense2_units']}) "
              f"lr={pt['lr']}  val_acc={entry['val_acc']:.3f}")
    print(f"best: lstm2_units={best_spec.lstm2_units} lr={best_cfg.lr}")


if __name__ == "__main__":
    main()
