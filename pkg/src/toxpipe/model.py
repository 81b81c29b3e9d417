"""Classifier assembly, training, prediction, checkpoints, frozen-encoder transfer
head and random-search hyperparameter tuning."""

from __future__ import annotations

import io
import itertools
import json
import struct
from dataclasses import dataclass, field, asdict, replace

import numpy as np

from . import nn
from .embed import Vocab, encode, pad
from .preprocess import CleanConfig, clean

CHECKPOINT_MAGIC = b"TOXM"
CHECKPOINT_VERSION = 1


class ModelError(Exception):
    pass


@dataclass(frozen=True)
class ModelSpec:
    vocab_size: int
    embed_dim: int = 100
    max_len: int = 512
    lstm1_units: int = 100
    lstm1_dropout: float = 0.0
    lstm2_units: int = 100
    lstm2_dropout: float = 0.0
    head_input: str = "final_state"  # or "flatten"
    dense1_units: int = 128
    dense1_dropout: float = 0.2
    dense2_units: int = 64
    dense2_dropout: float = 0.2
    l2: float = 0.01
    classes: int = 3
    embedding_trainable: bool = True

    def __post_init__(self):
        for name in ("vocab_size", "embed_dim", "max_len", "lstm1_units",
                     "lstm2_units", "dense1_units", "dense2_units"):
            if getattr(self, name) < 1:
                raise ModelError(f"{name} must be >= 1")
        for name in ("lstm1_dropout", "lstm2_dropout", "dense1_dropout", "dense2_dropout"):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise ModelError(f"{name} outside [0,1)")
        if self.head_input not in ("flatten", "final_state"):
            raise ModelError(f"head_input must be flatten or final_state")
        if self.classes != 3:
            raise ModelError("classifier is three-class")


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 128
    epochs: int = 20
    lr: float = 0.001
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.batch_size < 1 or self.epochs < 1 or self.lr <= 0:
            raise ModelError("invalid TrainConfig")


@dataclass
class History:
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    train_acc: list = field(default_factory=list)
    val_acc: list = field(default_factory=list)

    def to_csv(self) -> str:
        lines = ["epoch,train_loss,val_loss,train_acc,val_acc"]
        for e in range(len(self.train_loss)):
            lines.append(f"{e},{self.train_loss[e]!r},{self.val_loss[e]!r},"
                         f"{self.train_acc[e]!r},{self.val_acc[e]!r}")
        return "\n".join(lines) + "\n"


@dataclass
class EncodedDataset:
    ids: np.ndarray     # (N, T) int64
    labels: np.ndarray  # (N,)

    def __len__(self):
        return len(self.labels)


def encode_corpus(corpus, config: CleanConfig, vocab: Vocab, max_len: int) -> EncodedDataset:
    rows = [pad(encode(clean(ex.text, config).split(), vocab), max_len) for ex in corpus]
    return EncodedDataset(np.array(rows, dtype=np.int64),
                          np.array([ex.label for ex in corpus], dtype=np.int64))


class Model:
    """Fixed-topology layer stack with hand-derived backward passes."""

    def __init__(self, layers, l2=0.0, spec: ModelSpec | None = None):
        self.layers = layers
        self.l2 = l2
        self.spec = spec

    def forward(self, ids, training=False, rng=None):
        x = ids
        for layer in self.layers:
            x = layer.forward(x, training=training, rng=rng)
        return x

    def _l2_kernels(self):
        # penalty applies to the ReLU hidden-layer kernels only
        return [layer.params["W"] for layer in self.layers
                if isinstance(layer, nn.Dense) and layer.activation == "relu"]

    def loss_and_grads(self, ids, targets, training=False, rng=None):
        for layer in self.layers:
            layer.zero_grads()
        logits = self.forward(ids, training=training, rng=rng)
        loss, _, dlogits = nn.batch_softmax_xent(logits, targets)
        if self.l2:
            for K in self._l2_kernels():
                loss += self.l2 * float(np.sum(K.astype(np.float64) ** 2))
        grad = dlogits
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        if self.l2:
            for layer in self.layers:
                if isinstance(layer, nn.Dense) and layer.activation == "relu":
                    layer.grads["W"] += 2.0 * self.l2 * layer.params["W"]
        return loss, self.parameters(grads=True)

    def predict_probs(self, ids):
        return nn.softmax(self.forward(ids, training=False))

    def parameters(self, grads=False):
        out = {}
        for layer in self.layers:
            if grads and not layer.trainable:
                continue
            source = layer.grads if grads else layer.params
            for key, arr in source.items():
                out[f"{layer.name}/{key}"] = arr
        return out

    def param_count(self) -> int:
        return sum(layer.param_count() for layer in self.layers)

    def set_parameters(self, params: dict):
        for layer in self.layers:
            for key in layer.params:
                full = f"{layer.name}/{key}"
                if full in params:
                    layer.params[key] = params[full].astype(layer.params[key].dtype)
        # refresh grad buffers to the new shapes
        for layer in self.layers:
            layer.zero_grads()


def build_classifier(spec: ModelSpec, matrix: np.ndarray, init_seed: int = 0,
                     dtype=np.float32) -> Model:
    if matrix.shape != (spec.vocab_size + 1, spec.embed_dim):
        raise ModelError(f"embedding matrix shape {matrix.shape} != "
                         f"({spec.vocab_size + 1}, {spec.embed_dim})")
    rng = np.random.default_rng(init_seed)
    layers = [
        nn.Embedding(matrix, trainable=spec.embedding_trainable, dtype=dtype),
        nn.BiLstm(spec.embed_dim, spec.lstm1_units, return_sequences=True,
                  rng=rng, dtype=dtype, name="bilstm1"),
        nn.Dropout(spec.lstm1_dropout, name="dropout_lstm1"),
        nn.BiLstm(2 * spec.lstm1_units, spec.lstm2_units,
                  return_sequences=(spec.head_input == "flatten"),
                  rng=rng, dtype=dtype, name="bilstm2"),
        nn.Dropout(spec.lstm2_dropout, name="dropout_lstm2"),
    ]
    if spec.head_input == "flatten":
        layers.append(nn.Flatten())
        head_width = spec.max_len * 2 * spec.lstm2_units
    else:
        head_width = 2 * spec.lstm2_units
    layers += [
        nn.LayerNorm(head_width, dtype=dtype),
        nn.Dense(head_width, spec.dense1_units, "relu", rng, dtype, name="dense1"),
        nn.Dropout(spec.dense1_dropout, name="dropout1"),
        nn.Dense(spec.dense1_units, spec.dense2_units, "relu", rng, dtype, name="dense2"),
        nn.Dropout(spec.dense2_dropout, name="dropout2"),
        nn.Dense(spec.dense2_units, spec.classes, "none", rng, dtype, name="logits"),
    ]
    return Model(layers, l2=spec.l2, spec=spec)


def param_count(model: Model) -> int:
    return model.param_count()


def _accuracy_and_loss(model: Model, ds: EncodedDataset, batch_size=256):
    total_loss = 0.0
    correct = 0
    for start in range(0, len(ds), batch_size):
        ids = ds.ids[start:start + batch_size]
        targets = ds.labels[start:start + batch_size]
        logits = model.forward(ids, training=False)
        loss, probs, _ = nn.batch_softmax_xent(logits, targets)
        total_loss += loss * len(targets)
        correct += int((probs.argmax(axis=1) == targets).sum())
    n = len(ds)
    return total_loss / n, correct / n


def train(model: Model, train_ds: EncodedDataset, val_ds: EncodedDataset,
          cfg: TrainConfig) -> History:
    """Mini-batch Adam training; retains the best-validation-accuracy parameters."""
    if len(train_ds) == 0 or len(val_ds) == 0:
        raise ModelError("empty dataset")
    shuffle_rng = np.random.default_rng(cfg.seed)
    dropout_rng = np.random.default_rng(cfg.seed + 1)
    state = nn.AdamState(lr=cfg.lr)
    history = History()
    best_acc = -1.0
    best_params = None
    for epoch in range(cfg.epochs):
        order = (shuffle_rng.permutation(len(train_ds)) if cfg.shuffle
                 else np.arange(len(train_ds)))
        for start in range(0, len(train_ds), cfg.batch_size):
            sel = order[start:start + cfg.batch_size]
            loss, grads = model.loss_and_grads(train_ds.ids[sel], train_ds.labels[sel],
                                               training=True, rng=dropout_rng)
            if not np.isfinite(loss):
                raise ModelError(f"non-finite loss at epoch {epoch}, batch {start // cfg.batch_size}")
            nn.adam_step(model.parameters(), grads, state)
        tr_loss, tr_acc = _accuracy_and_loss(model, train_ds)
        va_loss, va_acc = _accuracy_and_loss(model, val_ds)
        history.train_loss.append(tr_loss)
        history.val_loss.append(va_loss)
        history.train_acc.append(tr_acc)
        history.val_acc.append(va_acc)
        if va_acc > best_acc:
            best_acc = va_acc
            best_params = {k: v.copy() for k, v in model.parameters().items()}
    if best_params is not None:
        model.set_parameters(best_params)
    return history


def predict(model: Model, text: str, config: CleanConfig, vocab: Vocab, max_len: int):
    ids = np.array([pad(encode(clean(text, config).split(), vocab), max_len)],
                   dtype=np.int64)
    probs = model.predict_probs(ids)[0]
    return int(probs.argmax()), probs


# ---------------------------------------------------------------------------
# checkpoint format: magic, version, JSON header, then named float32 tensors

def _write_tensor(fh, name: str, arr: np.ndarray):
    data = np.atleast_2d(np.asarray(arr, dtype="<f4"))
    nb = name.encode("utf-8")
    fh.write(struct.pack("<I", len(nb)))
    fh.write(nb)
    fh.write(struct.pack("<II", data.shape[0], data.shape[1]))
    fh.write(data.tobytes())


def save_checkpoint(path, model: Model, vocab: Vocab, config: CleanConfig):
    if model.spec is None:
        raise ModelError("cannot checkpoint a model without a ModelSpec")
    header = {
        "spec": asdict(model.spec),
        "vocab": vocab.words(),
        "clean": {"lowercase": config.lowercase, "strip_mentions": config.strip_mentions,
                  "strip_urls": config.strip_urls, "keep_hashtag_text": config.keep_hashtag_text,
                  "strip_special": config.strip_special,
                  "emoji_map": config.emoji_map, "slang_map": config.slang_map},
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<I", CHECKPOINT_VERSION))
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        params = model.parameters()
        fh.write(struct.pack("<I", len(params)))
        for name in sorted(params):
            _write_tensor(fh, name, params[name])


def load_checkpoint(path):
    """Returns (model, vocab, clean_config)."""
    with open(path, "rb") as fh:
        if fh.read(4) != CHECKPOINT_MAGIC:
            raise ModelError(f"{path}: not a model checkpoint")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != CHECKPOINT_VERSION:
            raise ModelError(f"{path}: unsupported checkpoint version {version}")
        (hlen,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        (n_tensors,) = struct.unpack("<I", fh.read(4))
        tensors = {}
        for _ in range(n_tensors):
            (nlen,) = struct.unpack("<I", fh.read(4))
            name = fh.read(nlen).decode("utf-8")
            rows, cols = struct.unpack("<II", fh.read(8))
            data = np.frombuffer(fh.read(rows * cols * 4), dtype="<f4")
            tensors[name] = data.reshape(rows, cols)
    spec = ModelSpec(**header["spec"])
    vocab = Vocab({w: i + 1 for i, w in enumerate(header["vocab"])})
    cc = header["clean"]
    config = CleanConfig(lowercase=cc["lowercase"], strip_mentions=cc["strip_mentions"],
                         strip_urls=cc["strip_urls"], keep_hashtag_text=cc["keep_hashtag_text"],
                         strip_special=cc["strip_special"],
                         emoji_map=cc["emoji_map"], slang_map=cc["slang_map"])
    model = build_classifier(spec, np.zeros((spec.vocab_size + 1, spec.embed_dim)))
    named = {}
    for layer in model.layers:
        for key, arr in layer.params.items():
            full = f"{layer.name}/{key}"
            if full in tensors:
                named[full] = tensors[full].reshape(arr.shape)
    model.set_parameters(named)
    return model, vocab, config


# ---------------------------------------------------------------------------
# frozen-encoder transfer learning

class FrozenEncoder:
    """Interface: maps padded token ids plus an attention mask to a
    (batch, time, width) state block. Parameters never train."""

    width: int
    max_len: int

    def encode(self, ids: np.ndarray, mask: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class MockEncoder(FrozenEncoder):
    """Deterministic stand-in for a pretrained language model: each (token id,
    position) pair maps to a fixed pseudo-random state vector."""

    def __init__(self, width=8, max_len=32, seed=0):
        self.width = width
        self.max_len = max_len
        self.seed = seed

    def encode(self, ids, mask):
        B, T = ids.shape
        v = ids[:, :, None].astype(np.float64)
        t = np.arange(T, dtype=np.float64)[None, :, None]
        w = np.arange(self.width, dtype=np.float64)[None, None, :]
        states = np.sin(0.731 * v + 1.303 * t + 2.117 * w + 0.577 * self.seed)
        return states * mask[:, :, None]


class IdentityEmbeddingEncoder(FrozenEncoder):
    """Frozen embedding-lookup encoder: states are the raw embedding vectors."""

    def __init__(self, matrix: np.ndarray, max_len: int):
        self.matrix = np.asarray(matrix, dtype=np.float64)
        self.width = self.matrix.shape[1]
        self.max_len = max_len

    def encode(self, ids, mask):
        return self.matrix[ids] * mask[:, :, None]


class _EncoderLayer(nn.Layer):
    """Adapter placing a FrozenEncoder at the bottom of a layer stack."""

    trainable = False

    def __init__(self, encoder: FrozenEncoder):
        super().__init__("encoder")
        self.encoder = encoder

    def forward(self, ids, training=False, rng=None):
        mask = (ids != 0).astype(np.float64)
        return self.encoder.encode(ids, mask)

    def backward(self, dy):
        return None  # gradient stops at the frozen encoder


def build_transfer_head(encoder: FrozenEncoder, dense1_units=128, dense2_units=64,
                        dense1_dropout=0.2, dense2_dropout=0.2, l2=0.01,
                        init_seed=0, dtype=np.float64) -> Model:
    """Frozen encoder -> flatten -> layer norm -> two ReLU dense layers with
    dropout -> softmax logits. Only the head trains."""
    rng = np.random.default_rng(init_seed)
    width = encoder.max_len * encoder.width
    layers = [
        _EncoderLayer(encoder),
        nn.Flatten(),
        nn.LayerNorm(width, dtype=dtype),
        nn.Dense(width, dense1_units, "relu", rng, dtype, name="dense1"),
        nn.Dropout(dense1_dropout, name="dropout1"),
        nn.Dense(dense1_units, dense2_units, "relu", rng, dtype, name="dense2"),
        nn.Dropout(dense2_dropout, name="dropout2"),
        nn.Dense(dense2_units, 3, "none", rng, dtype, name="logits"),
    ]
    return Model(layers, l2=l2)


# ---------------------------------------------------------------------------
# hyperparameter search

@dataclass(frozen=True)
class SearchSpace:
    lstm_units: tuple = tuple(range(32, 513, 32))
    dense_units: tuple = tuple(range(32, 513, 32))
    dropouts: tuple = (0.2, 0.35, 0.5, 0.65, 0.8)
    lrs: tuple = (0.01, 0.001, 0.0001)

    def size(self) -> int:
        return (len(self.lstm_units) ** 2 * len(self.dense_units) ** 2
                * len(self.dropouts) ** 4 * len(self.lrs))

    def contains(self, point: dict) -> bool:
        return (point["lstm1_units"] in self.lstm_units
                and point["lstm2_units"] in self.lstm_units
                and point["dense1_units"] in self.dense_units
                and point["dense2_units"] in self.dense_units
                and all(point[k] in self.dropouts for k in
                        ("lstm1_dropout", "lstm2_dropout", "dense1_dropout", "dense2_dropout"))
                and point["lr"] in self.lrs)


def _enumerate_space(space: SearchSpace):
    for combo in itertools.product(space.lstm_units, space.dropouts, space.lstm_units,
                                   space.dropouts, space.dense_units, space.dropouts,
                                   space.dense_units, space.dropouts, space.lrs):
        yield {"lstm1_units": combo[0], "lstm1_dropout": combo[1],
               "lstm2_units": combo[2], "lstm2_dropout": combo[3],
               "dense1_units": combo[4], "dense1_dropout": combo[5],
               "dense2_units": combo[6], "dense2_dropout": combo[7],
               "lr": combo[8]}


def sample_space(space: SearchSpace, budget: int, seed: int):
    """Up to `budget` distinct points, uniform per dimension; exhaustive when the
    budget covers the whole space."""
    if budget >= space.size():
        return list(_enumerate_space(space))
    rng = np.random.default_rng(seed)
    seen = set()
    points = []
    while len(points) < budget:
        point = {
            "lstm1_units": int(rng.choice(space.lstm_units)),
            "lstm1_dropout": float(rng.choice(space.dropouts)),
            "lstm2_units": int(rng.choice(space.lstm_units)),
            "lstm2_dropout": float(rng.choice(space.dropouts)),
            "dense1_units": int(rng.choice(space.dense_units)),
            "dense1_dropout": float(rng.choice(space.dropouts)),
            "dense2_units": int(rng.choice(space.dense_units)),
            "dense2_dropout": float(rng.choice(space.dropouts)),
            "lr": float(rng.choice(space.lrs)),
        }
        key = tuple(sorted(point.items()))
        if key not in seen:
            seen.add(key)
            points.append(point)
    return points


def tune(space: SearchSpace, budget: int, train_ds: EncodedDataset,
         val_ds: EncodedDataset, base_spec: ModelSpec, matrix: np.ndarray,
         seed: int = 0, epochs: int = 5, batch_size: int = 128):
    """Random search ranked by validation accuracy; ties broken by lower
    validation loss, then sample order. Returns (best spec, best cfg, leaderboard)."""
    if budget < 1:
        raise ModelError("tune budget must be >= 1")
    leaderboard = []
    for order, point in enumerate(sample_space(space, budget, seed)):
        spec = replace(base_spec, **{k: v for k, v in point.items() if k != "lr"})
        cfg = TrainConfig(batch_size=batch_size, epochs=epochs, lr=point["lr"], seed=seed)
        candidate = build_classifier(spec, matrix, init_seed=seed)
        history = train(candidate, train_ds, val_ds, cfg)
        best_epoch = int(np.argmax(history.val_acc))
        leaderboard.append({
            "order": order,
            "point": point,
            "val_acc": history.val_acc[best_epoch],
            "val_loss": history.val_loss[best_epoch],
        })
    ranked = sorted(leaderboard, key=lambda e: (-e["val_acc"], e["val_loss"], e["order"]))
    best = ranked[0]["point"]
    best_spec = replace(base_spec, **{k: v for k, v in best.items() if k != "lr"})
    best_cfg = TrainConfig(batch_size=batch_size, epochs=epochs, lr=best["lr"], seed=seed)
    return best_spec, best_cfg, ranked
