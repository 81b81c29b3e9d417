"""From-scratch neural network core.

Batched numpy implementations of the layers used by the classifier (embedding
lookup, LSTM / bidirectional LSTM, layer normalization, dense, inverted
dropout), softmax cross-entropy with an L2 kernel penalty, the Adam update,
and a central-difference gradient checker. Every layer carries a hand-derived
backward pass; there is no autodiff.

Gate packing order in LSTM weight matrices is (input, forget, cell, output).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ShapeError(Exception):
    pass


def sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def relu(z):
    return np.maximum(z, 0.0)


def glorot_uniform(rng, fan_in, fan_out, shape, dtype):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


# ---------------------------------------------------------------------------
# reference single-step LSTM cell (unbatched, per-gate parameters)

@dataclass
class LstmParams:
    """Per-gate weights: W_g maps input, U_g maps the previous hidden state."""
    W_i: np.ndarray
    W_f: np.ndarray
    W_c: np.ndarray
    W_o: np.ndarray
    U_i: np.ndarray
    U_f: np.ndarray
    U_c: np.ndarray
    U_o: np.ndarray
    b_i: np.ndarray
    b_f: np.ndarray
    b_c: np.ndarray
    b_o: np.ndarray

    @classmethod
    def zeros(cls, input_dim, hidden, dtype=np.float64):
        w = lambda: np.zeros((input_dim, hidden), dtype=dtype)
        u = lambda: np.zeros((hidden, hidden), dtype=dtype)
        b = lambda: np.zeros(hidden, dtype=dtype)
        return cls(w(), w(), w(), w(), u(), u(), u(), u(), b(), b(), b(), b())


def lstm_cell_step(x, h_prev, c_prev, params: LstmParams):
    """One LSTM step on vectors; returns (h, c)."""
    if x.shape[0] != params.W_i.shape[0] or h_prev.shape[0] != params.U_i.shape[0]:
        raise ShapeError(f"lstm_cell_step shape mismatch: x {x.shape}, "
                         f"W_i {params.W_i.shape}")
    i = sigmoid(x @ params.W_i + h_prev @ params.U_i + params.b_i)
    f = sigmoid(x @ params.W_f + h_prev @ params.U_f + params.b_f)
    g = np.tanh(x @ params.W_c + h_prev @ params.U_c + params.b_c)
    o = sigmoid(x @ params.W_o + h_prev @ params.U_o + params.b_o)
    c = f * c_prev + i * g
    h = o * np.tanh(c)
    return h, c


# ---------------------------------------------------------------------------
# layers

class Layer:
    """Base: params/grads are dicts of named arrays; backward accumulates grads."""

    trainable = True

    def __init__(self, name):
        self.name = name
        self.params = {}
        self.grads = {}

    def forward(self, x, training=False, rng=None):
        raise NotImplementedError

    def backward(self, dy):
        raise NotImplementedError

    def zero_grads(self):
        self.grads = {k: np.zeros_like(v) for k, v in self.params.items()}

    def param_count(self):
        if not self.trainable:
            return 0
        return sum(v.size for v in self.params.values())


class Embedding(Layer):
    """Integer ids (B, T) -> vectors (B, T, D). Row 0 is the padding row and
    is pinned to zero (excluded from the trainable count and never updated)."""

    def __init__(self, matrix, trainable=True, dtype=np.float32, name="embedding"):
        super().__init__(name)
        self.trainable = trainable
        self.params = {"matrix": np.array(matrix, dtype=dtype)}
        self.params["matrix"][0] = 0.0
        self.zero_grads()

    def forward(self, x, training=False, rng=None):
        self._ids = x
        out = self.params["matrix"][x]
        out[x == 0] = 0.0  # padding row is pinned to zero
        return out

    def backward(self, dy):
        if self.trainable:
            np.add.at(self.grads["matrix"], self._ids, dy)
            self.grads["matrix"][0] = 0.0
        return None  # ids have no gradient

    def param_count(self):
        if not self.trainable:
            return 0
        # padding row stays fixed at zero
        rows, dim = self.params["matrix"].shape
        return (rows - 1) * dim


class _LstmDirection:
    """One direction of an LSTM over (B, T, D); owns packed (D,4H),(H,4H),(4H) params."""

    def __init__(self, input_dim, hidden, reverse, rng, dtype):
        self.input_dim = input_dim
        self.hidden = hidden
        self.reverse = reverse
        W = glorot_uniform(rng, input_dim, 4 * hidden, (input_dim, 4 * hidden), dtype)
        U = glorot_uniform(rng, hidden, 4 * hidden, (hidden, 4 * hidden), dtype)
        b = np.zeros(4 * hidden, dtype=dtype)
        b[hidden:2 * hidden] = 1.0  # forget-gate bias
        self.params = {"W": W, "U": U, "b": b}

    def forward(self, x):
        B, T, D = x.shape
        H = self.hidden
        W, U, b = self.params["W"], self.params["U"], self.params["b"]
        order = range(T - 1, -1, -1) if self.reverse else range(T)
        h = np.zeros((B, H), dtype=x.dtype)
        c = np.zeros((B, H), dtype=x.dtype)
        self._cache = []
        out = np.zeros((B, T, H), dtype=x.dtype)
        for t in order:
            z = x[:, t] @ W + h @ U + b
            i = sigmoid(z[:, :H])
            f = sigmoid(z[:, H:2 * H])
            g = np.tanh(z[:, 2 * H:3 * H])
            o = sigmoid(z[:, 3 * H:])
            c_new = f * c + i * g
            tanh_c = np.tanh(c_new)
            h_new = o * tanh_c
            self._cache.append((t, x[:, t], h, c, i, f, g, o, tanh_c))
            h, c = h_new, c_new
            out[:, t] = h
        self._x_shape = x.shape
        return out

    def backward(self, d_out, grads):
        """d_out: (B, T, H) upstream gradient at each timestep. Returns dx."""
        B, T, D = self._x_shape
        H = self.hidden
        W, U = self.params["W"], self.params["U"]
        dx = np.zeros(self._x_shape, dtype=d_out.dtype)
        dh_next = np.zeros((B, H), dtype=d_out.dtype)
        dc_next = np.zeros((B, H), dtype=d_out.dtype)
        for t, x_t, h_prev, c_prev, i, f, g, o, tanh_c in reversed(self._cache):
            dh = d_out[:, t] + dh_next
            do = dh * tanh_c
            dc = dh * o * (1.0 - tanh_c ** 2) + dc_next
            di = dc * g
            df = dc * c_prev
            dg = dc * i
            dz = np.concatenate([di * i * (1 - i), df * f * (1 - f),
                                 dg * (1 - g ** 2), do * o * (1 - o)], axis=1)
            grads["W"] += x_t.T @ dz
            grads["U"] += h_prev.T @ dz
            grads["b"] += dz.sum(axis=0)
            dx[:, t] = dz @ W.T
            dh_next = dz @ U.T
            dc_next = dc * f
        return dx


class BiLstm(Layer):
    """Bidirectional LSTM; per-timestep outputs concatenated (forward || backward)."""

    def __init__(self, input_dim, hidden, return_sequences, rng, dtype=np.float32,
                 name="bilstm"):
        super().__init__(name)
        self.hidden = hidden
        self.return_sequences = return_sequences
        self.fwd = _LstmDirection(input_dim, hidden, reverse=False, rng=rng, dtype=dtype)
        self.bwd = _LstmDirection(input_dim, hidden, reverse=True, rng=rng, dtype=dtype)
        self.params = {f"fwd_{k}": v for k, v in self.fwd.params.items()}
        self.params.update({f"bwd_{k}": v for k, v in self.bwd.params.items()})
        self.zero_grads()

    def forward(self, x, training=False, rng=None):
        if x.ndim != 3:
            raise ShapeError(f"BiLstm expects (B, T, D), got {x.shape}")
        if x.shape[1] == 0:
            raise ShapeError("BiLstm over an empty sequence")
        # keep direction params aliased to the layer dict (adam writes in place)
        for k in ("W", "U", "b"):
            self.fwd.params[k] = self.params[f"fwd_{k}"]
            self.bwd.params[k] = self.params[f"bwd_{k}"]
        hf = self.fwd.forward(x)
        hb = self.bwd.forward(x)
        self._T = x.shape[1]
        if self.return_sequences:
            return np.concatenate([hf, hb], axis=2)
        # final state: forward at t=T-1, backward at t=0 (its last processed step)
        return np.concatenate([hf[:, -1], hb[:, 0]], axis=1)

    def backward(self, dy):
        H = self.hidden
        if self.return_sequences:
            d_f, d_b = dy[:, :, :H], dy[:, :, H:]
        else:
            B = dy.shape[0]
            d_f = np.zeros((B, self._T, H), dtype=dy.dtype)
            d_b = np.zeros((B, self._T, H), dtype=dy.dtype)
            d_f[:, -1] = dy[:, :H]
            d_b[:, 0] = dy[:, H:]
        gf = {k: self.grads[f"fwd_{k}"] for k in ("W", "U", "b")}
        gb = {k: self.grads[f"bwd_{k}"] for k in ("W", "U", "b")}
        return self.fwd.backward(d_f, gf) + self.bwd.backward(d_b, gb)


class LayerNorm(Layer):
    """Per-instance normalization across the feature axis, then affine rescale."""

    def __init__(self, dim, eps=1e-5, dtype=np.float32, name="layer_norm"):
        super().__init__(name)
        self.eps = eps
        self.params = {"gamma": np.ones(dim, dtype=dtype),
                       "beta": np.zeros(dim, dtype=dtype)}
        self.zero_grads()

    def forward(self, x, training=False, rng=None):
        mean = x.mean(axis=-1, keepdims=True)
        var = x.var(axis=-1, keepdims=True)
        self._inv_std = 1.0 / np.sqrt(var + self.eps)
        self._xhat = (x - mean) * self._inv_std
        return self.params["gamma"] * self._xhat + self.params["beta"]

    def backward(self, dy):
        gamma = self.params["gamma"]
        xhat, inv_std = self._xhat, self._inv_std
        self.grads["gamma"] += (dy * xhat).reshape(-1, xhat.shape[-1]).sum(axis=0)
        self.grads["beta"] += dy.reshape(-1, xhat.shape[-1]).sum(axis=0)
        dxhat = dy * gamma
        n = xhat.shape[-1]
        return (dxhat - dxhat.mean(axis=-1, keepdims=True)
                - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)) * inv_std


class Dense(Layer):
    def __init__(self, input_dim, units, activation, rng, dtype=np.float32, name="dense"):
        super().__init__(name)
        if activation not in ("relu", "none"):
            raise ShapeError(f"unknown activation {activation!r}")
        self.activation = activation
        self.params = {"W": glorot_uniform(rng, input_dim, units, (input_dim, units), dtype),
                       "b": np.zeros(units, dtype=dtype)}
        self.zero_grads()

    def forward(self, x, training=False, rng=None):
        if x.shape[-1] != self.params["W"].shape[0]:
            raise ShapeError(f"dense {self.name}: input width {x.shape[-1]} != "
                             f"{self.params['W'].shape[0]}")
        self._x = x
        z = x @ self.params["W"] + self.params["b"]
        if self.activation == "relu":
            self._mask = z > 0
            return z * self._mask
        return z

    def backward(self, dy):
        if self.activation == "relu":
            dy = dy * self._mask
        self.grads["W"] += self._x.T @ dy
        self.grads["b"] += dy.sum(axis=0)
        return dy @ self.params["W"].T


class Dropout(Layer):
    """Inverted dropout: scale survivors by 1/(1-rate) at train time, identity at inference."""

    trainable = False

    def __init__(self, rate, name="dropout"):
        super().__init__(name)
        if not 0.0 <= rate < 1.0:
            raise ShapeError(f"dropout rate {rate} outside [0,1)")
        self.rate = rate

    def forward(self, x, training=False, rng=None):
        if not training or self.rate == 0.0:
            self._mask = None
            return x
        keep = 1.0 - self.rate
        self._mask = (rng.random(x.shape) < keep).astype(x.dtype) / keep
        return x * self._mask

    def backward(self, dy):
        if self._mask is None:
            return dy
        return dy * self._mask


class Flatten(Layer):
    trainable = False

    def __init__(self, name="flatten"):
        super().__init__(name)

    def forward(self, x, training=False, rng=None):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dy):
        return dy.reshape(self._shape)


def dense(x, W, b, activation="none"):
    """Single-vector dense op: act(W x + b) with W of shape (out, in)."""
    if W.shape[1] != x.shape[0]:
        raise ShapeError(f"dense: W {W.shape} incompatible with x {x.shape}")
    z = W @ x + b
    return relu(z) if activation == "relu" else z


def layer_norm(x, gamma, beta, eps=1e-5):
    if not (x.shape == gamma.shape == beta.shape):
        raise ShapeError("layer_norm: shape mismatch")
    return gamma * (x - x.mean()) / np.sqrt(x.var() + eps) + beta


def dropout(x, rate, training, seed=0):
    if not 0.0 <= rate < 1.0:
        raise ShapeError(f"dropout rate {rate} outside [0,1)")
    if not training or rate == 0.0:
        return np.array(x, copy=True)
    keep = 1.0 - rate
    mask = np.random.default_rng(seed).random(x.shape) < keep
    return x * mask / keep


def bilstm_forward(seq, fwd: LstmParams, bwd: LstmParams, return_sequences=True):
    """Reference bidirectional pass over one (T, D) sequence via lstm_cell_step."""
    T = seq.shape[0]
    if T == 0:
        raise ShapeError("bilstm_forward over an empty sequence")
    H = fwd.b_i.shape[0]
    hf = np.zeros((T, H))
    hb = np.zeros((T, H))
    h = np.zeros(H)
    c = np.zeros(H)
    for t in range(T):
        h, c = lstm_cell_step(seq[t], h, c, fwd)
        hf[t] = h
    h = np.zeros(H)
    c = np.zeros(H)
    for t in range(T - 1, -1, -1):
        h, c = lstm_cell_step(seq[t], h, c, bwd)
        hb[t] = h
    if return_sequences:
        return np.concatenate([hf, hb], axis=1)
    return np.concatenate([hf[-1], hb[0]])


# ---------------------------------------------------------------------------
# loss

def softmax(logits):
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_xent(logits, target, l2=0.0, kernels=()):
    """Cross-entropy of one logit vector against a class id, plus l2 * sum ||K||^2
    over the given dense kernels. Returns (loss, probs)."""
    probs = softmax(logits)
    loss = -np.log(probs[target])
    for K in kernels:
        loss += l2 * float(np.sum(K ** 2))
    return float(loss), probs


def batch_softmax_xent(logits, targets):
    """Mean cross-entropy over a batch; returns (data_loss, probs, dlogits)."""
    B = logits.shape[0]
    probs = softmax(logits)
    loss = float(-np.log(probs[np.arange(B), targets] + 1e-300).mean())
    dlogits = probs.copy()
    dlogits[np.arange(B), targets] -= 1.0
    dlogits /= B
    return loss, probs, dlogits


# ---------------------------------------------------------------------------
# optimizer

@dataclass
class AdamState:
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_step(params: dict, grads: dict, state: AdamState) -> AdamState:
    """Standard bias-corrected Adam; updates params in place."""
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    corr1 = 1.0 - b1 ** state.t
    corr2 = 1.0 - b2 ** state.t
    for key, g in grads.items():
        theta = params[key]
        if key not in state.m:
            state.m[key] = np.zeros_like(theta)
            state.v[key] = np.zeros_like(theta)
        m = state.m[key]
        v = state.v[key]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        theta -= state.lr * (m / corr1) / (np.sqrt(v / corr2) + state.eps)
    return state


# ---------------------------------------------------------------------------
# gradient verification

def grad_check(loss_and_grads, params: dict, h=1e-5, samples_per_tensor=6, seed=0):
    """Max relative error between analytic gradients and central differences.

    loss_and_grads() -> (loss, grads dict) evaluated at the current params;
    params arrays are perturbed in place and restored. Use 64-bit params."""
    _, live_grads = loss_and_grads()
    grads = {k: v.copy() for k, v in live_grads.items()}  # later calls overwrite
    rng = np.random.default_rng(seed)
    worst = 0.0
    for key, theta in params.items():
        flat = theta.reshape(-1)
        n = flat.size
        coords = rng.choice(n, size=min(samples_per_tensor, n), replace=False)
        for idx in coords:
            orig = flat[idx]
            flat[idx] = orig + h
            lp, _ = loss_and_grads()
            flat[idx] = orig - h
            lm, _ = loss_and_grads()
            flat[idx] = orig
            if not (np.isfinite(lp) and np.isfinite(lm)):
                raise FloatingPointError("non-finite loss during gradient check")
            numeric = (lp - lm) / (2.0 * h)
            analytic = grads[key].reshape(-1)[idx]
            err = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-12)
            worst = max(worst, err)
    return worst
