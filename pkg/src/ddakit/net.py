"""A small fully connected per-pixel scorer with manual backprop and AdamW.

Layers compute ``act(h @ W + b)`` with ``W`` of shape (fan_in, fan_out).
The network output is never squashed: DDA consumes raw scores and the
baseline losses apply their own sigmoid.
"""
import json
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from . import loss as losses
from .errors import AllBatchesSkipped, BadCheckpoint
from .synthdata import make_rng

CHECKPOINT_FORMAT = "ddakit-net/1"


class Activation(str, Enum):
    RELU = "relu"
    TANH = "tanh"
    IDENTITY = "identity"


class LossKind(str, Enum):
    DDA = "dda"
    BCE = "bce"
    DICE = "dice"


@dataclass
class Layer:
    weights: np.ndarray
    biases: np.ndarray
    activation: Activation = Activation.IDENTITY


@dataclass
class NetState:
    layers: list
    m: list = field(default_factory=list)  # AdamW first moments, [dW, db] per layer
    v: list = field(default_factory=list)
    step: int = 0

    def __post_init__(self):
        for a, b in zip(self.layers, self.layers[1:]):
            if a.weights.shape[1] != b.weights.shape[0]:
                raise ValueError("layer dimensions do not chain")
        if not self.m:
            self.m = [[np.zeros_like(l.weights), np.zeros_like(l.biases)] for l in self.layers]
            self.v = [[np.zeros_like(l.weights), np.zeros_like(l.biases)] for l in self.layers]

    @property
    def in_dim(self) -> int:
        return self.layers[0].weights.shape[0]

    @property
    def out_dim(self) -> int:
        return self.layers[-1].weights.shape[1]

    def params(self):
        return [[l.weights, l.biases] for l in self.layers]

    def copy(self) -> "NetState":
        return NetState(
            layers=[Layer(l.weights.copy(), l.biases.copy(), l.activation) for l in self.layers],
            m=[[a.copy() for a in pair] for pair in self.m],
            v=[[a.copy() for a in pair] for pair in self.v],
            step=self.step,
        )


@dataclass
class TrainConfig:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    weight_decay: float = 0.01
    eps: float = 1e-8
    epochs: int = 100
    batch_size: int = 64
    seed: int = 0
    loss_kind: LossKind = LossKind.DDA
    dda_variant: losses.Variant = losses.Variant.EIG
    dda_eps: float = 1e-8
    patience: int = 20

    def __post_init__(self):
        self.loss_kind = LossKind(self.loss_kind)
        self.dda_variant = losses.Variant(self.dda_variant)
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("betas must lie in [0, 1)")
        if self.lr < 0 or self.eps <= 0:
            raise ValueError("lr must be >= 0 and eps > 0")
        if self.batch_size < 1 or self.epochs < 0:
            raise ValueError("batch_size must be >= 1 and epochs >= 0")


def init_net(sizes, activation=Activation.RELU, seed: int = 0) -> NetState:
    """Glorot-uniform weights, zero biases; the last layer is linear."""
    rng = make_rng(seed, 7)
    layers = []
    for i, (fan_in, fan_out) in enumerate(zip(sizes, sizes[1:])):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        w = rng.uniform(-limit, limit, (fan_in, fan_out))
        act = Activation.IDENTITY if i == len(sizes) - 2 else Activation(activation)
        layers.append(Layer(w, np.zeros(fan_out), act))
    return NetState(layers)


def _act(z, kind):
    if kind == Activation.RELU:
        return np.maximum(z, 0.0)
    if kind == Activation.TANH:
        return np.tanh(z)
    return z


def _act_grad(z, a, kind):
    if kind == Activation.RELU:
        return (z > 0).astype(np.float64)
    if kind == Activation.TANH:
        return 1.0 - a * a
    return np.ones_like(z)


def forward(net: NetState, inputs):
    """Returns ``(outputs, cache)``; outputs are (n, out_dim)."""
    h = np.asarray(inputs, dtype=np.float64)
    if h.ndim == 1:
        h = h[None, :]
    if h.shape[1] != net.in_dim:
        raise ValueError(f"expected {net.in_dim} input features, got {h.shape[1]}")
    cache = []
    for layer in net.layers:
        z = h @ layer.weights + layer.biases
        a = _act(z, layer.activation)
        cache.append((h, z, a))
        h = a
    return h, cache


def predict(net: NetState, inputs) -> np.ndarray:
    out, _ = forward(net, inputs)
    return out[:, 0] if net.out_dim == 1 else out


def backward(net: NetState, cache, upstream):
    """Parameter gradients ``[[dW, db], ...]`` given d(loss)/d(outputs)."""
    g = np.asarray(upstream, dtype=np.float64)
    if g.ndim == 1:
        g = g[:, None]
    grads = [None] * len(net.layers)
    for i in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[i]
        h, z, a = cache[i]
        dz = g * _act_grad(z, a, layer.activation)
        grads[i] = [h.T @ dz, dz.sum(axis=0)]
        g = dz @ layer.weights.T
    return grads


def adamw_step(net: NetState, grads, cfg: TrainConfig) -> NetState:
    """One decoupled-weight-decay Adam update, applied in place; returns ``net``."""
    net.step += 1
    t = net.step
    bc1 = 1.0 - cfg.beta1**t
    bc2 = 1.0 - cfg.beta2**t
    for layer, g_pair, m_pair, v_pair in zip(net.layers, grads, net.m, net.v):
        for j, (param, g) in enumerate(zip((layer.weights, layer.biases), g_pair)):
            m_pair[j] = cfg.beta1 * m_pair[j] + (1 - cfg.beta1) * g
            v_pair[j] = cfg.beta2 * v_pair[j] + (1 - cfg.beta2) * g * g
            update = (m_pair[j] / bc1) / (np.sqrt(v_pair[j] / bc2) + cfg.eps)
            param -= cfg.lr * update + cfg.lr * cfg.weight_decay * param
    return net


def evaluate_loss(scores, labels, cfg: TrainConfig) -> losses.LossEval:
    scores = np.asarray(scores)
    if cfg.loss_kind == LossKind.DDA:
        if scores.ndim == 2 and scores.shape[1] == 1:
            scores = scores[:, 0]
        if scores.ndim == 1:
            return losses.dda_binary(scores, labels, cfg.dda_variant, cfg.dda_eps)
        return losses.dda_multiclass(scores, labels, ridge=max(cfg.dda_eps, 1e-12))
    fn = losses.bce if cfg.loss_kind == LossKind.BCE else losses.dice
    return fn(scores.reshape(-1), labels)


def loss_and_grads(net: NetState, x, y, cfg: TrainConfig):
    out, cache = forward(net, x)
    ev = evaluate_loss(out, y, cfg)
    g = ev.grads.reshape(out.shape)
    return ev, backward(net, cache, g)


def orient(net: NetState, x, y) -> NetState:
    """Flip a 1-output net so class-1 samples score higher than class-0 on average.

    DDA is symmetric in the class labels, so training may settle on either
    sign; flipping the last layer leaves the loss unchanged.
    """
    if net.out_dim != 1:
        return net
    s = predict(net, x)
    y = np.asarray(y)
    if (y == 1).any() and (y == 0).any() and s[y == 1].mean() < s[y == 0].mean():
        last = net.layers[-1]
        last.weights *= -1
        last.biases *= -1
        net.m[-1] = [-a for a in net.m[-1]]
    return net


def _batches(n_units, batch_size, rng):
    order = rng.permutation(n_units)
    return [order[i : i + batch_size] for i in range(0, n_units, batch_size)]


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    skipped_batches: int


def train(net: NetState, x, y, cfg: TrainConfig, groups=None, val=None):
    """Mini-batch training with AdamW and early stopping on ``val`` loss.

    ``groups`` assigns each sample to a unit (an image): batches then hold
    ``batch_size`` whole units, and DDA statistics pool every pixel of the
    batch. Without ``groups`` each sample is its own unit. ``val`` is an
    optional ``(x_val, y_val)`` pair.

    Returns ``(net, trace)``; ``trace[0]`` is the loss at initialisation and
    each later record is the full-training-set loss after that epoch. The
    returned net is the best-validation snapshot when ``val`` is given.
    DDA-trained single-output nets are oriented so the foreground scores
    high.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    net = net.copy()
    rng = make_rng(cfg.seed, 11)
    if groups is None:
        unit_index = [np.array([i]) for i in range(len(x))]
    else:
        groups = np.asarray(groups)
        keys = np.unique(groups)
        unit_index = [np.flatnonzero(groups == k) for k in keys]

    def full_loss(xx, yy):
        return evaluate_loss(predict(net, xx), yy, cfg).value

    val_loss = full_loss(*val) if val is not None else float("nan")
    trace = [EpochRecord(0, full_loss(x, y), val_loss, 0)]
    best_val, best_net, stale = val_loss, net.copy(), 0
    any_used = False
    for epoch in range(1, cfg.epochs + 1):
        skipped = 0
        for units in _batches(len(unit_index), cfg.batch_size, rng):
            idx = np.concatenate([unit_index[u] for u in units])
            ev, grads = loss_and_grads(net, x[idx], y[idx], cfg)
            if ev.skipped:
                skipped += 1
                continue
            any_used = True
            adamw_step(net, grads, cfg)
        if not any_used:
            raise AllBatchesSkipped("no mini-batch contained both classes")
        val_loss = full_loss(*val) if val is not None else float("nan")
        trace.append(EpochRecord(epoch, full_loss(x, y), val_loss, skipped))
        if val is not None:
            if val_loss < best_val:
                best_val, best_net, stale = val_loss, net.copy(), 0
            else:
                stale += 1
                if stale >= cfg.patience:
                    break
    if val is not None:
        net = best_net
    if cfg.loss_kind == LossKind.DDA:
        orient(net, x, y)
    return net, trace


# --- checkpoints ----------------------------------------------------------

def _arr(a):
    return {"shape": list(a.shape), "data": [float(v) for v in a.ravel()]}


def _unarr(d):
    return np.array(d["data"], dtype=np.float64).reshape(d["shape"])


def save_checkpoint(path, net: NetState, meta: dict | None = None) -> None:
    """JSON dump of shapes, parameters, AdamW moments and step; floats round-trip exactly."""
    doc = {
        "format": CHECKPOINT_FORMAT,
        "step": net.step,
        "layers": [
            {
                "activation": l.activation.value,
                "weights": _arr(l.weights),
                "biases": _arr(l.biases),
                "m": [_arr(a) for a in m],
                "v": [_arr(a) for a in v],
            }
            for l, m, v in zip(net.layers, net.m, net.v)
        ],
        "meta": meta or {},
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_checkpoint(path):
    """Returns ``(net, meta)``."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise BadCheckpoint(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict) or doc.get("format") != CHECKPOINT_FORMAT:
        fmt = doc.get("format") if isinstance(doc, dict) else None
        raise BadCheckpoint(f"unsupported checkpoint format {fmt!r}")
    try:
        layers, ms, vs = [], [], []
        for d in doc["layers"]:
            layers.append(Layer(_unarr(d["weights"]), _unarr(d["biases"]), Activation(d["activation"])))
            ms.append([_unarr(a) for a in d["m"]])
            vs.append([_unarr(a) for a in d["v"]])
        return NetState(layers, ms, vs, int(doc["step"])), doc.get("meta", {})
    except (KeyError, TypeError, ValueError) as exc:
        raise BadCheckpoint(f"{path}: malformed checkpoint ({exc})") from exc


def config_dict(cfg: TrainConfig) -> dict:
    d = asdict(cfg)
    d["loss_kind"] = cfg.loss_kind.value
    d["dda_variant"] = cfg.dda_variant.value
    return d


# --- per-pixel features ---------------------------------------------------

N_PIXEL_FEATURES = 11


def pixel_features(image) -> np.ndarray:
    """(H*W, 11) features: normalized row, column, intensity, 8 neighbour intensities.

    Neighbours outside the image repeat the nearest edge pixel.
    """
    img = np.asarray(image, dtype=np.float64)
    h, w = img.shape
    rows, cols = np.mgrid[0:h, 0:w]
    feats = [rows / max(h - 1, 1), cols / max(w - 1, 1), img]
    p = np.pad(img, 1, mode="edge")
    for dy in range(3):
        for dx in range(3):
            if dy == 1 and dx == 1:
                continue
            feats.append(p[dy : dy + h, dx : dx + w])
    return np.stack([f.ravel() for f in feats], axis=1)


def image_dataset(images):
    """Stack per-pixel features of SynthImages; returns ``(x, y, groups)``."""
    xs, ys, gs = [], [], []
    for i, im in enumerate(images):
        xs.append(pixel_features(im.image))
        ys.append(np.asarray(im.mask).ravel().astype(np.int64))
        gs.append(np.full(im.mask.size, i))
    return np.vstack(xs), np.concatenate(ys), np.concatenate(gs)
