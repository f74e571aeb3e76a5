"""Desk-scale experiments shared by the CLI, scripts and acceptance tests."""
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from . import discriminant as da
from . import net as nn
from . import segmetrics as sm
from . import synthdata as sd


def midpoint_accuracy(scores, labels) -> float:
    """Accuracy of ``score > midpoint of class means`` (class 1 above)."""
    scores = np.asarray(scores)
    labels = np.asarray(labels)
    m1, m0 = scores[labels == 1].mean(), scores[labels == 0].mean()
    pred = (scores > 0.5 * (m0 + m1)).astype(np.int64)
    if m1 < m0:
        pred = 1 - pred
    return float(np.mean(pred == labels))


def lda_regime(s: da.SampleSet, ridge=None) -> dict:
    d = da.fit_lda(s, ridge)
    y = da.project(d, s.features)
    stats = da.class_stats(s, da.Convention.BIASED)
    m, s2 = da.projected_class_stats(d, stats)
    return {
        "lda": d,
        "projected": y,
        "accuracy": da.accuracy(d, s),
        "best_cut_accuracy": da.best_threshold_accuracy(y, s.labels),
        "fisher": da.fisher_criterion(m[1], m[0], s2[1], s2[0]),
    }


RING_NET = dict(hidden=32, activation="tanh", lr=1e-3, epochs=200, batch_size=100)


def train_ring_net(s: da.SampleSet, seed: int = 0, **overrides):
    p = {**RING_NET, **overrides}
    net = nn.init_net([s.dim, p["hidden"], 1], p["activation"], seed=seed)
    cfg = nn.TrainConfig(lr=p["lr"], epochs=p["epochs"], batch_size=p["batch_size"], seed=seed)
    net, trace = nn.train(net, s.features, s.labels, cfg)
    acc = midpoint_accuracy(nn.predict(net, s.features), s.labels)
    return net, trace, acc


def run_lda_demo(seed: int = 0, n: int = 500, train_net: bool = True) -> dict:
    sep = sd.separable_blobs(seed, n)
    ring = sd.inseparable_rings(seed, n)
    out = {"separable": (sep, lda_regime(sep)), "inseparable": (ring, lda_regime(ring))}
    if train_net:
        net, trace, acc = train_ring_net(ring, seed)
        out["ring_net"] = {"net": net, "trace": trace, "accuracy": acc}
    return out


# --- paired segmentation experiment ---------------------------------------

@dataclass
class SegConfig:
    n_train: int = 64
    n_test: int = 16
    size: int = 32
    noise: float = 0.1
    hidden: int = 32
    activation: str = "tanh"
    lr: float = 1e-3
    epochs: int = 100
    batch_size: int = 4  # images per mini-batch
    bins: int = 20
    grid: int = 256


def model_scores(net, x, kind) -> np.ndarray:
    """Score map used for thresholding: raw output for DDA, sigmoid output otherwise."""
    s = nn.predict(net, x)
    return s if nn.LossKind(kind) == nn.LossKind.DDA else expit(s)


def train_seg_model(seed: int, kind, cfg: SegConfig, train_images=None):
    if train_images is None:
        train_images = sd.synth_segmentation_set(seed, cfg.n_train, cfg.size, cfg.noise, "train")
    x, y, g = nn.image_dataset(train_images)
    net = nn.init_net([nn.N_PIXEL_FEATURES, cfg.hidden, 1], cfg.activation, seed=seed)
    tcfg = nn.TrainConfig(lr=cfg.lr, epochs=cfg.epochs, batch_size=cfg.batch_size,
                          seed=seed, loss_kind=kind)
    return nn.train(net, x, y, tcfg, groups=g)


def separation_report(scores, gt, cfg: SegConfig) -> dict:
    gt = np.asarray(gt).astype(bool)
    hist = sm.score_histogram(scores, gt, cfg.bins)
    out = {"histogram": hist, "overlap": hist.overlap, "separability": hist.separability()}
    for obj in ("iou", "f1", "fbeta"):
        out[f"theta_{obj}"] = sm.threshold_sweep(scores, gt, obj, cfg.grid).theta_star
    return out


def run_paired_seed(seed: int, cfg: SegConfig | None = None) -> dict:
    """Train DDA and BCE models on the same data and compare held-out separation."""
    cfg = cfg or SegConfig()
    train_images = sd.synth_segmentation_set(seed, cfg.n_train, cfg.size, cfg.noise, "train")
    test_images = sd.synth_segmentation_set(seed, cfg.n_test, cfg.size, cfg.noise, "test")
    xt, yt, _ = nn.image_dataset(test_images)
    result = {"seed": seed}
    for kind in ("dda", "bce"):
        net, trace = train_seg_model(seed, kind, cfg, train_images)
        rep = separation_report(model_scores(net, xt, kind), yt, cfg)
        rep["initial_loss"] = trace[0].train_loss
        rep["final_loss"] = trace[-1].train_loss
        result[kind] = rep
    return result
