"""Training objectives with closed-form per-sample gradients.

Every loss returns a ``LossEval`` whose ``grads`` has the shape of the raw
scores it was given. DDA losses consume raw network outputs; BCE and Dice
apply a sigmoid internally.

Class convention for the binary DDA loss: label 1 is "class 1" (foreground),
label 0 is "class 2". The value only depends on ``(m1 - m2)^2`` so the
choice is cosmetic.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import expit

from . import numerics


class Variant(str, Enum):
    EIG = "eig"  # -(n1 n2 / n) c^2 / (SS1 + SS2 + eps) == -lambda_1
    LITERAL = "literal"  # -n1 n2 c^2 / (n1 s1^2 + n2 s2^2 + eps), unbiased s_k^2


@dataclass
class LossEval:
    value: float
    grads: np.ndarray
    skipped: bool = False


def _skip(scores):
    return LossEval(0.0, np.zeros_like(scores, dtype=np.float64), skipped=True)


def dda_binary(scores, labels, variant=Variant.EIG, eps: float = 1e-8) -> LossEval:
    """Closed-form two-class DDA loss on one scalar score per sample.

    A batch holding a single class is skipped (zero value, zero gradient).
    """
    variant = Variant(variant)
    y = np.asarray(scores, dtype=np.float64)
    t = np.asarray(labels)
    if y.shape != t.shape or y.ndim != 1:
        raise ValueError("scores and labels must be 1-D arrays of equal length")
    if eps < 0:
        raise ValueError("eps must be non-negative")
    fg = t == 1
    bg = ~fg
    n1, n2 = int(fg.sum()), int(bg.sum())
    if n1 == 0 or n2 == 0:
        return _skip(y)
    n = n1 + n2
    m1, m2 = y[fg].mean(), y[bg].mean()
    c = m1 - m2
    dev = np.where(fg, y - m1, y - m2)
    ss1 = float(np.sum(dev[fg] ** 2))
    ss2 = float(np.sum(dev[bg] ** 2))

    # d c / d y_i is 1/n1 on class 1 and -1/n2 on class 2
    dc = np.where(fg, 1.0 / n1, -1.0 / n2)
    if variant == Variant.EIG:
        num = n1 * n2 / n * c * c
        dnum = 2.0 * n1 * n2 / n * c * dc
        den = ss1 + ss2 + eps
        dden = 2.0 * dev
    else:
        num = n1 * n2 * c * c
        dnum = 2.0 * n1 * n2 * c * dc
        # n_k s_k^2 = n_k SS_k / (n_k - 1); a singleton class has zero scatter
        w1 = n1 / (n1 - 1) if n1 > 1 else 0.0
        w2 = n2 / (n2 - 1) if n2 > 1 else 0.0
        den = w1 * ss1 + w2 * ss2 + eps
        dden = 2.0 * dev * np.where(fg, w1, w2)
    if den <= 0.0:
        # zero within-class scatter with eps=0: the ratio is undefined
        if num == 0.0:
            return LossEval(0.0, np.zeros_like(y))
        raise ZeroDivisionError("zero within-class scatter with eps=0")
    value = -num / den
    grads = -(dnum + value * dden) / den
    return LossEval(float(value), grads)


def dda_multiclass(scores, labels, ridge: float = 1e-8) -> LossEval:
    """``-tr{(S_W + ridge I)^-1 S_B}`` over the classes present in the batch.

    ``scores`` is (n, k). Scatter matrices use the biased convention, so for
    two classes and k = 1 this equals ``dda_binary(variant=EIG, eps=n*ridge)``.
    """
    y = np.asarray(scores, dtype=np.float64)
    squeeze = y.ndim == 1
    if squeeze:
        y = y[:, None]
    t = np.asarray(labels)
    if y.shape[0] != t.shape[0]:
        raise ValueError("scores and labels must have the same length")
    if ridge <= 0:
        raise ValueError("ridge must be positive")
    present = np.unique(t)
    if len(present) < 2:
        return _skip(np.asarray(scores, dtype=np.float64))
    n, k = y.shape
    idx = np.searchsorted(present, t)
    counts = np.bincount(idx, minlength=len(present)).astype(np.float64)
    means = np.zeros((len(present), k))
    np.add.at(means, idx, y)
    means /= counts[:, None]
    m0 = (counts / n) @ means
    u = means - m0
    s_b = (u.T * (counts / n)) @ u
    dev = y - means[idx]
    s_w = dev.T @ dev / n
    a = s_w + ridge * np.eye(k)
    g = numerics.solve_spd(a, np.eye(k))
    g = 0.5 * (g + g.T)
    j = float(np.sum(g * s_b))
    p_w = g @ s_b @ g
    # dJ/dy_i = (2/n) [G u_k(i) - G S_B G (y_i - m_k(i))]
    dj = (2.0 / n) * (u[idx] @ g - dev @ p_w)
    grads = -dj
    return LossEval(-j, grads[:, 0] if squeeze else grads)


def _targets(targets, n):
    t = np.asarray(targets, dtype=np.float64)
    if t.shape != (n,) and t.shape != ():
        raise ValueError("targets must match scores")
    if not np.all((t == 0) | (t == 1)):
        raise ValueError("targets must be binary")
    return t


def bce(scores, targets) -> LossEval:
    """Mean binary cross-entropy on sigmoid(scores); gradient w.r.t. raw scores."""
    s = np.asarray(scores, dtype=np.float64)
    t = _targets(targets, s.size).reshape(s.shape)
    p = expit(s)
    pc = np.clip(p, 1e-7, 1 - 1e-7)
    value = -np.mean(t * np.log(pc) + (1 - t) * np.log(1 - pc))
    return LossEval(float(value), (p - t) / s.size)


def dice(scores, targets, smooth: float = 1.0) -> LossEval:
    """Soft Dice loss ``1 - (2 sum p t + smooth) / (sum p + sum t + smooth)``."""
    s = np.asarray(scores, dtype=np.float64)
    t = _targets(targets, s.size).reshape(s.shape)
    p = expit(s)
    inter = 2.0 * np.sum(p * t) + smooth
    union = np.sum(p) + np.sum(t) + smooth
    value = 1.0 - inter / union
    dp = -(2.0 * t * union - inter) / (union * union)
    return LossEval(float(value), dp * p * (1.0 - p))
