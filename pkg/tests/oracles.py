"""Independent reference implementations and frozen expected values.

Everything here is written from the definitions with plain numpy/scipy and
shares no code with the package, so agreement is a real cross-check.
"""
import numpy as np
from scipy import linalg, ndimage

# Worked loss example: class 0 = {0, 2}, class 1 = {4, 6}.
#   means 1 and 5, c = 4, SS_0 = SS_1 = 2, n1 n2 / n = 1
#   eigen-normalized: -(1 * 16) / (2 + 2) = -4
#   literal: unbiased s^2 = 2 per class, -(2*2*16) / (2*2 + 2*2) = -8
WORKED_SCORES = [0.0, 2.0, 4.0, 6.0]
WORKED_LABELS = [0, 0, 1, 1]
WORKED_EIG = -4.0
WORKED_LITERAL = -8.0

# F_beta with beta^2 = 0.3, P = 0.5, R = 1: 1.3 * 0.5 / (0.15 + 1) = 0.65 / 1.15
FBETA_HALF_ONE = 0.65 / 1.15  # 0.565217...

# d = floor(0.02 * hypot(H, W) + 0.5)
#   1024 x 1024: 0.02 * 1448.15 = 28.96 -> 29
#   224 x 224:   0.02 * 316.78 = 6.34  -> 6
BOUNDARY_D = {(1024, 1024): 29, (224, 224): 6}

# 3x3 all-ones mask, one erosion with zero padding leaves the centre only
RING_3X3 = np.array([[1, 1, 1], [1, 0, 1], [1, 1, 1]], dtype=bool)


def scatter_biased(x, labels):
    """(S_W, S_B, S_M) with 1/n normalization, straight from the sums."""
    x = np.asarray(x, dtype=np.float64)
    n, d = x.shape
    m0 = x.mean(0)
    s_w, s_b = np.zeros((d, d)), np.zeros((d, d))
    for k in np.unique(labels):
        xk = x[labels == k]
        mk = xk.mean(0)
        s_w += (xk - mk).T @ (xk - mk)
        s_b += len(xk) * np.outer(mk - m0, mk - m0)
    s_m = (x - m0).T @ (x - m0)
    return s_w / n, s_b / n, s_m / n


def generalized_eigs(s1, s2):
    """Eigenvalues of S2^-1 S1 via scipy's generalized symmetric solver, descending."""
    return linalg.eigh(s1, s2, eigvals_only=True)[::-1]


def binary_lambda1(scores, labels):
    s_w, s_b, _ = scatter_biased(np.asarray(scores, dtype=np.float64)[:, None], np.asarray(labels))
    return float(generalized_eigs(s_b, s_w)[0])


def lda_direction(x, labels):
    """Unit-norm S_W^-1 (mu_1 - mu_0) by a dense numpy solve."""
    s_w, _, _ = scatter_biased(x, labels)
    diff = x[labels == 1].mean(0) - x[labels == 0].mean(0)
    w = np.linalg.solve(s_w, diff)
    return w / np.linalg.norm(w)


def naive_counts(pred, gt):
    tp = fp = fn = 0
    for i in range(pred.shape[0]):
        for j in range(pred.shape[1]):
            p, g = bool(pred[i, j]), bool(gt[i, j])
            tp += p and g
            fp += p and not g
            fn += g and not p
    return tp, fp, fn


def naive_region(pred, gt, beta_sq=0.3):
    tp, fp, fn = naive_counts(pred, gt)
    if tp + fp + fn == 0:
        return 1.0, 1.0, 1.0
    if tp == 0:
        return 0.0, 0.0, 0.0
    p, r = tp / (tp + fp), tp / (tp + fn)
    return tp / (tp + fp + fn), 2 * p * r / (p + r), (1 + beta_sq) * p * r / (beta_sq * p + r)


def pair_auc(scores, gt):
    pos, neg = scores[gt], scores[~gt]
    total = 0.0
    for a in pos:
        for b in neg:
            total += 1.0 if a > b else 0.5 if a == b else 0.0
    return total / (len(pos) * len(neg))


def eroded(m, d):
    return ndimage.binary_erosion(m, structure=np.ones((3, 3)), iterations=d, border_value=0) if d else m
