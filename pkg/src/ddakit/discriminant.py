"""Classical discriminant analysis: class statistics, Fisher/Fukunaga criteria,
scatter matrices and the trace separability criterion.

Two normalization conventions are supported. ``BIASED`` divides class
scatters by ``n_k`` and the mixture scatter by ``n``; under it the mixture
scatter splits exactly as ``S_M = S_W + S_B``. ``UNBIASED`` divides by
``n_k - 1`` and ``n - 1`` and does not satisfy that identity.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import numerics
from .errors import DegenerateClass, NotTwoClass, ZeroWithinScatter

ZERO_TOL = 1e-12


class Convention(str, Enum):
    BIASED = "biased"
    UNBIASED = "unbiased"


class Pair(str, Enum):
    """Scatter-matrix pair ``(S1, S2)`` of the criterion ``tr{S2^-1 S1}``."""

    BW = "BW"
    WM = "WM"
    BM = "BM"


@dataclass(frozen=True)
class SampleSet:
    features: np.ndarray  # (n, d)
    labels: np.ndarray  # (n,) ints in [0, n_classes)
    n_classes: int

    def __post_init__(self):
        x = np.asarray(self.features, dtype=np.float64)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        y = np.asarray(self.labels).astype(np.int64)
        if x.ndim != 2 or y.shape != (x.shape[0],):
            raise ValueError("features must be (n, d) and labels (n,)")
        if x.shape[0] < 2:
            raise ValueError("a SampleSet needs at least 2 samples")
        if y.min() < 0 or y.max() >= self.n_classes:
            raise ValueError("labels out of range")
        if not np.all(np.isfinite(x)):
            raise ValueError("features must be finite")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)

    @classmethod
    def from_arrays(cls, features, labels, n_classes=None):
        labels = np.asarray(labels).astype(np.int64)
        if n_classes is None:
            n_classes = int(labels.max()) + 1
        return cls(features, labels, n_classes)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @property
    def counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)


@dataclass(frozen=True)
class ClassStats:
    means: np.ndarray  # (L, d)
    covariances: np.ndarray  # (L, d, d)
    convention: Convention


@dataclass(frozen=True)
class ScatterSet:
    class_means: np.ndarray  # (L, d)
    mixture_mean: np.ndarray  # (d,)
    s_b: np.ndarray
    s_w: np.ndarray
    s_m: np.ndarray
    convention: Convention
    counts: np.ndarray


@dataclass(frozen=True)
class LinearDiscriminant:
    w: np.ndarray
    w0: float

    def __call__(self, x):
        return project(self, x)


def _divisor(n_k, convention):
    return n_k - 1 if convention == Convention.UNBIASED else n_k


def _check_counts(counts, convention):
    for k, n_k in enumerate(counts):
        if n_k == 0:
            raise DegenerateClass(f"class {k} is empty")
        if convention == Convention.UNBIASED and n_k < 2:
            raise DegenerateClass(f"class {k} has {n_k} sample(s); unbiased needs >= 2")


def class_stats(s: SampleSet, convention=Convention.BIASED) -> ClassStats:
    convention = Convention(convention)
    counts = s.counts
    _check_counts(counts, convention)
    means = np.zeros((s.n_classes, s.dim))
    covs = np.zeros((s.n_classes, s.dim, s.dim))
    for k in range(s.n_classes):
        xk = s.features[s.labels == k]
        means[k] = xk.mean(axis=0)
        dev = xk - means[k]
        covs[k] = dev.T @ dev / _divisor(len(xk), convention)
    return ClassStats(means=means, covariances=covs, convention=convention)


def project(d: LinearDiscriminant, x) -> np.ndarray | float:
    """Affine projection ``w.x + w0``; accepts one vector or an (n, d) array."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != d.w.shape[0]:
        raise ValueError("dimension mismatch between x and w")
    y = x @ d.w + d.w0
    return float(y) if np.ndim(y) == 0 else y


def projected_class_stats(d: LinearDiscriminant, stats: ClassStats):
    """Per-class projected mean ``m_k`` and variance ``s_k^2`` as two arrays."""
    m = stats.means @ d.w + d.w0
    s2 = np.einsum("i,kij,j->k", d.w, stats.covariances, d.w)
    return m, s2


def fisher_criterion(m1, m2, s1_sq, s2_sq) -> float:
    denom = s1_sq + s2_sq
    if denom <= ZERO_TOL:
        raise ZeroWithinScatter("s1^2 + s2^2 is zero")
    return float((m1 - m2) ** 2 / denom)


def fukunaga_criterion(p1, p2, m1, m2, s1_sq, s2_sq) -> float:
    """Prior-weighted criterion; scatter is measured around zero, not the mixture mean."""
    if p1 < 0 or p2 < 0 or p1 + p2 <= 0:
        raise ValueError("priors must be non-negative with a positive sum")
    denom = p1 * s1_sq + p2 * s2_sq
    if denom <= ZERO_TOL:
        raise ZeroWithinScatter("prior-weighted within-class scatter is zero")
    return float((p1 * m1**2 + p2 * m2**2) / denom)


def scatter_matrices(s: SampleSet, convention=Convention.BIASED) -> ScatterSet:
    convention = Convention(convention)
    counts = s.counts
    _check_counts(counts, convention)
    n, dim = s.n, s.dim
    means = np.zeros((s.n_classes, dim))
    s_w = np.zeros((dim, dim))
    for k in range(s.n_classes):
        xk = s.features[s.labels == k]
        means[k] = xk.mean(axis=0)
        dev = xk - means[k]
        s_w += (counts[k] / n) * (dev.T @ dev) / _divisor(counts[k], convention)
    priors = counts / n
    m0 = priors @ means
    u = means - m0
    s_b = (u.T * priors) @ u
    dev = s.features - m0
    s_m = dev.T @ dev / (n - 1 if convention == Convention.UNBIASED else n)
    return ScatterSet(
        class_means=means,
        mixture_mean=m0,
        s_b=0.5 * (s_b + s_b.T),
        s_w=0.5 * (s_w + s_w.T),
        s_m=0.5 * (s_m + s_m.T),
        convention=convention,
        counts=counts,
    )


def default_ridge(s_w) -> float:
    s_w = np.asarray(s_w)
    return 1e-8 * numerics.trace(s_w) / s_w.shape[0]


def trace_criterion(ss: ScatterSet, pair=Pair.BW, ridge: float = 0.0):
    """``tr{(S2 + ridge I)^-1 S1}`` and the eigenvalues of that product.

    The eigenvalues come from the symmetric whitened matrix
    ``S2^-1/2 S1 S2^-1/2``, which shares the spectrum of ``S2^-1 S1``.
    Returns ``(j, eigvals)`` with eigvals in descending order.
    """
    if ridge < 0:
        raise ValueError("ridge must be non-negative")
    s1, s2 = {
        Pair.BW: (ss.s_b, ss.s_w),
        Pair.WM: (ss.s_w, ss.s_m),
        Pair.BM: (ss.s_b, ss.s_m),
    }[Pair(pair)]
    s2 = s2 + ridge * np.eye(s2.shape[0])
    j = numerics.trace(numerics.solve_spd(s2, s1))
    whiten = numerics.inv_sqrt_spd(s2)
    eigvals = numerics.sym_eig(whiten @ s1 @ whiten).values
    return j, eigvals


def fit_lda(s: SampleSet, ridge: float | None = None) -> LinearDiscriminant:
    """Two-class Fisher discriminant.

    Class 1 plays the role of the "first" class: ``w`` points from the class-0
    mean towards the class-1 mean, and ``w0`` puts the projected-means midpoint
    at zero, so ``project(d, x) > 0`` predicts class 1. ``ridge=None`` uses
    ``default_ridge(S_W)``.
    """
    if s.n_classes != 2:
        raise NotTwoClass(f"fit_lda needs exactly 2 classes, got {s.n_classes}")
    ss = scatter_matrices(s, Convention.BIASED)
    if ridge is None:
        ridge = default_ridge(ss.s_w)
    delta = ss.class_means[1] - ss.class_means[0]
    w = numerics.solve_spd(ss.s_w + ridge * np.eye(s.dim), delta)
    norm = np.linalg.norm(w)
    if norm == 0.0:
        w = np.zeros(s.dim)
        w[0] = 1.0
    else:
        w = w / norm
    if w @ delta < 0:
        w = -w
    w0 = -0.5 * float(w @ (ss.class_means[0] + ss.class_means[1]))
    return LinearDiscriminant(w=w, w0=w0)


def accuracy(d: LinearDiscriminant, s: SampleSet) -> float:
    pred = (project(d, s.features) > 0).astype(np.int64)
    return float(np.mean(pred == s.labels))


def best_threshold_accuracy(y, labels) -> float:
    """Best accuracy of any single cut on the 1-D scores ``y``, either orientation."""
    y = np.asarray(y, dtype=np.float64)
    labels = np.asarray(labels)
    order = np.argsort(y, kind="stable")
    ys, ls = y[order], labels[order]
    n = len(ys)
    ones_below = np.concatenate([[0], np.cumsum(ls == 1)])
    zeros_below = np.concatenate([[0], np.cumsum(ls == 0)])
    # only cut between distinct values
    cuts = [0] + [i for i in range(1, n) if ys[i] != ys[i - 1]] + [n]
    cuts = np.asarray(cuts)
    total_ones = ones_below[-1]
    # predict 1 above the cut
    acc_up = zeros_below[cuts] + (total_ones - ones_below[cuts])
    acc_down = n - acc_up
    return float(max(acc_up.max(), acc_down.max()) / n)
