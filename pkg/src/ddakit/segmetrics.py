"""Binary segmentation metrics: region and boundary IoU/F1/F-beta, ROC AUC,
threshold sweeps and class-conditional score histograms.

Masks are 2-D arrays with entries in {0, 1} (bool works too); score maps are
2-D float arrays of the same shape.
"""
import csv
import math
from dataclasses import astuple, dataclass, fields

import numpy as np
from scipy.special import expit
from scipy.stats import rankdata

from .errors import OneClassOnly, ShapeMismatch

BETA_SQ = 0.3
CSV_COLUMNS = ["name", "iou", "f1", "fbeta", "auc", "biou", "bf1", "bfbeta", "theta", "d"]


@dataclass
class MetricReport:
    iou: float
    f1: float
    f_beta: float
    auc: float
    b_iou: float
    b_f1: float
    b_f_beta: float
    threshold_used: float
    boundary_iterations: int


def as_mask(m) -> np.ndarray:
    m = np.asarray(m)
    if m.dtype != bool:
        if not np.all((m == 0) | (m == 1)):
            raise ValueError("mask entries must be 0 or 1")
        m = m.astype(bool)
    return m


def _same_shape(a, b):
    if a.shape != b.shape:
        raise ShapeMismatch(f"shape mismatch: {a.shape} vs {b.shape}")


def boundary_iterations(height: int, width: int) -> int:
    """Erosion count ``round(0.02 * diagonal)`` (half rounds up), at least 1."""
    if height < 1 or width < 1:
        raise ValueError("image dimensions must be positive")
    return max(1, math.floor(0.02 * math.hypot(height, width) + 0.5))


def erode(m, iterations: int = 1) -> np.ndarray:
    """Binary erosion with the full 3x3 element; outside pixels count as background."""
    m = as_mask(m)
    h, w = m.shape
    for _ in range(iterations):
        if not m.any():
            break
        p = np.pad(m, 1, constant_values=False)
        out = np.ones_like(m)
        for dy in range(3):
            for dx in range(3):
                out &= p[dy : dy + h, dx : dx + w]
        m = out
    return m


def boundary_mask(m, iterations: int | None = None) -> np.ndarray:
    """``M AND NOT erode^d(M)`` with d from ``boundary_iterations`` unless given."""
    m = as_mask(m)
    if iterations is None:
        iterations = boundary_iterations(*m.shape)
    return m & ~erode(m, iterations)


def confusion_counts(pred, gt):
    pred, gt = as_mask(pred), as_mask(gt)
    _same_shape(pred, gt)
    tp = int(np.count_nonzero(pred & gt))
    fp = int(np.count_nonzero(pred & ~gt))
    fn = int(np.count_nonzero(~pred & gt))
    return tp, fp, fn


def metrics_from_counts(tp, fp, fn, beta_sq=BETA_SQ):
    if tp + fp + fn == 0:
        return 1.0, 1.0, 1.0
    if tp == 0:
        return 0.0, 0.0, 0.0
    iou = tp / (tp + fp + fn)
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    f1 = 2 * precision * recall / (precision + recall)
    f_beta = f_measure(precision, recall, beta_sq)
    return iou, f1, f_beta


def f_measure(precision, recall, beta_sq=BETA_SQ):
    if beta_sq <= 0:
        raise ValueError("beta_sq must be positive")
    denom = beta_sq * precision + recall
    if denom == 0:
        return 0.0
    return (1 + beta_sq) * precision * recall / denom


def region_metrics(pred, gt, beta_sq: float = BETA_SQ):
    """``(iou, f1, f_beta)`` from pixel counts.

    Two empty masks score 1 on everything; exactly one empty mask scores 0.
    """
    return metrics_from_counts(*confusion_counts(pred, gt), beta_sq=beta_sq)


def boundary_metrics(pred, gt, beta_sq: float = BETA_SQ, iterations: int | None = None):
    pred, gt = as_mask(pred), as_mask(gt)
    _same_shape(pred, gt)
    return region_metrics(boundary_mask(pred, iterations), boundary_mask(gt, iterations), beta_sq)


def auc(scores, gt) -> float:
    """ROC area as the Mann-Whitney rank statistic (ties count one half)."""
    s = np.asarray(scores, dtype=np.float64).ravel()
    g = as_mask(gt).ravel()
    if s.shape != g.shape:
        raise ShapeMismatch("scores and mask differ in size")
    n_pos = int(g.sum())
    n_neg = g.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise OneClassOnly("AUC needs both foreground and background pixels")
    ranks = rankdata(s)
    u = ranks[g].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def normalize(scores, method: str = "minmax"):
    """Map scores to [0, 1]. Returns ``(normalized, constant_flag)``.

    A constant map under min-max normalization becomes all 0.5.
    """
    s = np.asarray(scores, dtype=np.float64)
    if method == "sigmoid":
        return expit(s), bool(np.ptp(s) == 0)
    if method != "minmax":
        raise ValueError(f"unknown normalization {method!r}")
    lo, hi = float(s.min()), float(s.max())
    if hi == lo:
        return np.full_like(s, 0.5), True
    return (s - lo) / (hi - lo), False


_OBJECTIVES = {"iou": 0, "f1": 1, "fbeta": 2}


@dataclass
class Sweep:
    theta_star: float
    curve: np.ndarray  # (grid, 2): theta, objective
    constant: bool = False


def threshold_sweep(scores, gt, objective: str = "fbeta", grid: int = 256,
                    norm: str = "minmax", beta_sq: float = BETA_SQ) -> Sweep:
    """Sweep ``pred = normalized >= theta`` over a uniform grid on [0, 1].

    ``theta_star`` is the lowest grid value reaching the maximum objective.
    """
    if grid < 2:
        raise ValueError("grid must have at least 2 points")
    col = _OBJECTIVES[objective.lower().replace("_", "")]
    gt = as_mask(gt)
    s, constant = normalize(scores, norm)
    _same_shape(s, gt)
    thetas = np.linspace(0.0, 1.0, grid)
    values = np.array([region_metrics(s >= th, gt, beta_sq)[col] for th in thetas])
    if constant:
        return Sweep(0.5, np.column_stack([thetas, values]), constant=True)
    best = int(np.argmax(values))  # first index of the maximum
    return Sweep(float(thetas[best]), np.column_stack([thetas, values]))


@dataclass
class Histogram:
    edges: np.ndarray
    fg_counts: np.ndarray
    bg_counts: np.ndarray
    fg_mean: float
    bg_mean: float
    fg_var: float
    bg_var: float
    overlap: float

    @property
    def n_fg(self) -> int:
        return int(self.fg_counts.sum())

    @property
    def n_bg(self) -> int:
        return int(self.bg_counts.sum())

    def separability(self) -> float:
        """``(n1 n2 / n) gap^2 / pooled SS``: the negated binary DDA value.

        Zero pooled scatter gives ``inf`` (perfect separation), or 0 when the
        means also coincide.
        """
        n1, n2 = self.n_fg, self.n_bg
        pooled = n1 * self.fg_var + n2 * self.bg_var
        gap = self.fg_mean - self.bg_mean
        if pooled == 0.0:
            return float("inf") if gap != 0.0 else 0.0
        return n1 * n2 / (n1 + n2) * gap * gap / pooled


def score_histogram(scores, gt, bins: int = 20, norm: str = "minmax") -> Histogram:
    """Foreground/background histograms of normalized scores plus summary stats.

    Means and (biased) variances are of the normalized scores. The overlap
    coefficient is ``sum_b min(fg_b / n_fg, bg_b / n_bg)``.
    """
    if bins < 2:
        raise ValueError("bins must be at least 2")
    gt = as_mask(gt)
    s, _ = normalize(scores, norm)
    _same_shape(s, gt)
    fg, bg = s[gt], s[~gt]
    if fg.size == 0 or bg.size == 0:
        raise OneClassOnly("histogram needs both classes")
    edges = np.linspace(0.0, 1.0, bins + 1)
    fg_counts = np.histogram(fg, bins=edges)[0]
    bg_counts = np.histogram(bg, bins=edges)[0]
    overlap = float(np.minimum(fg_counts / fg.size, bg_counts / bg.size).sum())
    return Histogram(
        edges=edges,
        fg_counts=fg_counts,
        bg_counts=bg_counts,
        fg_mean=float(fg.mean()),
        bg_mean=float(bg.mean()),
        fg_var=float(fg.var()),
        bg_var=float(bg.var()),
        overlap=overlap,
    )


def evaluate(scores, gt, threshold: float = 0.5, norm: str = "minmax",
             beta_sq: float = BETA_SQ) -> MetricReport:
    """Full report for one image: region, boundary and AUC metrics at ``threshold``."""
    gt = as_mask(gt)
    s, _ = normalize(scores, norm)
    _same_shape(s, gt)
    pred = s >= threshold
    d = boundary_iterations(*gt.shape)
    iou, f1, fb = region_metrics(pred, gt, beta_sq)
    biou, bf1, bfb = boundary_metrics(pred, gt, beta_sq, d)
    return MetricReport(iou, f1, fb, auc(s, gt), biou, bf1, bfb, threshold, d)


def mean_report(reports) -> MetricReport:
    rows = np.array([astuple(r) for r in reports], dtype=np.float64)
    avg = rows.mean(axis=0)
    out = MetricReport(*avg)
    out.boundary_iterations = int(round(avg[-1]))
    return out


def _fmt(x):
    return repr(float(x)) if not isinstance(x, (int, np.integer)) else str(int(x))


def write_report_csv(path, named_reports):
    """One row per ``(name, report)`` plus a trailing ``MEAN`` row."""
    named_reports = list(named_reports)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        rows = named_reports + [("MEAN", mean_report([r for _, r in named_reports]))]
        for name, r in rows:
            writer.writerow([name] + [_fmt(getattr(r, f.name)) for f in fields(r)])


def read_report_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_COLUMNS:
            raise ValueError(f"unexpected report header {header}")
        out = []
        for row in reader:
            vals = [float(v) for v in row[1:-1]] + [int(row[-1])]
            out.append((row[0], MetricReport(*vals)))
    return out
