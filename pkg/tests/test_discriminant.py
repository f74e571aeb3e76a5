import numpy as np
import pytest

from ddakit import discriminant as da
from ddakit import synthdata as sd
from ddakit.errors import DegenerateClass, NotTwoClass, ZeroWithinScatter

from conftest import random_sample_set


def one_class(points):
    return da.SampleSet.from_arrays(points, np.zeros(len(points), dtype=int))


def test_class_stats_unbiased():
    st = da.class_stats(one_class([[0.0, 0.0], [2.0, 2.0]]), "unbiased")
    assert np.allclose(st.means[0], [1, 1])
    assert np.allclose(st.covariances[0], [[2, 2], [2, 2]])


def test_class_stats_biased_halves_unbiased():
    st = da.class_stats(one_class([[0.0, 0.0], [2.0, 2.0]]), "biased")
    assert np.allclose(st.covariances[0], [[1, 1], [1, 1]])


def test_class_stats_single_point_biased():
    s = da.SampleSet.from_arrays([[5.0, 5.0], [0.0, 0.0], [1.0, 1.0]], [0, 1, 1])
    st = da.class_stats(s, "biased")
    assert np.allclose(st.means[0], [5, 5])
    assert np.all(st.covariances[0] == 0)
    with pytest.raises(DegenerateClass):
        da.class_stats(s, "unbiased")


def test_empty_class_is_degenerate():
    s = da.SampleSet([[0.0], [1.0]], [0, 0], 2)
    with pytest.raises(DegenerateClass):
        da.scatter_matrices(s)


@pytest.mark.parametrize("w, w0, x, expected", [
    ((1, 0), 1, (2, 3), 3.0),
    ((0, 1), 0, (2, 3), 3.0),
    ((0.6, 0.8), -1, (5, 5), 6.0),
])
def test_project(w, w0, x, expected):
    d = da.LinearDiscriminant(np.array(w, float), w0)
    assert da.project(d, np.array(x, float)) == pytest.approx(expected, abs=1e-12)


def test_projected_class_stats():
    st = da.ClassStats(np.array([[2.0, 9.0], [0.0, 0.0]]),
                       np.array([np.eye(2), np.diag([1.0, 4.0])]), da.Convention.BIASED)
    m, s2 = da.projected_class_stats(da.LinearDiscriminant(np.array([1.0, 0.0]), 0.0), st)
    assert (m[0], s2[0]) == (2.0, 1.0)
    m, s2 = da.projected_class_stats(da.LinearDiscriminant(np.array([0.6, 0.8]), 0.0), st)
    assert m[1] == 0.0 and s2[1] == pytest.approx(0.36 + 2.56)
    m5, s25 = da.projected_class_stats(da.LinearDiscriminant(np.array([0.6, 0.8]), 5.0), st)
    assert np.allclose(m5, m + 5) and np.array_equal(s25, s2)


def test_fisher_criterion():
    assert da.fisher_criterion(0, 2, 1, 1) == 2.0
    assert da.fisher_criterion(3, 3, 1, 2) == 0.0
    with pytest.raises(ZeroWithinScatter):
        da.fisher_criterion(0, 1, 0, 0)


def test_fisher_scale_invariant(rng):
    s = random_sample_set(rng, max_l=2)
    w = da.LinearDiscriminant(rng.normal(size=s.dim), 0.3)
    vals = []
    for c in (1.0, 7.5):
        st = da.class_stats(da.SampleSet(s.features * c, s.labels, 2))
        m, s2 = da.projected_class_stats(w, st)
        vals.append(da.fisher_criterion(m[0], m[1], s2[0], s2[1]))
    assert vals[0] == pytest.approx(vals[1], rel=1e-12)


def test_fukunaga_criterion():
    assert da.fukunaga_criterion(0.5, 0.5, -1, 1, 1, 1) == 1.0
    assert da.fukunaga_criterion(0.3, 0.7, 0, 0, 1, 2) == 0.0
    assert da.fukunaga_criterion(1.0, 0.0, 3.0, 9.0, 2.0, 5.0) == pytest.approx(9.0 / 2.0)


def test_fukunaga_depends_on_bias():
    a = da.fukunaga_criterion(0.5, 0.5, -1, 1, 1, 1)
    b = da.fukunaga_criterion(0.5, 0.5, -1 + 2, 1 + 2, 1, 1)
    assert a != b


def test_scatter_1d_example():
    s = da.SampleSet.from_arrays([[0.0], [2.0], [4.0], [6.0]], [0, 0, 1, 1])
    ss = da.scatter_matrices(s, "biased")
    assert ss.mixture_mean[0] == 3.0
    assert (ss.s_b[0, 0], ss.s_w[0, 0], ss.s_m[0, 0]) == (4.0, 1.0, 5.0)


def test_scatter_all_equal():
    s = da.SampleSet.from_arrays(np.ones((6, 3)), [0, 0, 1, 1, 2, 2])
    ss = da.scatter_matrices(s)
    for m in (ss.s_b, ss.s_w, ss.s_m):
        assert np.all(m == 0)


def test_scatter_single_class(rng):
    s = da.SampleSet(rng.normal(size=(20, 3)), np.zeros(20, int), 1)
    ss = da.scatter_matrices(s)
    assert np.allclose(ss.s_b, 0, atol=1e-15)
    assert np.allclose(ss.s_w, ss.s_m, atol=1e-14)


def test_unbiased_breaks_decomposition():
    s = da.SampleSet.from_arrays([[0.0], [2.0], [4.0], [6.0]], [0, 0, 1, 1])
    ss = da.scatter_matrices(s, "unbiased")
    # S_W = 2, S_B = 4, S_M = 20/3
    assert ss.s_m[0, 0] == pytest.approx(20 / 3)
    assert ss.s_m[0, 0] != pytest.approx(ss.s_w[0, 0] + ss.s_b[0, 0])


def test_scatter_decomposition_random(rng):
    for _ in range(50):
        ss = da.scatter_matrices(random_sample_set(rng, full_rank=False, min_l=1))
        bound = 1e-10 * (1 + np.abs(ss.s_m).max())
        assert np.abs(ss.s_m - ss.s_w - ss.s_b).max() <= bound


def test_trace_criterion_examples():
    s = da.SampleSet.from_arrays([[0.0], [2.0], [4.0], [6.0]], [0, 0, 1, 1])
    ss = da.scatter_matrices(s)
    j, ev = da.trace_criterion(ss, "BW")
    assert j == pytest.approx(4.0) and np.allclose(ev, [4.0])
    j, _ = da.trace_criterion(ss, "BM")
    assert j == pytest.approx(0.8)
    j, _ = da.trace_criterion(ss, "WM")
    assert j == pytest.approx(0.2)
    flat = da.SampleSet.from_arrays([[0.0], [2.0], [0.0], [2.0]], [0, 0, 1, 1])
    assert da.trace_criterion(da.scatter_matrices(flat))[0] == 0.0


def test_trace_criterion_eig_sum_and_rank(rng):
    for _ in range(30):
        s = random_sample_set(rng)
        ss = da.scatter_matrices(s)
        j, ev = da.trace_criterion(ss, "BW")
        assert j == pytest.approx(ev.sum(), rel=1e-9, abs=1e-14)
        assert np.sum(ev > 1e-9 * ev.max()) <= s.n_classes - 1


def test_trace_criterion_linear_invariance(rng):
    for _ in range(30):
        s = random_sample_set(rng, max_d=5)
        t = rng.normal(size=(s.dim, s.dim)) + 2 * np.eye(s.dim)
        moved = da.SampleSet(s.features @ t.T, s.labels, s.n_classes)
        j1 = da.trace_criterion(da.scatter_matrices(s))[0]
        j2 = da.trace_criterion(da.scatter_matrices(moved))[0]
        assert j2 == pytest.approx(j1, rel=1e-8)


def test_bias_cancels_in_mean_difference(rng):
    s = random_sample_set(rng, max_l=2)
    st = da.class_stats(s)
    w = rng.normal(size=s.dim)
    diffs = []
    for w0 in rng.normal(scale=100, size=5):
        m, _ = da.projected_class_stats(da.LinearDiscriminant(w, w0), st)
        diffs.append(m[0] - m[1])
    assert np.allclose(diffs, diffs[0], rtol=0, atol=1e-9)


def test_fit_lda_isotropic():
    pts = [[2, 1], [2, -1], [0, 1], [0, -1], [-2, 1], [-2, -1], [0, 1], [0, -1]]
    pts = np.array(pts, float)
    x = np.vstack([pts[:4], pts[4:]])
    # class 1 centred at (1, 0), class 0 at (-1, 0), identical spreads
    s = da.SampleSet.from_arrays(x, [1, 1, 1, 1, 0, 0, 0, 0])
    d = da.fit_lda(s, ridge=0.0)
    assert np.allclose(d.w, [1, 0], atol=1e-12)
    assert da.accuracy(d, s) >= 0.5


def test_fit_lda_diagonal_direction():
    # per-class deviations give S_W = 0.5 diag(1, 100); mean difference (1, 1)
    dev = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 10.0], [0.0, -10.0]])
    x = np.vstack([dev + [0.5, 0.5], dev - [0.5, 0.5]])
    s = da.SampleSet.from_arrays(x, [1] * 4 + [0] * 4)
    assert np.allclose(da.scatter_matrices(s).s_w, 0.5 * np.diag([1.0, 100.0]))
    d = da.fit_lda(s, ridge=0.0)
    expected = np.array([1.0, 0.01]) / np.hypot(1.0, 0.01)
    assert np.allclose(d.w, expected, atol=1e-12)
    assert np.linalg.norm(d.w) == pytest.approx(1.0, abs=1e-12)


def test_fit_lda_maximizes_fisher_over_random_directions(rng):
    n = 200
    cov = [[2.0, 0.9, 0.0], [0.9, 1.0, 0.3], [0.0, 0.3, 0.5]]
    s = sd.gaussian_blobs(sd.BlobSpec([[0, 0, 0], [1, 0.5, -0.5]], [cov, cov], [n, n], seed=3))
    st = da.class_stats(s)

    def fisher(w):
        m, s2 = da.projected_class_stats(da.LinearDiscriminant(w, 0.0), st)
        return da.fisher_criterion(m[1], m[0], s2[1], s2[0])

    best = fisher(da.fit_lda(s, ridge=0.0).w)
    dirs = rng.normal(size=(10_000, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    sweep = max(fisher(w) for w in dirs)
    assert best >= sweep * (1 - 1e-12)
    assert sweep >= 0.98 * best


def test_scatter_pairs_share_optimal_direction(rng):
    """The BW, WM and BM criteria peak at the same 1-D projection (empirically)."""
    s = sd.gaussian_blobs(sd.BlobSpec([[0, 0], [2, 1]], [[[1, 0.4], [0.4, 0.6]]] * 2, [150, 150], seed=5))
    angles = np.linspace(0, np.pi, 2001)

    def crit(pair, a):
        w = np.array([np.cos(a), np.sin(a)])
        proj = da.SampleSet(s.features @ w, s.labels, 2)
        return da.trace_criterion(da.scatter_matrices(proj), pair)[0]

    best_bw = angles[np.argmax([crit("BW", a) for a in angles])]
    best_bm = angles[np.argmax([crit("BM", a) for a in angles])]
    best_wm = angles[np.argmin([crit("WM", a) for a in angles])]
    assert best_bw == best_bm == best_wm


def test_fit_lda_requires_two_classes(rng):
    with pytest.raises(NotTwoClass):
        da.fit_lda(random_sample_set(rng, min_l=3, max_l=3))


def test_fit_lda_separable_blobs():
    s = sd.separable_blobs(0, 500)
    d = da.fit_lda(s)
    assert da.accuracy(d, s) >= 0.99
    assert d.w @ (s.features[s.labels == 1].mean(0) - s.features[s.labels == 0].mean(0)) > 0
