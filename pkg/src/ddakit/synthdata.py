"""Seeded synthetic data: Gaussian blobs, concentric rings and toy
segmentation images, plus PGM and CSV file I/O.

All randomness goes through ``numpy.random.Generator`` on the PCG64 bit
generator (O'Neill's 128-bit LCG with XSL-RR output), seeded through
``SeedSequence``. Both are fixed algorithms in numpy, so outputs are
bit-identical across runs and platforms for a given seed. Streams that need
independence are derived with ``SeedSequence([seed, tag, ...])``.
"""
import csv
from dataclasses import dataclass, field

import numpy as np

from .discriminant import SampleSet
from .errors import MalformedHeader, TruncatedPayload

SPLITS = {"train": 0, "val": 1, "test": 2}


def make_rng(*key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(list(key))))


@dataclass
class BlobSpec:
    means: list
    covariances: list
    counts: list
    seed: int = 0

    def __post_init__(self):
        if not (len(self.means) == len(self.covariances) == len(self.counts)):
            raise ValueError("means, covariances and counts must align per class")
        if any(c < 1 for c in self.counts):
            raise ValueError("every class needs at least one sample")


def _factor(cov):
    cov = np.asarray(cov, dtype=np.float64)
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        # PSD but singular (e.g. zero covariance): symmetric square root
        vals, vecs = np.linalg.eigh(cov)
        if vals.min() < -1e-12 * max(1.0, abs(vals).max()):
            raise ValueError("covariance is not positive semi-definite")
        return vecs * np.sqrt(np.clip(vals, 0.0, None))


def gaussian_blobs(spec: BlobSpec) -> SampleSet:
    rng = make_rng(spec.seed)
    xs, ys = [], []
    for k, (mean, cov, count) in enumerate(zip(spec.means, spec.covariances, spec.counts)):
        mean = np.asarray(mean, dtype=np.float64)
        z = rng.standard_normal((count, mean.size))
        xs.append(mean + z @ _factor(cov).T)
        ys.append(np.full(count, k))
    return SampleSet(np.vstack(xs), np.concatenate(ys), len(spec.counts))


def separable_blobs(seed: int = 0, n: int = 500) -> SampleSet:
    """Two elongated, correlated Gaussians with a wide margin along the Fisher direction."""
    cov = [[1.0, 0.8], [0.8, 1.0]]
    return gaussian_blobs(BlobSpec(
        means=[[-2.0, 2.0], [2.0, -2.0]],
        covariances=[cov, cov],
        counts=[n, n],
        seed=seed,
    ))


INNER_RADIUS = 1.0
ANNULUS = (1.08, 1.2)


def inseparable_rings(seed: int = 0, n: int = 500) -> SampleSet:
    """Class 0 fills the unit disk, class 1 is uniform on a thin surrounding annulus.

    Disk radii are drawn with density proportional to r^3, which thins out
    the centre; a uniform disk leaves a straight cut near its rim at about
    61% accuracy, this one stays under 60%. The radial gap keeps the classes
    nonlinearly separable.
    """
    if n < 2:
        raise ValueError("need at least 2 samples per class")
    rng = make_rng(seed)
    r0 = INNER_RADIUS * rng.random(n) ** 0.25
    a, b = ANNULUS
    r1 = np.sqrt(a * a + (b * b - a * a) * rng.random(n))
    phi = 2 * np.pi * rng.random(2 * n)
    r = np.concatenate([r0, r1])
    x = np.column_stack([r * np.cos(phi), r * np.sin(phi)])
    return SampleSet(x, np.repeat([0, 1], n), 2)


@dataclass
class SynthImage:
    image: np.ndarray  # float in [0, 1]
    mask: np.ndarray  # uint8 in {0, 1}
    spec_id: str
    seed: int
    meta: dict = field(default_factory=dict)


def _shape_mask(rng, size):
    yy, xx = np.mgrid[0:size, 0:size]
    mask = np.zeros((size, size), dtype=bool)
    for _ in range(int(rng.integers(1, 4))):
        cy, cx = rng.uniform(0.2, 0.8, 2) * size
        ry, rx = rng.uniform(0.08, 0.3, 2) * size
        if rng.random() < 0.5:
            angle = rng.uniform(0, np.pi)
            dy, dx = yy - cy, xx - cx
            u = dx * np.cos(angle) + dy * np.sin(angle)
            v = -dx * np.sin(angle) + dy * np.cos(angle)
            mask |= (u / rx) ** 2 + (v / ry) ** 2 <= 1.0
        else:
            mask |= (np.abs(yy - cy) <= ry) & (np.abs(xx - cx) <= rx)
    return mask


def synth_image(seed: int, size: int = 32, noise: float = 0.15,
                background: float = 0.3, offset: float = 0.4,
                spec_id: str = "img") -> SynthImage:
    """One image: 1-3 ellipses/rectangles raised by ``offset`` over textured noise.

    Texture (a random low-frequency sinusoid) and Gaussian noise both scale
    with ``noise``; with ``noise=0`` the image is exactly
    ``background + offset * mask``. The shape draw is repeated until the
    foreground fraction lies in [0.05, 0.6].
    """
    if size < 16:
        raise ValueError("size must be at least 16")
    rng = make_rng(seed)
    while True:
        mask = _shape_mask(rng, size)
        frac = mask.mean()
        if 0.05 <= frac <= 0.6:
            break
    yy, xx = np.mgrid[0:size, 0:size] / size
    fy, fx = rng.uniform(1.0, 4.0, 2)
    phase = rng.uniform(0, 2 * np.pi)
    texture = np.sin(2 * np.pi * (fy * yy + fx * xx) + phase)
    img = background + offset * mask + noise * (texture + rng.standard_normal((size, size)))
    img = np.clip(img, 0.0, 1.0)
    return SynthImage(img, mask.astype(np.uint8), spec_id, seed,
                      {"noise": noise, "background": background, "offset": offset})


def synth_segmentation_set(seed: int, count: int, size: int = 32, noise: float = 0.15,
                           split: str = "train", **kwargs) -> list:
    """``count`` images, each seeded from ``(seed, split, index)``."""
    tag = SPLITS[split]
    out = []
    for i in range(count):
        ss = np.random.SeedSequence([seed, tag, i])
        img_seed = int(ss.generate_state(1, dtype=np.uint64)[0])
        out.append(synth_image(img_seed, size, noise, spec_id=f"{split}_{i:04d}", **kwargs))
    return out


# --- PGM ------------------------------------------------------------------

def _to_bytes(image) -> np.ndarray:
    a = np.asarray(image)
    if a.ndim != 2:
        raise ValueError("PGM images must be 2-D")
    if a.dtype == bool or np.issubdtype(a.dtype, np.integer):
        if not np.all((a == 0) | (a == 1)):
            raise ValueError("integer images are written as masks and must be 0/1")
        return (a.astype(np.uint8) * 255).astype(np.uint8)
    a = a.astype(np.float64)
    if not np.all(np.isfinite(a)) or a.min() < 0.0 or a.max() > 1.0:
        raise ValueError("float images must lie in [0, 1]")
    return np.rint(a * 255.0).astype(np.uint8)


def write_pgm(path, image) -> None:
    """Binary PGM (P5, maxval 255). Masks map to {0, 255}; floats in [0, 1] to round(255 x)."""
    data = _to_bytes(image)
    h, w = data.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def _header_tokens(buf: bytes):
    tokens, pos = [], 0
    while len(tokens) < 4:
        while pos < len(buf) and buf[pos : pos + 1].isspace():
            pos += 1
        if pos < len(buf) and buf[pos : pos + 1] == b"#":
            while pos < len(buf) and buf[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(buf) and not buf[pos : pos + 1].isspace() and buf[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise MalformedHeader("PGM header ended early")
        tokens.append(buf[start:pos])
    if pos >= len(buf) or not buf[pos : pos + 1].isspace():
        raise MalformedHeader("missing whitespace after maxval")
    return tokens, pos + 1


def read_pgm(path, as_mask: bool = False) -> np.ndarray:
    """Read a P5 PGM with maxval 255.

    Returns floats in [0, 1], or a uint8 0/1 mask (pixel >= 128) with ``as_mask``.
    """
    with open(path, "rb") as fh:
        buf = fh.read()
    tokens, offset = _header_tokens(buf)
    if tokens[0] != b"P5":
        raise MalformedHeader(f"bad magic {tokens[0]!r}")
    try:
        w, h, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise MalformedHeader("non-integer PGM header field") from exc
    if w < 1 or h < 1 or maxval != 255:
        raise MalformedHeader("unsupported PGM dimensions or maxval")
    payload = buf[offset : offset + w * h]
    if len(payload) < w * h:
        raise TruncatedPayload(f"expected {w * h} bytes, got {len(payload)}")
    data = np.frombuffer(payload, dtype=np.uint8).reshape(h, w)
    if as_mask:
        return (data >= 128).astype(np.uint8)
    return data / 255.0


# --- CSV ------------------------------------------------------------------

def write_samples_csv(path, s: SampleSet) -> None:
    """Header ``x0,...,x{d-1},label``; 17 significant digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"x{j}" for j in range(s.dim)] + ["label"])
        for row, label in zip(s.features, s.labels):
            writer.writerow([f"{v:.17g}" for v in row] + [int(label)])


def read_samples_csv(path, n_classes: int | None = None) -> SampleSet:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[-1] != "label" or header[:-1] != [f"x{j}" for j in range(len(header) - 1)]:
            raise ValueError(f"unexpected sample header {header}")
        rows = [r for r in reader if r]
    x = np.array([[float(v) for v in r[:-1]] for r in rows])
    y = np.array([int(r[-1]) for r in rows])
    return SampleSet.from_arrays(x, y, n_classes)
