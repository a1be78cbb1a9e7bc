"""Centre Symmetric Quadruple Pattern.

A 4x4 window anchored at ``(i, j)`` is split into four 2x2 quadrants. The
top-left quadrant is compared pixel by pixel with the bottom-right one (high
nibble) and the top-right quadrant with the bottom-left one (low nibble)::

    a b | c d        bits 7..4:  a>k  b>l  e>o  f>p
    e f | g h        bits 3..0:  c>i  d>j  g>m  h>n
    ----+----
    i j | k l
    m n | o p

A bit is 0 when the first pixel is less than or equal to the second. Sliding
the window with stride 1 over an ``M x N`` image gives an ``(M-3) x (N-3)``
feature image whose 256-bin histogram is the descriptor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imaging import DimensionError, FeatureImage, ImageLike, as_pixels

BINS = 256
KERNEL = 4
DESCRIPTOR_ID = "csqp"

# (row, col) offsets of the compared pixels inside the window, most significant bit first
PAIRS = (
    ((0, 0), (2, 2)),
    ((0, 1), (2, 3)),
    ((1, 0), (3, 2)),
    ((1, 1), (3, 3)),
    ((0, 2), (2, 0)),
    ((0, 3), (2, 1)),
    ((1, 2), (3, 0)),
    ((1, 3), (3, 1)),
)


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Histogram of code frequencies for one image."""

    counts: np.ndarray
    descriptor_id: str

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 1:
            raise ValueError("counts must be 1-D")
        if counts.size and counts.min() < 0:
            raise ValueError("counts must be non-negative")
        counts = np.ascontiguousarray(counts.astype(np.int64))
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def bins(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def normalized(self) -> np.ndarray:
        """Counts divided by their total (l1 normalisation)."""
        total = self.counts.sum()
        if total == 0:
            raise ValueError("cannot normalise an empty histogram")
        return self.counts / total

    def __eq__(self, other):
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return self.descriptor_id == other.descriptor_id and np.array_equal(
            self.counts, other.counts
        )

    def __repr__(self):
        return f"FeatureVector({self.descriptor_id}, bins={self.bins}, total={self.total})"


def histogram(fimg: FeatureImage) -> FeatureVector:
    """Histogram of a feature image over all of its bins."""
    counts = np.bincount(fimg.codes.ravel().astype(np.intp), minlength=fimg.bins)
    return FeatureVector(counts, fimg.descriptor_id)


def encode_c(e, f) -> int:
    """Binary comparison: 0 if ``e <= f`` else 1."""
    return 0 if e <= f else 1


def check_size(px: np.ndarray, minimum: int, name: str):
    h, w = px.shape
    if h < minimum or w < minimum:
        raise DimensionError(
            f"{name} needs an image of at least {minimum}x{minimum} pixels, got {h}x{w}"
        )


def encode_csqp_at(img: ImageLike, i: int, j: int) -> int:
    """CSQP code of the window whose top-left pixel is ``(i, j)``."""
    px = as_pixels(img)
    h, w = px.shape
    if i < 0 or j < 0 or i + KERNEL > h or j + KERNEL > w:
        raise IndexError(f"4x4 window at ({i}, {j}) does not fit in a {h}x{w} image")
    code = 0
    for (a, b), (c, d) in PAIRS:
        code = (code << 1) | encode_c(px[i + a, j + b], px[i + c, j + d])
    return code


def feature_image(img: ImageLike) -> FeatureImage:
    px = as_pixels(img)
    check_size(px, KERNEL, "CSQP")
    h, w = px.shape[0] - 3, px.shape[1] - 3
    codes = np.zeros((h, w), dtype=np.uint8)
    for bit, ((a, b), (c, d)) in zip(range(7, -1, -1), PAIRS):
        first = px[a : a + h, b : b + w]
        second = px[c : c + h, d : d + w]
        codes |= (first > second).astype(np.uint8) << np.uint8(bit)
    return FeatureImage(codes, BINS, DESCRIPTOR_ID)


def describe(img: ImageLike) -> FeatureVector:
    """256-bin CSQP histogram; its mass is ``(M-3)(N-3)``."""
    return histogram(feature_image(img))
