"""Comparison descriptors (LBP, CS-LBP, CS-LTP, SLBP) and the descriptor registry.

All binary comparisons follow the CSQP convention: a bit is set only when the
first pixel is strictly greater than the second.

3x3 neighbourhood naming, clockwise from the top-left::

    n0 n1 n2
    n7 c  n3
    n6 n5 n4
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import csqp
from .csqp import FeatureVector, check_size, histogram
from .imaging import FeatureImage, ImageLike, as_pixels

DEFAULT_CSLTP_THRESHOLD = 5

# (row, col) offsets of n0..n7 relative to the top-left of the 3x3 window
_RING = ((0, 0), (0, 1), (0, 2), (1, 2), (2, 2), (2, 1), (2, 0), (1, 0))


def _ring(px: np.ndarray) -> list[np.ndarray]:
    """Views of n0..n7 for every interior pixel, as int16 arrays."""
    h, w = px.shape[0] - 2, px.shape[1] - 2
    px = px.astype(np.int16)
    return [px[r : r + h, c : c + w] for r, c in _RING]


def _lbp_codes(px: np.ndarray) -> np.ndarray:
    h, w = px.shape[0] - 2, px.shape[1] - 2
    center = px[1 : 1 + h, 1 : 1 + w].astype(np.int16)
    codes = np.zeros((h, w), dtype=np.uint8)
    for bit, n in zip(range(7, -1, -1), _ring(px)):
        codes |= (n > center).astype(np.uint8) << np.uint8(bit)
    return codes


def lbp_feature_image(img: ImageLike) -> FeatureImage:
    px = as_pixels(img)
    check_size(px, 3, "LBP")
    return FeatureImage(_lbp_codes(px), 256, "lbp")


def cslbp_feature_image(img: ImageLike) -> FeatureImage:
    """4-bit code from the pairs (n0,n4), (n1,n5), (n2,n6), (n3,n7); n0 vs n4 is the MSB."""
    px = as_pixels(img)
    check_size(px, 3, "CSLBP")
    n = _ring(px)
    codes = np.zeros(n[0].shape, dtype=np.uint8)
    for bit in range(4):
        codes |= (n[bit] > n[bit + 4]).astype(np.uint8) << np.uint8(3 - bit)
    return FeatureImage(codes, 16, "cslbp")


def _ternary(first: np.ndarray, second: np.ndarray, t: int) -> np.ndarray:
    d = first - second
    return np.where(d > t, 1, np.where(-d > t, -1, 0)).astype(np.int16)


def csltp_id(t: int) -> str:
    return f"csltp[t={t}]"


def csltp_feature_image(img: ImageLike, t: int = DEFAULT_CSLTP_THRESHOLD) -> FeatureImage:
    """Ternary-code the diagonal pairs (n0,n4) and (n2,n6); bin = 3*(d1+1) + (d2+1)."""
    if t < 0:
        raise ValueError(f"CSLTP threshold must be non-negative, got {t}")
    px = as_pixels(img)
    check_size(px, 3, "CSLTP")
    n = _ring(px)
    d1 = _ternary(n[0], n[4], t)
    d2 = _ternary(n[2], n[6], t)
    codes = (3 * (d1 + 1) + (d2 + 1)).astype(np.uint8)
    return FeatureImage(codes, 9, csltp_id(t))


def block_means(img: ImageLike) -> np.ndarray:
    """Mean of every overlapping 2x2 block, rounded half-up, shape ``(M-1, N-1)``."""
    px = as_pixels(img).astype(np.int32)
    s = px[:-1, :-1] + px[:-1, 1:] + px[1:, :-1] + px[1:, 1:]
    return ((s + 2) // 4).astype(np.uint8)


def slbp_feature_image(img: ImageLike) -> FeatureImage:
    """LBP computed on the 2x2 block-mean image."""
    px = as_pixels(img)
    check_size(px, 4, "SLBP")
    return FeatureImage(_lbp_codes(block_means(px)), 256, "slbp")


def describe_lbp(img: ImageLike) -> FeatureVector:
    return histogram(lbp_feature_image(img))


def describe_cslbp(img: ImageLike) -> FeatureVector:
    return histogram(cslbp_feature_image(img))


def describe_csltp(img: ImageLike, t: int = DEFAULT_CSLTP_THRESHOLD) -> FeatureVector:
    return histogram(csltp_feature_image(img, t))


def describe_slbp(img: ImageLike) -> FeatureVector:
    return histogram(slbp_feature_image(img))


@dataclass(frozen=True)
class DescriptorSpec:
    """A registered descriptor and its length figures."""

    id: str
    bins: int
    encoded_neighborhood: str
    min_size: int
    length_bits: Optional[int]
    feature_image_fn: Optional[Callable[..., FeatureImage]] = field(
        default=None, repr=False, compare=False
    )
    params: tuple = ()

    @property
    def implemented(self) -> bool:
        return self.feature_image_fn is not None

    @property
    def tag(self) -> str:
        """Identifier stamped on feature vectors, including parameters."""
        if self.id == "csltp":
            return csltp_id(dict(self.params).get("t", DEFAULT_CSLTP_THRESHOLD))
        return self.id

    def feature_image(self, img: ImageLike) -> FeatureImage:
        if self.feature_image_fn is None:
            raise NotImplementedError(f"descriptor {self.id!r} is not implemented")
        return self.feature_image_fn(img, **dict(self.params))

    def describe(self, img: ImageLike) -> FeatureVector:
        return histogram(self.feature_image(img))

    def with_params(self, **params) -> "DescriptorSpec":
        return DescriptorSpec(
            self.id,
            self.bins,
            self.encoded_neighborhood,
            self.min_size,
            self.length_bits,
            self.feature_image_fn,
            tuple(sorted(params.items())),
        )


DESCRIPTORS: dict[str, DescriptorSpec] = {
    "csqp": DescriptorSpec("csqp", 256, "4x4", 4, 8, csqp.feature_image),
    "lbp": DescriptorSpec("lbp", 256, "8", 3, 8, lbp_feature_image),
    "cslbp": DescriptorSpec("cslbp", 16, "8", 3, 4, cslbp_feature_image),
    "csltp": DescriptorSpec(
        "csltp",
        9,
        "8",
        3,
        None,
        csltp_feature_image,
        (("t", DEFAULT_CSLTP_THRESHOLD),),
    ),
    "slbp": DescriptorSpec("slbp", 256, "4x4", 4, 8, slbp_feature_image),
}

# Listed for reference only; these have no implementation here.
REFERENCE_ONLY: dict[str, DescriptorSpec] = {
    "ldgp": DescriptorSpec("ldgp", 64, "4", 3, 6),
    "ldp": DescriptorSpec("ldp", 1024, "8", 3, 32),
}


def get_descriptor(name: str, csltp_threshold: Optional[int] = None) -> DescriptorSpec:
    """Look up a descriptor by (case-insensitive) name.

    Raises ``KeyError`` for unknown names and ``NotImplementedError`` for
    descriptors known only by their reference figures (LDP, LDGP).
    """
    key = name.strip().lower()
    if key in REFERENCE_ONLY:
        raise NotImplementedError(f"descriptor {name!r} is not implemented")
    if key not in DESCRIPTORS:
        raise KeyError(f"unknown descriptor {name!r}; choose from {', '.join(DESCRIPTORS)}")
    spec = DESCRIPTORS[key]
    if key == "csltp" and csltp_threshold is not None:
        if csltp_threshold < 0:
            raise ValueError("CSLTP threshold must be non-negative")
        spec = spec.with_params(t=int(csltp_threshold))
    return spec
