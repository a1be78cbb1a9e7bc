"""Descriptor diagnostics: histogram entropy, left/right difference histograms, feature image export."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .baselines import DescriptorSpec, REFERENCE_ONLY, get_descriptor
from .csqp import FeatureVector
from .imaging import ImageLike, as_pixels, load_image, save_image

NOT_IMPLEMENTED = "not-implemented"


def feature_entropy(fv: FeatureVector) -> float:
    """Shannon entropy of the normalised histogram in bits (0 log 0 = 0)."""
    if fv.total <= 0:
        raise ValueError("entropy of an empty histogram is undefined")
    p = fv.normalized()
    p = p[p > 0]
    # 0.0 rather than -0.0 for single-bin mass
    return float(abs(-(p * np.log2(p)).sum()))


@dataclass
class EntropyReport:
    """Average entropy per descriptor; ``None`` marks descriptors that are not implemented."""

    per_descriptor: dict[str, Optional[float]]
    image_count: int

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["descriptor", "average_entropy", "images"])
        for name, value in self.per_descriptor.items():
            shown = NOT_IMPLEMENTED if value is None else f"{value:.6f}"
            w.writerow([name, shown, self.image_count])
        return buf.getvalue()


def _resolve(d: Union[str, DescriptorSpec]) -> tuple[str, Optional[DescriptorSpec]]:
    if isinstance(d, DescriptorSpec):
        return d.tag, d if d.implemented else None
    key = d.strip().lower()
    if key in REFERENCE_ONLY:
        return key, None
    spec = get_descriptor(key)
    return spec.tag, spec


def average_entropy(
    images: Iterable[Union[ImageLike, str, Path]],
    descriptors: Sequence[Union[str, DescriptorSpec]],
) -> EntropyReport:
    """Mean feature entropy over a set of images, one value per descriptor.

    ``images`` may hold GrayImages, arrays or file paths (for example the
    paths of a :class:`~quadpattern.dataset.Dataset`). Reference-only
    descriptors (LDP, LDGP) report ``None`` instead of a number.
    """
    resolved = [_resolve(d) for d in descriptors]
    values: dict[str, list[float]] = {name: [] for name, _ in resolved}
    count = 0
    for item in images:
        if isinstance(item, (str, Path)):
            item = load_image(item)
        px = as_pixels(item)
        count += 1
        for name, spec in resolved:
            if spec is not None:
                values[name].append(feature_entropy(spec.describe(px)))
    if count == 0:
        raise ValueError("no images to analyse")
    per = {}
    for name, spec in resolved:
        per[name] = None if spec is None else float(np.mean(values[name]))
    return EntropyReport(per, count)


@dataclass
class DifferenceHistogram:
    per_bin_differences: np.ndarray
    variance: float
    normalized: bool


def symmetry_variance(
    left: ImageLike,
    right: ImageLike,
    d: Union[str, DescriptorSpec] = "csqp",
    mirror: bool = True,
    normalize: bool = True,
) -> DifferenceHistogram:
    """Difference of the left and right crop histograms and its population variance.

    The right crop is mirrored left-right first (unless ``mirror=False``) so
    that symmetric content lines up. With ``normalize`` the histograms are
    divided by their totals; otherwise raw counts are compared.
    """
    spec = d if isinstance(d, DescriptorSpec) else get_descriptor(d)
    lpx = as_pixels(left)
    rpx = as_pixels(right)
    if mirror:
        rpx = rpx[:, ::-1]
    hl = spec.describe(lpx)
    hr = spec.describe(rpx)
    if normalize:
        diff = hl.normalized() - hr.normalized()
    else:
        diff = (hl.counts - hr.counts).astype(np.float64)
    return DifferenceHistogram(diff, float(np.var(diff)), normalize)


def export_feature_image(
    img: Union[ImageLike, str, Path],
    d: Union[str, DescriptorSpec],
    path: Union[str, Path],
) -> Path:
    """Write the descriptor's feature image as an 8-bit gray PGM/PNG.

    Descriptors with fewer than 256 bins are stretched to the full gray range.
    """
    spec = d if isinstance(d, DescriptorSpec) else get_descriptor(d)
    if isinstance(img, (str, Path)):
        img = load_image(img)
    return save_image(spec.feature_image(img), path)
