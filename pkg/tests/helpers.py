"""Shared builders for the test-suite."""

from pathlib import Path

import numpy as np
from PIL import Image


def increasing_map(rng, img):
    """Apply a random strictly increasing intensity map to ``img``.

    The map is strictly increasing on the intensities present in ``img``,
    which is all that matters for comparison-based codes.
    """
    levels = np.unique(img)
    values = np.sort(rng.choice(256, size=len(levels), replace=False))
    lut = np.zeros(256, dtype=np.uint8)
    lut[levels] = values
    return lut[img]


def random_image(rng, shape, low=0, high=256):
    return rng.integers(low, high, size=shape, dtype=np.int64).astype(np.uint8)


def duplicate_classes(rng, n_classes, per_class, shape=(24, 24)):
    """Images where every class holds order-isomorphic copies of one random base.

    CSQP, LBP and CSLBP give identical histograms inside a class, so
    retrieval with any of them is perfect.
    """
    images, labels = [], []
    for c in range(n_classes):
        base = random_image(rng, shape, 20, 236)
        for k in range(per_class):
            images.append(base if k == 0 else increasing_map(rng, base))
            labels.append(f"class_{c:02d}")
    return images, labels


def total_miss_images(rng, cluster_size=4, shape=(24, 24)):
    """Two clusters of identical-feature images; each class pairs one member of each.

    Every probe finds the other ``cluster_size - 1`` members of its own
    cluster (different classes) at distance 0 before its partner.
    """
    a = random_image(rng, shape)
    b = random_image(rng, shape)
    images, labels = [], []
    for k in range(cluster_size):
        images.append(a if k == 0 else increasing_map(rng, a))
        labels.append(f"pair_{k}")
    for k in range(cluster_size):
        images.append(b if k == 0 else increasing_map(rng, b))
        labels.append(f"pair_{k}")
    return images, labels


def write_tree(root, images, labels):
    root = Path(root)
    counters = {}
    for img, lab in zip(images, labels):
        k = counters.get(lab, 0)
        counters[lab] = k + 1
        d = root / lab
        d.mkdir(parents=True, exist_ok=True)
        Image.fromarray(img).save(d / f"img_{k:02d}.png")
    return root
