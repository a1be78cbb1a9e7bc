"""Seeded synthetic face-like images and on-disk toy datasets.

The images are not faces; they are smooth oval layouts with dark eye and
mouth blobs, shading and fine texture, enough to exercise the descriptors
and the benchmark end to end without licensed data.
"""

from __future__ import annotations

from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image


def _box_blur(a: np.ndarray, r: int) -> np.ndarray:
    if r <= 0:
        return a
    k = 2 * r + 1
    p = np.pad(a, r, mode="edge")
    c = np.cumsum(np.cumsum(p, axis=0), axis=1)
    c = np.pad(c, ((1, 0), (1, 0)))
    s = c[k:, k:] - c[:-k, k:] - c[k:, :-k] + c[:-k, :-k]
    return s / (k * k)


def _ellipse(yy, xx, cy, cx, ry, rx) -> np.ndarray:
    return ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0


def identity_params(rng: np.random.Generator) -> dict:
    """Per-identity geometry and tone, as fractions of the image size."""
    return {
        "face_ry": rng.uniform(0.38, 0.46),
        "face_rx": rng.uniform(0.28, 0.36),
        "eye_y": rng.uniform(0.36, 0.44),
        "eye_dx": rng.uniform(0.11, 0.16),
        "eye_r": rng.uniform(0.035, 0.06),
        "mouth_y": rng.uniform(0.68, 0.76),
        "mouth_w": rng.uniform(0.08, 0.15),
        "skin": rng.uniform(120, 190),
        "texture_seed": int(rng.integers(0, 2**31 - 1)),
    }


def face_like(
    params: dict,
    rng: np.random.Generator,
    size: tuple[int, int] = (64, 64),
    noise: float = 3.0,
) -> np.ndarray:
    """Render one uint8 face-like image for an identity, with per-sample jitter."""
    h, w = size
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    yy /= h
    xx /= w
    # background: a soft diagonal gradient
    img = 60 + 40 * (xx + yy) / 2
    face = _ellipse(yy, xx, 0.5, 0.5, params["face_ry"], params["face_rx"])
    img = np.where(face, params["skin"], img)
    # identity texture is fixed per person; sample texture varies
    tex_rng = np.random.default_rng(params["texture_seed"])
    texture = _box_blur(tex_rng.normal(0, 18, size), 1)
    img = img + np.where(face, texture, 0.4 * texture)
    for side in (-1, 1):
        cx = 0.5 + side * params["eye_dx"]
        eye = _ellipse(yy, xx, params["eye_y"], cx, params["eye_r"] * 0.7, params["eye_r"] * 1.4)
        img = np.where(eye, img - 70, img)
        brow = _ellipse(yy, xx, params["eye_y"] - 0.07, cx, 0.012, params["eye_r"] * 1.6)
        img = np.where(brow, img - 45, img)
    nose = _ellipse(yy, xx, 0.56, 0.5, 0.07, 0.02)
    img = np.where(nose, img - 20, img)
    mouth = _ellipse(yy, xx, params["mouth_y"], 0.5, 0.02, params["mouth_w"])
    img = np.where(mouth, img - 55, img)
    # per-sample lighting from one side plus sensor noise
    light = rng.uniform(-25, 25)
    img = img + light * (xx - 0.5) + rng.uniform(-10, 10)
    img = _box_blur(img, 1) + rng.normal(0, noise, size)
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def face_like_set(n: int = 20, seed: int = 0, size: tuple[int, int] = (64, 64)) -> list[np.ndarray]:
    """``n`` images of ``n`` different synthetic identities."""
    rng = np.random.default_rng(seed)
    return [face_like(identity_params(rng), rng, size) for _ in range(n)]


def write_dataset(
    root: Union[str, Path],
    n_classes: int = 4,
    per_class: int = 5,
    seed: int = 0,
    size: tuple[int, int] = (48, 48),
    noise: float = 3.0,
) -> Path:
    """Write ``root/person_XX/img_YY.png`` for a seeded synthetic population."""
    root = Path(root)
    rng = np.random.default_rng(seed)
    for c in range(n_classes):
        params = identity_params(rng)
        cdir = root / f"person_{c:02d}"
        cdir.mkdir(parents=True, exist_ok=True)
        for k in range(per_class):
            Image.fromarray(face_like(params, rng, size, noise)).save(cdir / f"img_{k:02d}.png")
    return root
