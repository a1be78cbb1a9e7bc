"""Gray image containers, color conversion and image file I/O.

Pixels are stored row-major as ``(height, width)`` uint8 arrays, indexed
``[i, j]`` with ``i`` the row and ``j`` the column, both 0-based.
"""

from __future__ import annotations

import bz2
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image, UnidentifiedImageError

# integer BT.601 weights, scaled by 1000 so rounding half-up stays exact
_LUMA_WEIGHTS = np.array([299, 587, 114], dtype=np.int64)

SUPPORTED_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".ppm", ".pgm", ".pnm")


class ImageDecodeError(ValueError):
    """An image could not be decoded; ``path`` names the offending file."""

    def __init__(self, message: str, path: Union[str, Path, None] = None):
        self.path = None if path is None else Path(path)
        if path is not None:
            message = f"{path}: {message}"
        super().__init__(message)


class DimensionError(ValueError):
    """Image is too small for the requested descriptor."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Immutable 8-bit single channel image."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2:
            raise ValueError(f"GrayImage needs a 2-D array, got shape {px.shape}")
        if px.dtype != np.uint8:
            if px.size and (px.min() < 0 or px.max() > 255):
                raise ValueError("GrayImage intensities must lie in [0, 255]")
            if not np.all(np.equal(np.mod(px, 1), 0)):
                raise ValueError("GrayImage intensities must be integers")
            px = px.astype(np.uint8)
        object.__setattr__(self, "pixels", _frozen(px.copy()))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    def crop(self, x: int, y: int, w: int, h: int) -> "GrayImage":
        """Crop a ``w``x``h`` rectangle whose top-left corner is column ``x``, row ``y``."""
        if w <= 0 or h <= 0 or x < 0 or y < 0 or x + w > self.width or y + h > self.height:
            raise ValueError(
                f"crop {x},{y},{w},{h} outside image of size {self.width}x{self.height}"
            )
        return GrayImage(self.pixels[y : y + h, x : x + w])

    def mirrored(self) -> "GrayImage":
        """Left-right mirror image."""
        return GrayImage(self.pixels[:, ::-1])

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.pixels, other.pixels))

    def __repr__(self):
        return f"GrayImage(height={self.height}, width={self.width})"


@dataclass(frozen=True, eq=False)
class FeatureImage:
    """Grid of local codes produced by a descriptor, every code in ``[0, bins)``."""

    codes: np.ndarray
    bins: int
    descriptor_id: str

    def __post_init__(self):
        codes = np.asarray(self.codes)
        if codes.ndim != 2:
            raise ValueError("FeatureImage codes must be 2-D")
        if codes.size and (codes.min() < 0 or codes.max() >= self.bins):
            raise ValueError(f"codes outside [0, {self.bins - 1}]")
        object.__setattr__(self, "codes", _frozen(codes))

    @property
    def height(self) -> int:
        return self.codes.shape[0]

    @property
    def width(self) -> int:
        return self.codes.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.codes.shape

    def to_display(self) -> np.ndarray:
        """Codes as uint8 gray levels; fewer than 256 bins are stretched to [0, 255]."""
        codes = self.codes.astype(np.int64)
        if self.bins == 256:
            return codes.astype(np.uint8)
        top = self.bins - 1
        if top == 0:
            return np.zeros(codes.shape, dtype=np.uint8)
        return ((codes * 255 + top // 2) // top).astype(np.uint8)

    def __eq__(self, other):
        if not isinstance(other, FeatureImage):
            return NotImplemented
        return (
            self.bins == other.bins
            and self.descriptor_id == other.descriptor_id
            and np.array_equal(self.codes, other.codes)
        )

    def __repr__(self):
        return (
            f"FeatureImage({self.descriptor_id}, height={self.height}, "
            f"width={self.width}, bins={self.bins})"
        )


ImageLike = Union[GrayImage, np.ndarray]


def as_pixels(img: ImageLike) -> np.ndarray:
    """Return the uint8 pixel array of a GrayImage or a 2-D array."""
    if isinstance(img, GrayImage):
        return img.pixels
    return GrayImage(img).pixels


def to_grayscale(image: np.ndarray) -> GrayImage:
    """Convert a decoded raster to gray.

    2-D arrays and single channel ``(H, W, 1)`` arrays pass through unchanged.
    Three or four channel arrays are taken as RGB(A) and mapped with
    ``round(0.299 R + 0.587 G + 0.114 B)``, halves rounded up; alpha is ignored.
    """
    a = np.asarray(image)
    if a.dtype != np.uint8:
        raise ImageDecodeError(f"unsupported pixel type {a.dtype}, expected 8-bit")
    if a.ndim == 2:
        return GrayImage(a)
    if a.ndim != 3 or a.shape[2] not in (1, 2, 3, 4):
        raise ImageDecodeError(f"unsupported raster shape {a.shape}")
    if a.shape[2] <= 2:
        # gray or gray+alpha
        return GrayImage(a[:, :, 0])
    rgb = a[:, :, :3].astype(np.int64)
    luma = (rgb @ _LUMA_WEIGHTS + 500) // 1000
    return GrayImage(np.clip(luma, 0, 255).astype(np.uint8))


def _open_bytes(path: Path) -> bytes:
    data = path.read_bytes()
    if path.suffix.lower() == ".bz2":
        data = bz2.decompress(data)
    return data


def load_image(path: Union[str, Path]) -> GrayImage:
    """Read PNG, JPEG, BMP or PPM/PGM and convert to gray.

    Files ending in ``.bz2`` (the Color FERET distribution) are decompressed first.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"image not found: {path}")
    stem_suffix = Path(path.stem).suffix if path.suffix.lower() == ".bz2" else path.suffix
    if stem_suffix.lower() not in SUPPORTED_SUFFIXES:
        raise ImageDecodeError(f"unsupported image format {stem_suffix!r}", path)
    try:
        data = _open_bytes(path)
        with Image.open(io.BytesIO(data)) as im:
            im.load()
            mode = im.mode
            if mode in ("L", "RGB", "RGBA", "LA"):
                arr = np.asarray(im)
            elif mode in ("P", "PA", "CMYK", "YCbCr"):
                arr = np.asarray(im.convert("RGB"))
            elif mode == "1":
                arr = np.asarray(im.convert("L"))
            else:
                raise ImageDecodeError(f"unsupported bit depth / mode {mode}", path)
    except ImageDecodeError:
        raise
    except (UnidentifiedImageError, OSError, ValueError, EOFError) as exc:
        raise ImageDecodeError(f"cannot decode image ({exc})", path) from exc
    try:
        return to_grayscale(arr)
    except ImageDecodeError as exc:
        raise ImageDecodeError(str(exc), path) from exc


def save_image(pixels: Union[ImageLike, FeatureImage], path: Union[str, Path]) -> Path:
    """Write 8-bit gray pixels; the format follows the suffix (``.pgm`` or ``.png`` are lossless)."""
    path = Path(path)
    if isinstance(pixels, FeatureImage):
        arr = pixels.to_display()
    else:
        arr = as_pixels(pixels)
    try:
        Image.fromarray(np.ascontiguousarray(arr, dtype=np.uint8)).save(path)
    except (OSError, KeyError, ValueError) as exc:
        raise OSError(f"cannot write image {path}: {exc}") from exc
    return path
