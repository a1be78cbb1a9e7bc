"""Labelled image collections and the ``QPFC1`` feature cache.

Directory layout: ``root/<class>/**/<image>``; every immediate subdirectory
of ``root`` is one class. Items are ordered by their relative POSIX path.

Cache file layout (UTF-8 text, CSV quoting)::

    QPFC1
    descriptor_id,bins,normalized,item_count,fingerprint
    <id>,<label>,<c0>,...,<c(bins-1)>      (item_count lines)
    #crc32=<8 hex digits>

The trailer checksums every byte before it.
"""

from __future__ import annotations

import csv
import io
import logging
import re
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .baselines import DescriptorSpec, get_descriptor
from .csqp import FeatureVector
from .imaging import SUPPORTED_SUFFIXES, DimensionError, ImageDecodeError, load_image

log = logging.getLogger(__name__)

CACHE_MAGIC = "QPFC1"
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


class DatasetError(ValueError):
    pass


class CacheError(ValueError):
    """Cache file is corrupt, truncated, stale or incompatible."""


@dataclass(frozen=True)
class DatasetItem:
    id: str
    path: Path
    label: str
    metadata: tuple = ()


@dataclass
class Dataset:
    root: Path
    items: list[DatasetItem]
    warnings: list[str] = field(default_factory=list)

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    @property
    def classes(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {}
        for it in self.items:
            out.setdefault(it.label, []).append(it.id)
        return out

    @property
    def paths(self) -> list[Path]:
        return [it.path for it in self.items]

    @property
    def max_class_size(self) -> int:
        return max(len(v) for v in self.classes.values())

    def fingerprint(self) -> str:
        return fingerprint([it.id for it in self.items])


def fnv1a_64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _MASK64
    return h


def fingerprint(relative_paths: Sequence[str]) -> str:
    """64-bit FNV-1a over the sorted relative paths, each terminated by a newline."""
    blob = "".join(p + "\n" for p in sorted(relative_paths)).encode("utf-8")
    return f"{fnv1a_64(blob):016x}"


def _is_image(p: Path) -> bool:
    name = p.name.lower()
    if name.endswith(".bz2"):
        name = name[:-4]
    return any(name.endswith(s) for s in SUPPORTED_SUFFIXES)


def scan_dataset(root: Union[str, Path]) -> Dataset:
    """One class per immediate subdirectory of ``root``; images found recursively."""
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"dataset root is not a directory: {root}")
    warnings = []
    items = []
    class_dirs = sorted((p for p in root.iterdir() if p.is_dir()), key=lambda p: p.name)
    for stray in sorted(p.name for p in root.iterdir() if p.is_file()):
        warnings.append(f"ignored file outside any class directory: {stray}")
    for cdir in class_dirs:
        try:
            files = [p for p in cdir.rglob("*") if p.is_file()]
        except OSError as exc:
            warnings.append(f"unreadable class directory {cdir}: {exc}")
            continue
        for p in files:
            if _is_image(p):
                items.append(DatasetItem(p.relative_to(root).as_posix(), p, cdir.name))
            else:
                warnings.append(f"skipped non-image file {p.relative_to(root).as_posix()}")
    if not items:
        raise DatasetError(f"no classes found under {root}")
    items.sort(key=lambda it: it.id)
    return Dataset(root, items, sorted(warnings))


# Color FERET names look like 00001_930831_fa.ppm(.bz2) or 00002_940128_fb_a.ppm
_FERET_NAME = re.compile(r"^(?P<subject>\d{5})_(?P<date>\d{6})_(?P<pose>[a-z]{2})(?:_[a-z])?\.")


def scan_feret(root: Union[str, Path], poses: Optional[Sequence[str]] = None) -> Dataset:
    """Color FERET adapter: subject id is the class, pose code kept as metadata.

    ``poses`` keeps only the listed pose codes (``fa``, ``fb``, ``pl``, ``hl``...).
    """
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"dataset root is not a directory: {root}")
    keep = None if poses is None else {p.lower() for p in poses}
    items, warnings = [], []
    for p in sorted(root.rglob("*")):
        if not p.is_file() or not _is_image(p):
            continue
        m = _FERET_NAME.match(p.name)
        if m is None:
            warnings.append(f"unrecognised FERET file name {p.name}")
            continue
        if keep is not None and m["pose"] not in keep:
            continue
        items.append(
            DatasetItem(
                p.relative_to(root).as_posix(),
                p,
                m["subject"],
                (("pose", m["pose"]), ("date", m["date"])),
            )
        )
    if not items:
        raise DatasetError(f"no classes found under {root}")
    items.sort(key=lambda it: it.id)
    return Dataset(root, items, warnings)


@dataclass
class FeatureCache:
    descriptor_id: str
    bins: int
    normalized: bool
    fingerprint: str
    ids: list[str]
    labels: list[str]
    counts: np.ndarray
    skipped: list[dict] = field(default_factory=list)

    def __len__(self):
        return len(self.ids)

    def __eq__(self, other):
        if not isinstance(other, FeatureCache):
            return NotImplemented
        return (
            self.descriptor_id == other.descriptor_id
            and self.bins == other.bins
            and self.normalized == other.normalized
            and self.fingerprint == other.fingerprint
            and self.ids == other.ids
            and self.labels == other.labels
            and np.array_equal(self.counts, other.counts)
        )

    def vectors(self) -> list[FeatureVector]:
        return [FeatureVector(c, self.descriptor_id) for c in self.counts]


def _describe_path(args):
    path, spec = args
    try:
        fv = spec.describe(load_image(path))
    except (ImageDecodeError, DimensionError, FileNotFoundError, OSError) as exc:
        return None, f"{type(exc).__name__}: {exc}"
    return fv.counts, None


def extract_all(
    ds: Dataset,
    d: Union[str, DescriptorSpec] = "csqp",
    jobs: int = 1,
    normalized: bool = True,
) -> FeatureCache:
    """Describe every dataset image, in dataset order.

    Images that fail to load or are too small are listed in ``skipped``
    rather than dropped silently; the call fails only if every item fails.
    ``normalized`` is recorded in the header as the intended matching mode;
    raw counts are always stored.
    """
    spec = d if isinstance(d, DescriptorSpec) else get_descriptor(d)
    work = [(it.path, spec) for it in ds.items]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_describe_path, work, chunksize=16))
    else:
        results = [_describe_path(w) for w in work]
    ids, labels, rows, skipped = [], [], [], []
    for it, (counts, err) in zip(ds.items, results):
        if counts is None:
            skipped.append({"id": it.id, "path": str(it.path), "reason": err})
            log.warning("skipping %s: %s", it.id, err)
            continue
        ids.append(it.id)
        labels.append(it.label)
        rows.append(counts)
    if not rows:
        raise DatasetError(f"every image in {ds.root} failed to load or describe")
    return FeatureCache(
        descriptor_id=spec.tag,
        bins=spec.bins,
        normalized=normalized,
        fingerprint=ds.fingerprint(),
        ids=ids,
        labels=labels,
        counts=np.stack(rows).astype(np.int64),
        skipped=skipped,
    )


def dumps_cache(c: FeatureCache) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    buf.write(CACHE_MAGIC + "\n")
    w.writerow([c.descriptor_id, c.bins, int(c.normalized), len(c.ids), c.fingerprint])
    for i, lab, row in zip(c.ids, c.labels, c.counts):
        w.writerow([i, lab, *(int(v) for v in row)])
    body = buf.getvalue()
    return body + f"#crc32={zlib.crc32(body.encode('utf-8')):08x}\n"


def save_cache(c: FeatureCache, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_bytes(dumps_cache(c).encode("utf-8"))
    return path


def load_cache(
    path: Union[str, Path],
    descriptor_id: Optional[str] = None,
    bins: Optional[int] = None,
    fingerprint: Optional[str] = None,
) -> FeatureCache:
    """Read a cache file, optionally checking it against what the caller expects."""
    path = Path(path)
    try:
        raw = path.read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CacheError(f"{path}: not a text cache file") from exc
    lines = raw.split("\n")
    if not lines or lines[0] != CACHE_MAGIC:
        found = lines[0][:16] if lines else ""
        if found.startswith("QPFC"):
            raise CacheError(f"{path}: unsupported cache version {found!r}")
        raise CacheError(f"{path}: not a {CACHE_MAGIC} cache file")
    trailer_at = raw.rfind("#crc32=")
    if trailer_at < 0 or not raw.endswith("\n"):
        raise CacheError(f"{path}: truncated cache file (missing checksum trailer)")
    body = raw[:trailer_at]
    stated = raw[trailer_at + len("#crc32=") :].strip()
    if stated != f"{zlib.crc32(body.encode('utf-8')):08x}":
        raise CacheError(f"{path}: checksum failure")
    rows = list(csv.reader(io.StringIO(body)))
    try:
        desc, nbins, norm, count, fp = rows[1]
        nbins, count = int(nbins), int(count)
    except (IndexError, ValueError) as exc:
        raise CacheError(f"{path}: malformed header") from exc
    records = rows[2:]
    if len(records) != count:
        raise CacheError(f"{path}: truncated, expected {count} records, found {len(records)}")
    ids, labels, counts = [], [], np.zeros((count, nbins), dtype=np.int64)
    for k, rec in enumerate(records):
        if len(rec) != nbins + 2:
            raise CacheError(f"{path}: record {k} has {len(rec) - 2} counts, expected {nbins}")
        ids.append(rec[0])
        labels.append(rec[1])
        counts[k] = [int(v) for v in rec[2:]]
    if descriptor_id is not None and desc != descriptor_id:
        raise CacheError(f"{path}: cache holds {desc} features, expected {descriptor_id}")
    if bins is not None and nbins != bins:
        raise CacheError(f"{path}: cache has {nbins} bins, expected {bins}")
    if fingerprint is not None and fp != fingerprint:
        raise CacheError(f"{path}: stale cache, dataset fingerprint {fp} != {fingerprint}")
    return FeatureCache(desc, nbins, norm == "1", fp, ids, labels, counts)
