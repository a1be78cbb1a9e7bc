"""Chi-square histogram distance, gallery ranking and 1-NN classification."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterator, NamedTuple, Sequence, Union

import numpy as np

from .csqp import FeatureVector


class IncompatibleFeaturesError(ValueError):
    """Feature vectors come from different descriptors or have different bin counts."""


def _check_compatible(x: FeatureVector, y: FeatureVector):
    if x.bins != y.bins:
        raise IncompatibleFeaturesError(f"bin count mismatch: {x.bins} vs {y.bins}")
    if x.descriptor_id != y.descriptor_id:
        raise IncompatibleFeaturesError(
            f"descriptor mismatch: {x.descriptor_id} vs {y.descriptor_id}"
        )


def _prepare(counts: np.ndarray, normalize: bool) -> np.ndarray:
    counts = np.asarray(counts, dtype=np.float64)
    if not normalize:
        return counts
    total = counts.sum(axis=-1, keepdims=True)
    if np.any(total == 0):
        raise ValueError("cannot normalise an empty histogram")
    return counts / total


def chi_square_rows(x: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Half chi-square between vector ``x`` and every row of ``ys`` (already prepared).

    Bins where both entries are zero contribute nothing.
    """
    s = x + ys
    d = x - ys
    num = d * d
    out = np.divide(num, s, out=np.zeros_like(num), where=s > 0)
    return 0.5 * out.sum(axis=-1)


def chi_square(x: FeatureVector, y: FeatureVector, normalize: bool = True) -> float:
    """``0.5 * sum((x_i - y_i)^2 / (x_i + y_i))``.

    With ``normalize`` (the default) both histograms are divided by their
    totals first, so images of different sizes are comparable. Pass
    ``normalize=False`` to work on raw counts.
    """
    _check_compatible(x, y)
    a = _prepare(x.counts, normalize)
    b = _prepare(y.counts, normalize)
    return float(chi_square_rows(a, b[None, :])[0])


class RankEntry(NamedTuple):
    gallery_id: Hashable
    distance: float
    relevant: bool
    label: Hashable


@dataclass(frozen=True, eq=False)
class RankedList:
    """Gallery items ordered by ascending distance from one query.

    Stored column-wise; ``entries`` yields per-item tuples.
    """

    query_id: Hashable
    query_label: Hashable
    gallery_ids: np.ndarray
    distances: np.ndarray
    labels: np.ndarray
    relevant: np.ndarray

    def __len__(self):
        return len(self.distances)

    @property
    def size(self) -> int:
        return len(self.distances)

    @property
    def entries(self) -> list[RankEntry]:
        return list(iter(self))

    def __iter__(self) -> Iterator[RankEntry]:
        for gid, dist, rel, lab in zip(
            self.gallery_ids, self.distances, self.relevant, self.labels
        ):
            yield RankEntry(gid, float(dist), bool(rel), lab)

    @property
    def n_relevant(self) -> int:
        return int(np.count_nonzero(self.relevant))

    @property
    def relevant_ranks(self) -> np.ndarray:
        """1-based ranks of the relevant entries."""
        return np.flatnonzero(self.relevant) + 1

    @property
    def predicted_label(self):
        if self.size == 0:
            raise ValueError("empty ranking")
        return self.labels[0]


def rank_rows(
    query: np.ndarray,
    gallery: np.ndarray,
    gallery_ids: Sequence,
    gallery_labels: Sequence,
    query_label,
    query_id=None,
) -> RankedList:
    """Rank prepared (normalised or raw) gallery rows against a prepared query row."""
    if len(gallery) == 0:
        raise ValueError("gallery is empty")
    dist = chi_square_rows(query, gallery)
    order = np.argsort(dist, kind="stable")
    ids = np.asarray(gallery_ids, dtype=object)[order]
    labels = np.asarray(gallery_labels)[order]
    relevant = np.asarray(labels == query_label, dtype=bool)
    return RankedList(query_id, query_label, ids, dist[order], labels, relevant)


def rank_gallery(
    query: FeatureVector,
    gallery: Sequence[tuple],
    query_label,
    query_id=None,
    normalize: bool = True,
) -> RankedList:
    """Sort ``(id, FeatureVector, label)`` gallery items by ascending distance to ``query``.

    Equal distances keep gallery insertion order.
    """
    if not gallery:
        raise ValueError("gallery is empty")
    for _, fv, _ in gallery:
        _check_compatible(query, fv)
    ids = [g[0] for g in gallery]
    labels = [g[2] for g in gallery]
    rows = _prepare(np.stack([g[1].counts for g in gallery]), normalize)
    q = _prepare(query.counts, normalize)
    return rank_rows(q, rows, ids, labels, query_label, query_id)


def classify_1nn(ranked: RankedList):
    """Label of the nearest gallery item."""
    return ranked.predicted_label


def prepare_matrix(vectors: Union[Sequence[FeatureVector], np.ndarray], normalize: bool = True):
    """Stack feature vectors into a float matrix ready for :func:`rank_rows`."""
    if isinstance(vectors, np.ndarray):
        return _prepare(vectors, normalize)
    return _prepare(np.stack([v.counts for v in vectors]), normalize)
