"""Leave-one-out protocol: every image is a probe against all the others."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .dataset import FeatureCache
from .matching import prepare_matrix, rank_rows
from .metrics import (
    QueryOutcome,
    RecognitionReport,
    RetrievalReport,
    recognition_rate,
    retrieval_report,
)

_SHARED: dict = {}


def _init_worker(matrix, ids, labels):
    _SHARED["matrix"] = matrix
    _SHARED["ids"] = ids
    _SHARED["labels"] = labels


def _probe(q: int, matrix: np.ndarray, ids: np.ndarray, labels: np.ndarray) -> QueryOutcome:
    keep = np.ones(len(ids), dtype=bool)
    keep[q] = False
    ranked = rank_rows(matrix[q], matrix[keep], ids[keep], labels[keep], labels[q], ids[q])
    return QueryOutcome.from_ranking(ranked)


def _probe_chunk(qs: Sequence[int]) -> list[QueryOutcome]:
    return [_probe(q, _SHARED["matrix"], _SHARED["ids"], _SHARED["labels"]) for q in qs]


def leave_one_out(
    counts: np.ndarray,
    labels: Sequence[str],
    ids: Optional[Sequence[str]] = None,
    normalize: bool = True,
    jobs: int = 1,
) -> list[QueryOutcome]:
    """Rank the remaining N-1 items for each of the N items, in item order.

    ``jobs > 1`` splits the probes over worker processes; each probe is
    computed by the same code either way, so results do not depend on it.
    """
    n = len(labels)
    if n < 2:
        raise ValueError("leave-one-out needs at least two items")
    matrix = prepare_matrix(np.asarray(counts), normalize)
    ids_arr = np.asarray(list(ids) if ids is not None else range(n), dtype=object)
    labels_arr = np.asarray(list(labels))
    if jobs <= 1:
        return [_probe(q, matrix, ids_arr, labels_arr) for q in range(n)]
    chunks = [list(c) for c in np.array_split(np.arange(n), min(n, jobs * 4)) if len(c)]
    with ProcessPoolExecutor(
        max_workers=jobs, initializer=_init_worker, initargs=(matrix, ids_arr, labels_arr)
    ) as pool:
        parts = list(pool.map(_probe_chunk, chunks))
    return [o for part in parts for o in part]


@dataclass
class BenchmarkConfig:
    descriptor: str = "csqp"
    normalize: bool = True
    k_rule: Union[str, int] = "max_class"
    n_max: int = 10
    csltp_threshold: int = 5
    r_max: Optional[int] = None

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be at least 1")
        if self.csltp_threshold < 0:
            raise ValueError("csltp_threshold must be non-negative")

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class BenchmarkResult:
    config: BenchmarkConfig
    retrieval: RetrievalReport
    recognition: RecognitionReport
    n_items: int
    n_max_used: int


def run_benchmark(cache: FeatureCache, config: BenchmarkConfig, jobs: int = 1) -> BenchmarkResult:
    """Leave-one-out retrieval and recognition figures for a feature cache."""
    outcomes = leave_one_out(cache.counts, cache.labels, cache.ids, config.normalize, jobs)
    if all(o.n_relevant == 0 for o in outcomes):
        raise ValueError("no evaluable probes: every class has a single image")
    class_sizes: dict = {}
    for lab in cache.labels:
        class_sizes[lab] = class_sizes.get(lab, 0) + 1
    n_max = min(config.n_max, len(cache.labels) - 1)
    retrieval = retrieval_report(
        outcomes, n_max, config.k_rule, max_class_size=max(class_sizes.values())
    )
    recognition = recognition_rate(outcomes, config.r_max)
    return BenchmarkResult(config, retrieval, recognition, len(cache.labels), n_max)
