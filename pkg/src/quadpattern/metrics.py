"""Retrieval and recognition metrics: precision/recall, F-score, ANMRR, CMC.

Every function accepts rankings as :class:`~quadpattern.matching.RankedList`
or as the compact :class:`QueryOutcome`; only the relevant ranks, gallery size
and labels are used.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Hashable, Iterable, NamedTuple, Optional, Sequence, Union

import numpy as np

from .matching import RankedList

# Published CSQP figures per database (percent), shown next to benchmark output.
PUBLISHED_CSQP = {
    "casia": {"max_arp": 58.03, "max_arr": 26.4, "fscore": 25.3, "anmrr": 69.0},
    "feret": {"max_arp": 91.0, "max_arr": 13.0, "fscore": 13.4, "anmrr": 76.0},
    "lfw": {"max_arp": 53.0, "max_arr": 3.6, "fscore": 3.45, "anmrr": 94.0},
}
REFERENCE_BAND = 2.0

K_RULES = ("max_class", "2ng")


class UndefinedQueryError(ValueError):
    """A query has no relevant gallery item, so recall and ANMRR are undefined."""


class ConfigurationError(ValueError):
    pass


def _item(x):
    return x.item() if isinstance(x, np.generic) else x


@dataclass(frozen=True)
class QueryOutcome:
    """What the metrics need from one ranking, without the full gallery ordering."""

    query_id: Hashable
    query_label: Hashable
    size: int
    relevant_ranks: np.ndarray
    predicted_label: Hashable

    @property
    def n_relevant(self) -> int:
        return len(self.relevant_ranks)

    @classmethod
    def from_ranking(cls, ranked: RankedList) -> "QueryOutcome":
        return cls(
            _item(ranked.query_id),
            _item(ranked.query_label),
            ranked.size,
            ranked.relevant_ranks.astype(np.int64),
            _item(ranked.predicted_label),
        )


Ranking = Union[RankedList, QueryOutcome]


def precision_recall_at(ranked: Ranking, n: int) -> tuple[float, float]:
    """Precision and recall over the top ``n`` entries."""
    if not 1 <= n <= ranked.size:
        raise ValueError(f"cutoff {n} outside 1..{ranked.size}")
    if ranked.n_relevant == 0:
        raise UndefinedQueryError(f"query {ranked.query_id!r} has no relevant gallery item")
    hits = int(np.count_nonzero(np.asarray(ranked.relevant_ranks) <= n))
    return hits / n, hits / ranked.n_relevant


def _check_queries(rankings: Sequence[Ranking]):
    if len(rankings) == 0:
        raise ValueError("no queries")
    for r in rankings:
        if r.n_relevant == 0:
            raise UndefinedQueryError(f"query {r.query_id!r} has no relevant gallery item")


def _hits_table(rankings: Sequence[Ranking], n_max: int) -> np.ndarray:
    """``hits[q, n-1]`` = relevant items of query ``q`` within the top ``n``."""
    ns = np.arange(1, n_max + 1)
    return np.stack(
        [np.searchsorted(np.asarray(r.relevant_ranks), ns, side="right") for r in rankings]
    )


def _class_groups(rankings: Sequence[Ranking]) -> list[np.ndarray]:
    groups: dict = {}
    for q, r in enumerate(rankings):
        groups.setdefault(r.query_label, []).append(q)
    return [np.array(v) for v in groups.values()]


def _harmonic(p: np.ndarray, r: np.ndarray) -> np.ndarray:
    s = p + r
    return np.divide(2 * p * r, s, out=np.zeros_like(s, dtype=float), where=s > 0)


class RetrievalPoint(NamedTuple):
    arp: float
    arr: float
    fscore: float


def _retrieval_table(rankings: Sequence[Ranking], n_max: int):
    _check_queries(rankings)
    smallest = min(r.size for r in rankings)
    if not 1 <= n_max <= smallest:
        raise ValueError(f"cutoff {n_max} outside 1..{smallest}")
    hits = _hits_table(rankings, n_max).astype(np.float64)
    precision = hits / np.arange(1, n_max + 1)
    recall = hits / np.array([r.n_relevant for r in rankings], dtype=np.float64)[:, None]
    arp = precision.mean(axis=0)
    arr = recall.mean(axis=0)
    per_class = [
        _harmonic(precision[g].mean(axis=0), recall[g].mean(axis=0))
        for g in _class_groups(rankings)
    ]
    fscore = np.mean(per_class, axis=0)
    return arp, arr, fscore


def arp_arr_fscore(rankings: Sequence[Ranking], n: int) -> RetrievalPoint:
    """Mean precision, mean recall and class-averaged F-score at cutoff ``n``.

    The F-score is the harmonic mean of each class's mean precision and mean
    recall, averaged over classes; a class with P + R = 0 scores 0.
    """
    arp, arr, f = _retrieval_table(rankings, n)
    return RetrievalPoint(float(arp[-1]), float(arr[-1]), float(f[-1]))


def nmrr(relevant_ranks: Sequence[int], n_ground_truth: int, k: float) -> float:
    """Normalised modified retrieval rank of one query (MPEG-7).

    Ranks beyond ``k`` are replaced by the penalty ``1.25 * k``.
    """
    ng = n_ground_truth
    if ng < 1:
        raise UndefinedQueryError("NMRR needs at least one ground-truth item")
    if k < ng:
        raise ConfigurationError(f"K={k} is smaller than the ground-truth size {ng}")
    ranks = np.asarray(relevant_ranks, dtype=np.float64)
    if len(ranks) != ng:
        raise ValueError(f"expected {ng} ground-truth ranks, got {len(ranks)}")
    penalised = np.where(ranks <= k, ranks, 1.25 * k)
    avr = penalised.sum() / ng
    mrr = avr - 0.5 - ng / 2
    return float(mrr / (1.25 * k - 0.5 - ng / 2))


def k_for(rule: Union[str, int], n_relevant: int, max_class_size: Optional[int]) -> int:
    if isinstance(rule, (int, np.integer)) and not isinstance(rule, bool):
        return int(rule)
    if rule == "max_class":
        if max_class_size is None:
            raise ConfigurationError("K rule 'max_class' needs the largest class size")
        return int(max_class_size)
    if rule == "2ng":
        return 2 * n_relevant
    raise ConfigurationError(f"unknown K rule {rule!r}; use one of {K_RULES} or an integer")


def anmrr(
    rankings: Sequence[Ranking],
    k_rule: Union[str, int] = "max_class",
    max_class_size: Optional[int] = None,
) -> float:
    """Average NMRR over queries, in [0, 1]; 0 means every relevant item ranks first.

    ``k_rule`` picks the per-query cutoff K: ``"max_class"`` uses the largest
    class size (``max_class_size``, or the largest ground-truth count among
    the queries when not given), ``"2ng"`` uses twice the query's own
    ground-truth count, and an integer fixes K for all queries.
    """
    _check_queries(rankings)
    if k_rule == "max_class" and max_class_size is None:
        max_class_size = max(r.n_relevant for r in rankings)
    values = [
        nmrr(r.relevant_ranks, r.n_relevant, k_for(k_rule, r.n_relevant, max_class_size))
        for r in rankings
    ]
    return float(np.mean(values))


@dataclass
class RetrievalReport:
    ranks: list[int]
    arp: list[float]
    arr: list[float]
    fscore: list[float]
    fscore_global: list[float]
    anmrr: float
    n_max: int
    k_rule: str
    excluded: list = field(default_factory=list)

    @property
    def per_rank(self) -> list[tuple[int, float, float, float]]:
        return list(zip(self.ranks, self.arp, self.arr, self.fscore))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["rank", "arp", "arr", "fscore"])
        for n, p, r, f in self.per_rank:
            w.writerow([n, f"{p:.10f}", f"{r:.10f}", f"{f:.10f}"])
        return buf.getvalue()


def retrieval_report(
    rankings: Sequence[Ranking],
    n_max: int,
    k_rule: Union[str, int] = "max_class",
    max_class_size: Optional[int] = None,
) -> RetrievalReport:
    """ARP/ARR/F for every cutoff 1..n_max plus ANMRR.

    Queries without relevant gallery items are left out and listed in
    ``excluded``.
    """
    valid = [r for r in rankings if r.n_relevant > 0]
    excluded = [_item(r.query_id) for r in rankings if r.n_relevant == 0]
    if not valid:
        raise ValueError("no evaluable probes")
    arp, arr, f = _retrieval_table(valid, n_max)
    return RetrievalReport(
        ranks=list(range(1, n_max + 1)),
        arp=[float(v) for v in arp],
        arr=[float(v) for v in arr],
        fscore=[float(v) for v in f],
        fscore_global=[float(v) for v in _harmonic(arp, arr)],
        anmrr=anmrr(valid, k_rule, max_class_size),
        n_max=n_max,
        k_rule=str(k_rule),
        excluded=excluded,
    )


@dataclass
class RecognitionReport:
    recognition_rate: float
    cmc: list[float]
    total_probes: int
    matches: int
    excluded: list = field(default_factory=list)

    def cmc_at(self, rank: int) -> float:
        """CMC value at a 1-based rank."""
        return self.cmc[rank - 1]


def recognition_rate(
    rankings: Iterable[Ranking], r_max: Optional[int] = None
) -> RecognitionReport:
    """Rank-1 recognition rate (percent) and CMC for leave-one-out rankings.

    A probe matches at rank r when a gallery item of its class appears within
    the first r entries. ``cmc[0]`` is rank 1. Probes whose class has no other
    member can never match; they are left out and listed in ``excluded``.
    """
    rankings = list(rankings)
    valid = [r for r in rankings if r.n_relevant > 0]
    excluded = [_item(r.query_id) for r in rankings if r.n_relevant == 0]
    if not valid:
        raise ValueError("no evaluable probes")
    if r_max is None:
        r_max = max(r.size for r in valid)
    first = np.array([int(np.asarray(r.relevant_ranks)[0]) for r in valid])
    n = len(valid)
    matches = int(np.count_nonzero(first == 1))
    counts = np.searchsorted(np.sort(first), np.arange(1, r_max + 1), side="right")
    return RecognitionReport(
        recognition_rate=matches * 100 / n,
        cmc=[int(c) / n for c in counts],
        total_probes=n,
        matches=matches,
        excluded=excluded,
    )


def reference_comparison(report: RetrievalReport, database: str) -> dict:
    """Put this run's figures next to the published CSQP values for ``database``.

    Values are percentages; ``within_band`` is advisory only.
    """
    ref = PUBLISHED_CSQP[database.lower()]
    ours = {
        "max_arp": 100 * max(report.arp),
        "max_arr": 100 * max(report.arr),
        "fscore": 100 * max(report.fscore),
        "anmrr": 100 * report.anmrr,
    }
    return {
        key: {
            "run": round(ours[key], 4),
            "reference": ref[key],
            "within_band": abs(ours[key] - ref[key]) <= REFERENCE_BAND,
        }
        for key in ref
    }
