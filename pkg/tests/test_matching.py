import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from quadpattern.csqp import FeatureVector
from quadpattern.matching import (
    IncompatibleFeaturesError,
    chi_square,
    classify_1nn,
    rank_gallery,
)

histograms = arrays(np.int64, 8, elements=st.integers(0, 50)).filter(lambda a: a.sum() > 0)


def fv(*counts, tag="t"):
    return FeatureVector(np.array(counts), tag)


class TestChiSquare:
    def test_identical(self):
        x = fv(3, 0, 5, 1)
        assert chi_square(x, x) == 0.0

    def test_disjoint_two_bins(self):
        assert chi_square(fv(1, 0), fv(0, 1)) == 1.0

    def test_two_thirds_one_third(self):
        assert chi_square(fv(2, 1), fv(1, 2)) == pytest.approx(1 / 9, abs=1e-15)

    def test_raw_mode(self):
        # raw counts (4,0) vs (0,2): 0.5 * (16/4 + 4/2) = 3
        assert chi_square(fv(4, 0), fv(0, 2), normalize=False) == 3.0
        assert chi_square(fv(4, 0), fv(0, 2)) == 1.0

    def test_incompatible(self):
        with pytest.raises(IncompatibleFeaturesError):
            chi_square(fv(1, 2), fv(1, 2, 3))
        with pytest.raises(IncompatibleFeaturesError):
            chi_square(fv(1, 2, tag="a"), fv(1, 2, tag="b"))

    @settings(max_examples=200)
    @given(histograms, histograms)
    def test_matches_rational_oracle(self, a, b):
        expected = float(oracles.chi_square(a.tolist(), b.tolist()))
        assert chi_square(fv(*a), fv(*b)) == pytest.approx(expected, rel=1e-12, abs=1e-15)

    @given(histograms, histograms, st.integers(1, 9))
    def test_metric_properties(self, a, b, k):
        x, y = fv(*a), fv(*b)
        d = chi_square(x, y)
        assert d == chi_square(y, x)
        assert d >= 0
        assert chi_square(fv(*(a * k)), fv(*(b * k))) == pytest.approx(d, abs=1e-15)
        if d == 0:
            assert np.allclose(a / a.sum(), b / b.sum())


class TestRanking:
    def test_self_match_first(self):
        q = fv(5, 1, 0, 2)
        gallery = [("a", fv(1, 1, 1, 1), "x"), ("b", fv(5, 1, 0, 2), "y"), ("c", fv(0, 0, 1, 0), "z")]
        r = rank_gallery(q, gallery, "y")
        assert r.entries[0].gallery_id == "b"
        assert r.entries[0].distance == 0.0
        assert r.entries[0].relevant
        assert classify_1nn(r) == "y"

    def test_ties_keep_insertion_order(self):
        q = fv(1, 0)
        gallery = [("first", fv(0, 1), "a"), ("second", fv(0, 1), "b")]
        r = rank_gallery(q, gallery, "b")
        assert list(r.gallery_ids) == ["first", "second"]
        assert classify_1nn(r) == "a"

    def test_hand_distances(self):
        # normalised query (1, 0); an item (1-p, p) sits at distance p / (2 - p)
        # -> p = 8/14, 2/11, 6/13 give 0.4, 0.1, 0.3
        q = fv(1, 0)
        gallery = [
            (1, fv(6, 8), "a"),
            (2, fv(9, 2), "a"),
            (3, fv(7, 6), "a"),
        ]
        r = rank_gallery(q, gallery, "a")
        assert list(r.gallery_ids) == [2, 3, 1]
        assert r.distances.tolist() == pytest.approx([0.1, 0.3, 0.4])

    def test_relevance_flags_and_permutation(self, rng):
        gallery = [(i, fv(*rng.integers(0, 9, 6) + 1), i % 3) for i in range(12)]
        r = rank_gallery(fv(*rng.integers(1, 9, 6)), gallery, 1)
        assert sorted(r.gallery_ids) == list(range(12))
        assert np.all(np.diff(r.distances) >= 0)
        for e in r:
            assert e.relevant == (e.gallery_id % 3 == 1)
        assert r.n_relevant == 4
        assert len(r.relevant_ranks) == 4

    def test_single_item(self):
        r = rank_gallery(fv(1, 2), [("only", fv(2, 1), "L")], "Q")
        assert classify_1nn(r) == "L"
        assert not r.entries[0].relevant

    def test_errors(self):
        with pytest.raises(ValueError):
            rank_gallery(fv(1, 2), [], "a")
        with pytest.raises(IncompatibleFeaturesError):
            rank_gallery(fv(1, 2), [("a", fv(1, 2, 3), "x")], "x")

    @settings(max_examples=50)
    @given(st.lists(histograms, min_size=1, max_size=8), histograms)
    def test_duplicate_is_always_found(self, others, query):
        gallery = [(i, fv(*h), f"other{i}") for i, h in enumerate(others)]
        gallery.insert(len(gallery) // 2, ("dup", fv(*query), "me"))
        r = rank_gallery(fv(*query), gallery, "me")
        assert r.distances[0] == 0.0
        top = [e for e in r if e.distance == 0.0]
        assert any(e.gallery_id == "dup" for e in top)
