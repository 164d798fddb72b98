import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adatsk.errors import CapacityError, InvalidArgumentError
from adatsk.rulebase import (
    FuzzyPartition,
    build_coco,
    build_enfrb,
    build_fuco,
    init_consequents,
    place_centers,
)


class TestCoCo:
    def test_three_by_two(self):
        assert build_coco(3, 2).rows.tolist() == [[1, 1], [2, 2], [3, 3]]

    def test_single_set(self):
        assert build_coco(1, 5).rows.tolist() == [[1] * 5]

    def test_single_feature(self):
        assert build_coco(2, 1).rows.tolist() == [[1], [2]]

    @pytest.mark.parametrize("S,D", [(0, 3), (3, 0)])
    def test_zero_counts(self, S, D):
        with pytest.raises(InvalidArgumentError):
            build_coco(S, D)


class TestFuCo:
    def test_enumeration_order(self):
        assert build_fuco(2, 2).rows.tolist() == [[1, 1], [1, 2], [2, 1], [2, 2]]

    def test_single_feature(self):
        assert build_fuco(3, 1).rows.tolist() == [[1], [2], [3]]

    def test_capacity_guard(self):
        with pytest.raises(CapacityError, match="1000000"):
            build_fuco(10, 7)

    def test_all_tuples_once(self):
        idx = build_fuco(3, 3)
        assert idx.n_rules == 27
        assert len(set(idx.as_tuples())) == 27


class TestEnFRB:
    def test_two_sets_two_features(self):
        expected = [[1, 1], [2, 1], [1, 2], [2, 1], [1, 2],
                    [2, 2], [1, 2], [2, 1], [1, 2], [2, 1]]
        assert build_enfrb(2, 2).rows.tolist() == expected

    @pytest.mark.parametrize("S,D,R", [(3, 4, 27), (5, 9, 95)])
    def test_row_counts(self, S, D, R):
        assert build_enfrb(S, D).n_rules == R

    def test_needs_two_sets(self):
        with pytest.raises(InvalidArgumentError):
            build_enfrb(1, 3)

    def test_wraparound_rows(self):
        # the rows around base 1 and base S shift cyclically
        rows = build_enfrb(4, 3).as_tuples()
        assert (4, 1, 1) in rows and (2, 1, 1) in rows
        assert (3, 4, 4) in rows and (1, 4, 4) in rows

    @given(st.integers(2, 8), st.integers(1, 12))
    def test_count_formula(self, S, D):
        assert build_enfrb(S, D).n_rules == (2 * D + 1) * S

    @given(st.integers(2, 6), st.integers(1, 6))
    def test_one_position_from_base(self, S, D):
        rows = build_enfrb(S, D).rows.reshape(S, 2 * D + 1, D)
        for s in range(S):
            diff = rows[s] != s + 1
            assert np.all(diff.sum(axis=1) <= 1)
            assert np.all((rows[s] >= 1) & (rows[s] <= S))

    @given(st.integers(3, 7), st.integers(3, 6))
    def test_distinct_for_three_or_more_sets(self, S, D):
        rows = build_enfrb(S, D).as_tuples()
        assert len(set(rows)) == len(rows)

    @pytest.mark.parametrize("D", [1, 2])
    def test_neighbouring_bases_collide_in_low_dimension(self, D):
        # with at most two features a shifted row of base s can equal a shifted row of base s+1
        rows = build_enfrb(3, D).as_tuples()
        assert len(set(rows)) < len(rows)


@pytest.mark.parametrize("S", [1, 2, 3])
@pytest.mark.parametrize("D", [1, 2, 3])
def test_inclusions(S, D):
    coco = set(build_coco(S, D).as_tuples())
    fuco = set(build_fuco(S, D).as_tuples())
    assert coco <= fuco
    if S >= 2:
        en = set(build_enfrb(S, D).as_tuples())
        assert coco <= en <= fuco


class TestPlaceCenters:
    def test_three_sets(self):
        X = np.array([[0.0], [0.3], [1.0]])
        np.testing.assert_allclose(place_centers(X, 3).centers, [[0.0, 0.5, 1.0]])

    def test_five_sets(self):
        X = np.array([[0.0], [1.0]])
        np.testing.assert_allclose(place_centers(X, 5).centers, [[0, 0.25, 0.5, 0.75, 1]])

    def test_constant_feature(self):
        X = np.full((4, 1), 0.4)
        np.testing.assert_array_equal(place_centers(X, 3).centers, [[0.4, 0.4, 0.4]])

    def test_single_set_midpoint(self):
        X = np.array([[0.2, 1.0], [0.6, 3.0]])
        np.testing.assert_allclose(place_centers(X, 1).centers, [[0.4], [2.0]])

    def test_empty(self):
        with pytest.raises(InvalidArgumentError):
            place_centers(np.zeros((0, 3)), 3)

    def test_spans_range_and_sorted(self):
        rng = np.random.default_rng(5)
        X = rng.uniform(-2, 3, size=(30, 6))
        c = place_centers(X, 7).centers
        np.testing.assert_array_equal(c[:, 0], X.min(axis=0))
        np.testing.assert_array_equal(c[:, -1], X.max(axis=0))
        assert np.all(np.diff(c, axis=1) >= 0)

    def test_rule_centers_lookup(self):
        part = FuzzyPartition(np.array([[0.0, 0.5, 1.0], [10.0, 20.0, 30.0]]))
        idx = build_fuco(3, 2)
        m = part.rule_centers(idx)
        assert m[5].tolist() == [0.5, 30.0]  # row (2, 3)


class TestInitConsequents:
    def test_small(self):
        p = init_consequents(3, 2, 2)
        assert p.size == 18 and p.sum() == 0

    def test_shape(self):
        assert init_consequents(95, 9, 4).shape == (95, 10, 4)
