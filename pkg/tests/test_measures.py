import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from catutil import (
    DatasetError,
    FeatureRule,
    MeasureOptions,
    cu_info_category,
    cu_info_partition,
    cu_quad_category,
    cu_quad_partition,
    rival_measures,
    uncertainty,
)
from catutil.measures import (
    cu_info_partition_by_dimension,
    cu_quad_partition_by_dimension,
    modal_value,
)

import oracles
from conftest import D3_ROWS, dataset_of, make_d1, random_rows

A_BLOCK = {"x0", "x1", "x2", "x3"}
B_PAIR = {"x2", "x3"}


class TestUncertainty:
    def test_uniform_binary(self):
        assert uncertainty([0.5, 0.5]) == 1.0

    def test_certain(self):
        assert uncertainty([1.0, 0.0]) == 0.0

    def test_eye_colors(self):
        expected = -(0.4 * math.log2(0.4) + 0.5 * math.log2(0.5) + 0.1 * math.log2(0.1))
        assert uncertainty([0.4, 0.5, 0.1]) == pytest.approx(expected, abs=1e-12)
        assert uncertainty([0.4, 0.5, 0.1]) == pytest.approx(1.3610, abs=5e-5)

    def test_natural_log(self):
        assert uncertainty([0.5, 0.5], MeasureOptions(log_base=math.e)) == pytest.approx(math.log(2))

    def test_rejects_non_distribution(self):
        with pytest.raises(ValueError):
            uncertainty([0.5, 0.6])


class TestOptions:
    @pytest.mark.parametrize("base", [1.0, 0.5, -2.0])
    def test_log_base(self, base):
        with pytest.raises(ValueError):
            MeasureOptions(log_base=base)

    def test_empty_dimension_subset(self):
        with pytest.raises(ValueError):
            MeasureOptions(dimensions=())

    def test_out_of_range_dimension(self, d1):
        with pytest.raises(ValueError):
            cu_quad_partition(d1, {"i1"}, MeasureOptions(dimensions=(3,)))

    def test_feature_rule_from_string(self):
        assert MeasureOptions(feature_rule="all-weighted").feature_rule is FeatureRule.ALL_WEIGHTED


class TestD1:
    def test_info_partition(self, d1):
        assert cu_info_partition(d1, {"i1", "i2"}) == pytest.approx(1.0, abs=1e-12)

    def test_info_category(self, d1):
        assert cu_info_category(d1, {"i1", "i2"}) == pytest.approx(0.5, abs=1e-12)

    def test_quad(self, d1):
        assert cu_quad_partition(d1, {"i1", "i2"}) == Fraction(1, 2)
        assert cu_quad_category(d1, {"i1", "i2"}) == Fraction(1, 4)

    def test_uninformative_category(self, d1):
        assert cu_quad_category(d1, {"i1", "i3"}) == 0
        assert cu_quad_partition(d1, {"i1", "i3"}) == 0
        assert cu_info_partition(d1, {"i1", "i3"}) == 0.0

    def test_rivals(self, d1):
        assert rival_measures(d1, {"i1", "i2"}) == (1, 1, 1)

    def test_whole_population(self, d1):
        assert cu_info_category(d1, d1.ids) == 0.0
        assert cu_quad_category(d1, d1.ids) == 0
        assert rival_measures(d1, d1.ids).cue_validity == 1

    def test_partition_rejects_full_and_empty(self, d1):
        for fn in (cu_info_partition, cu_quad_partition):
            with pytest.raises(DatasetError):
                fn(d1, d1.ids)
            with pytest.raises(DatasetError):
                fn(d1, set())
        with pytest.raises(DatasetError):
            cu_info_category(d1, set())
        with pytest.raises(DatasetError):
            rival_measures(d1, set())

    def test_independent_extra_dimension(self):
        d = dataset_of([("a", "p"), ("a", "q"), ("b", "p"), ("b", "q")])
        assert cu_info_category(d, {"0", "1"}) == pytest.approx(0.5, abs=1e-12)
        assert cu_info_partition_by_dimension(d, {"0", "1"})[1] == pytest.approx(0.0, abs=1e-12)


class TestD3:
    rows = D3_ROWS
    a_pos = {0, 1, 2, 3}
    b_pos = {2, 3}

    def test_info_partition_a_block(self, d3):
        ref = oracles.mutual_information(self.rows, self.a_pos)
        assert cu_info_partition(d3, A_BLOCK) == pytest.approx(ref, abs=1e-12)
        # A: 1 bit, B: 1 bit, C: 1 bit
        assert ref == pytest.approx(3.0, abs=1e-12)

    def test_quad_a_block(self, d3):
        ref = oracles.quad_partition(self.rows, self.a_pos)
        assert cu_quad_partition(d3, A_BLOCK) == ref
        assert ref == Fraction(1, 2) + Fraction(1, 4) + Fraction(1, 8)
        assert cu_quad_partition_by_dimension(d3, A_BLOCK) == [Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)]

    @pytest.mark.parametrize("rule", ["modal", "all-weighted"])
    def test_rivals_b_pair(self, d3, rule):
        got = rival_measures(d3, {"x2", "x3"}, MeasureOptions(feature_rule=rule))
        assert tuple(got) == oracles.rivals(self.rows, self.b_pos, rule=rule)

    def test_rivals_b_pair_values(self, d3):
        # A: a1 p(c|f)=1/2 p(f|c)=1; B: b2 1, 1; C: c3 (first of a tie) 1, 1/2
        got = rival_measures(d3, B_PAIR)
        assert got.cue_validity == Fraction(1 / 2 + 1 + 1) / 3
        assert got.category_validity == Fraction(1 + 1 + Fraction(1, 2)) / 3
        assert got.collocation == (Fraction(1, 2) + 1 + Fraction(1, 2)) / 3


class TestModal:
    def test_ties_to_lowest(self):
        assert modal_value([1, 3, 3]) == 1
        assert modal_value([2, 2]) == 0

    def test_single(self):
        assert modal_value([0, 0, 5]) == 2


def _random_case(seed):
    rng = random.Random(seed)
    rows = random_rows(rng, rng.randrange(2, 13), rng.randrange(1, 5), rng.randrange(2, 5))
    weights = [rng.randrange(0, 4) for _ in rows]
    if sum(weights) == 0:
        weights[0] = 1
    members = {i for i in range(len(rows)) if rng.random() < 0.5}
    return rows, weights, members


class TestAgainstOracles:
    @settings(max_examples=150, deadline=None)
    @given(st.integers(0, 2**32))
    def test_all_measures(self, seed):
        rows, weights, pos = _random_case(seed)
        d = dataset_of(rows, weights)
        ids = {str(i) for i in pos}
        w_in = sum(weights[i] for i in pos)
        if not pos or w_in == 0:
            return
        assert cu_info_category(d, ids) == pytest.approx(oracles.info_category(rows, pos, weights), abs=1e-9)
        assert cu_quad_category(d, ids) == oracles.quad_category(rows, pos, weights)
        for rule in ("modal", "all-weighted"):
            got = rival_measures(d, ids, MeasureOptions(feature_rule=rule))
            assert tuple(got) == oracles.rivals(rows, pos, weights, rule)
        if w_in == sum(weights) or len(pos) == len(rows):
            return
        assert cu_info_partition(d, ids) == pytest.approx(oracles.mutual_information(rows, pos, weights), abs=1e-9)
        assert cu_quad_partition(d, ids) == oracles.quad_partition(rows, pos, weights)


class TestInvariants:
    @settings(max_examples=150, deadline=None)
    @given(st.integers(0, 2**32))
    def test_decomposition_and_sign(self, seed):
        rows, _, pos = _random_case(seed)
        if not 0 < len(pos) < len(rows):
            return
        d = dataset_of(rows)
        c = {str(i) for i in pos}
        nc = d.complement(c)
        assert cu_info_partition(d, c) == pytest.approx(cu_info_category(d, c) + cu_info_category(d, nc), abs=1e-9)
        assert cu_quad_partition(d, c) == cu_quad_category(d, c) + cu_quad_category(d, nc)
        assert cu_info_partition(d, c) >= 0
        assert cu_quad_partition(d, c) >= 0

    def test_zero_at_independence(self):
        # every value combination equally often: blocks on dim 0 are independent of dims 1, 2
        rows = [(a, b, c) for a in "xy" for b in "pqr" for c in "st"]
        d = dataset_of(rows)
        c = {str(i) for i, r in enumerate(rows) if r[0] == "x"}
        opts = MeasureOptions(dimensions=(1, 2))
        assert abs(cu_info_partition(d, c, opts)) <= 1e-12
        assert abs(cu_info_category(d, c, opts)) <= 1e-12
        assert cu_quad_partition(d, c, opts) == 0
        assert cu_quad_category(d, c, opts) == 0

    @settings(max_examples=80, deadline=None)
    @given(st.integers(0, 2**32))
    def test_cue_validity_pointwise_monotone(self, seed):
        rng = random.Random(seed)
        rows = random_rows(rng, rng.randrange(3, 10), 2, 3)
        d = dataset_of(rows)
        big = {str(i) for i in range(len(rows)) if rng.random() < 0.7} or {"0"}
        small = {i for i in big if rng.random() < 0.6} or {next(iter(big))}
        for j in range(2):
            marg = d.marginal_weights[j]
            ws, wb = d.value_weights(small)[j], d.value_weights(big)[j]
            for v in range(len(marg)):
                if marg[v] > 0:
                    assert wb[v] / marg[v] >= ws[v] / marg[v]

    def test_category_validity_specificity(self):
        # the small category is homogeneous on dim 0, so its modal value is certain
        rows = [("a", "p"), ("a", "q"), ("b", "p"), ("a", "q")]
        d = dataset_of(rows)
        small = rival_measures(d, {"0", "1"}, MeasureOptions(dimensions=(0,)))
        big = rival_measures(d, {"0", "1", "2"}, MeasureOptions(dimensions=(0,)))
        assert small.category_validity == 1 >= big.category_validity

    @settings(max_examples=80, deadline=None)
    @given(st.integers(0, 2**32))
    def test_log_base_preserves_sign_of_differences(self, seed):
        rng = random.Random(seed)
        rows = random_rows(rng, rng.randrange(3, 10), 2, 3)
        d = dataset_of(rows)
        cats = [{str(i) for i in range(len(rows)) if rng.random() < 0.5} for _ in range(2)]
        cats = [c for c in cats if 0 < len(c) < len(rows)]
        if len(cats) < 2:
            return
        e = MeasureOptions(log_base=math.e)
        for fn in (cu_info_partition, cu_info_category):
            diff2 = fn(d, cats[0]) - fn(d, cats[1])
            diffe = fn(d, cats[0], e) - fn(d, cats[1], e)
            if abs(diff2) > 1e-9:
                assert (diff2 > 0) == (diffe > 0)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32), st.integers(1, 50))
    def test_scale_invariance(self, seed, k):
        rows, weights, pos = _random_case(seed)
        d = dataset_of(rows, weights)
        s = d.rescaled(Fraction(k, 7))
        c = {str(i) for i in pos}
        if not pos or d.weight_of(c) == 0:
            return
        assert cu_quad_category(d, c) == cu_quad_category(s, c)
        assert rival_measures(d, c) == rival_measures(s, c)
        assert cu_info_category(d, c) == pytest.approx(cu_info_category(s, c), abs=1e-12)

    def test_negative_single_category_value_is_kept(self):
        # a category mixing rare values is more uncertain than the population
        rows = [("a",)] * 6 + [("b",), ("c",)]
        d = dataset_of(rows)
        c = {"5", "6", "7"}
        assert cu_info_category(d, c) < 0
        assert cu_quad_category(d, c) < 0
