import json
from fractions import Fraction

import pytest

from catutil import MEASURE_IDS, MeasureOptions, MeasureReport, level_report, make_hierarchy, ordering, predict_basic_level
from catutil.hierarchy import UnknownMeasureError, format_number, report_to_json, report_to_tsv

import oracles
from conftest import D3_ROWS


def _d3_hierarchy(d3):
    ids = d3.ids
    return make_hierarchy([[ids[:4], ids[4:]], [ids[0:2], ids[2:4], ids[4:6], ids[6:8]], [[i] for i in ids]], d3)


def _columns(**cols):
    full = {mid: [0.0] * len(next(iter(cols.values()))) for mid in MEASURE_IDS}
    full.update({k.replace("_", "-"): v for k, v in cols.items()})
    return MeasureReport.from_columns(full)


class TestLevelReport:
    def test_d1_two_levels(self, d1):
        h = make_hierarchy([[d1.ids], [["i1", "i2"], ["i3", "i4"]]], d1)
        r = level_report(d1, h)
        top, bottom = r.rows
        for mid in ("cu-info-partition", "cu-info-category", "cu-quad-partition", "cu-quad-category"):
            assert top.means[mid] == 0
        assert bottom.means["cu-info-partition"] == pytest.approx(1.0, abs=1e-12)
        assert bottom.means["cu-quad-partition"] == Fraction(1, 2)
        assert (top.level, top.category_count, bottom.category_count) == (1, 1, 2)

    def test_population_only(self, d3):
        r = level_report(d3, make_hierarchy([[d3.ids]], d3))
        assert len(r) == 1
        assert all(r.rows[0].means[mid] == 0 for mid in MEASURE_IDS[:4])
        assert r.rows[0].means["cue-validity"] == 1

    def test_d3_against_oracle(self, d3):
        h = _d3_hierarchy(d3)
        r = level_report(d3, h)
        for row, level in zip(r.rows, h.levels):
            cats = [{d3.position[i] for i in c.members} for c in level.categories]
            k = len(cats)
            part = sum(oracles.mutual_information(D3_ROWS, c) for c in cats) / k
            cat = sum(oracles.info_category(D3_ROWS, c) for c in cats) / k
            qpart = sum((oracles.quad_partition(D3_ROWS, c) for c in cats), Fraction(0)) / k
            qcat = sum((oracles.quad_category(D3_ROWS, c) for c in cats), Fraction(0)) / k
            rv = [sum((oracles.rivals(D3_ROWS, c)[i] for c in cats), Fraction(0)) / k for i in range(3)]
            assert row.means["cu-info-partition"] == pytest.approx(part, abs=1e-12)
            assert row.means["cu-info-category"] == pytest.approx(cat, abs=1e-12)
            assert row.means["cu-quad-partition"] == qpart
            assert row.means["cu-quad-category"] == qcat
            assert [row.means[m] for m in ("cue-validity", "category-validity", "collocation")] == rv

    def test_duplicate_level_changes_nothing(self, d3):
        base = level_report(d3, _d3_hierarchy(d3))
        ids = d3.ids
        # the same top level again, reached through a different hierarchy shape
        other = make_hierarchy([[ids], [ids[:4], ids[4:]]], d3)
        again = level_report(d3, other)
        assert again.rows[1].means == base.rows[0].means

    def test_weighted_means(self, d1):
        h = make_hierarchy([[d1.ids], [["i1"], ["i2", "i3", "i4"]]], d1)
        r = level_report(d1, h, weighted=True)
        # P(c) = 1/4 and 3/4
        expected = Fraction(1, 4) * Fraction(1, 4) * (1 - Fraction(1, 2)) + Fraction(3, 4) * (
            Fraction(3, 4) * (Fraction(5, 9) - Fraction(1, 2))
        )
        assert r.rows[1].means["cu-quad-category"] == expected
        assert r.weighted


class TestPrediction:
    def test_strict_max(self):
        r = _columns(cu_info_partition=[0.0, 1.0])
        p = predict_basic_level(r, "cu-info-partition")
        assert (p.level, p.tie_break_used) == (2, False)

    def test_tie_broken_by_other_version(self):
        r = _columns(cu_info_partition=[0.7, 0.7], cu_quad_partition=[0.3, 0.4])
        p = predict_basic_level(r, "cu-info-partition")
        assert (p.level, p.tied, p.tie_break_used) == (2, (1, 2), True)

    def test_tie_within_epsilon(self):
        r = _columns(cu_quad_category=[0.5, 0.5 * (1 + 1e-12)], cu_info_category=[0.2, 0.1])
        p = predict_basic_level(r, "cu-quad-category")
        assert (p.level, p.tie_break_used) == (1, True)

    def test_full_tie(self):
        r = _columns(cu_info_partition=[0.7, 0.7], cu_quad_partition=[0.3, 0.3])
        p = predict_basic_level(r, "cu-info-partition")
        assert p.level is None and p.tied == (1, 2)

    def test_rival_tie_is_unbroken(self):
        r = _columns(cue_validity=[1.0, 1.0])
        p = predict_basic_level(r, "cue-validity")
        assert p.level is None and not p.tie_break_used

    def test_unknown_measure(self):
        with pytest.raises(UnknownMeasureError):
            predict_basic_level(_columns(cue_validity=[1.0]), "typicality")

    def test_rescaling_weights(self, d3):
        h = _d3_hierarchy(d3)
        for mid in MEASURE_IDS:
            a = predict_basic_level(level_report(d3, h), mid)
            b = predict_basic_level(level_report(d3.rescaled(Fraction(3, 7)), h), mid)
            assert (a.level, a.tied) == (b.level, b.tied)


class TestOrdering:
    def test_sorting(self):
        assert ordering(_columns(cue_validity=[0.2, 0.9, 0.4]), "cue-validity") == [[2], [3], [1]]

    def test_all_equal(self):
        assert ordering(_columns(cue_validity=[0.5, 0.5, 0.5]), "cue-validity") == [[1, 2, 3]]

    def test_base_invariance(self, d3):
        h = _d3_hierarchy(d3)
        for mid in ("cu-info-partition", "cu-info-category"):
            assert ordering(level_report(d3, h), mid) == ordering(level_report(d3, h, MeasureOptions(log_base=2.718281828459045)), mid)


class TestSerialization:
    def test_tsv_columns(self, d1):
        h = make_hierarchy([[d1.ids], [["i1", "i2"], ["i3", "i4"]]], d1, ["all", "halves"])
        text = report_to_tsv(level_report(d1, h))
        lines = text.splitlines()
        assert lines[0] == "# log-base=2 feature-rule=modal dimensions=all level-means=unweighted"
        assert lines[1].split("\t") == ["level", "name", "categories", *MEASURE_IDS]
        assert lines[3].split("\t")[:5] == ["2", "halves", "2", "1", "0.5"]

    def test_json(self, d1):
        h = make_hierarchy([[d1.ids], [["i1", "i2"], ["i3", "i4"]]], d1)
        doc = json.loads(report_to_json(level_report(d1, h, MeasureOptions(feature_rule="all-weighted"))))
        assert doc["options"]["feature_rule"] == "all-weighted"
        assert doc["levels"][1]["means"]["cu-quad-category"] == 0.25

    def test_twelve_digits(self):
        assert format_number(Fraction(1, 3)) == "0.333333333333"
