"""Metric primitives: leak, consistency, TTR display rounding, Welch's test.

The Welch expectations were computed by hand from the closed-form formulas
(variance ratio, Satterthwaite dof, erfc tail), not by running this module.
"""

import math
import statistics
import sys

import pytest
from hypothesis import given
from hypothesis import strategies as st

from piisub.metrics import (
    CharNgramScorer,
    DegenerateVariance,
    DistinctnessRow,
    ExternalScorer,
    ExternalScorerError,
    agg_mean,
    consistency_report,
    distinctness_rows,
    leak_report,
    length_preservation,
    round_display,
    sample_sd_from_population,
    welch_from_samples,
    welch_from_stats,
)
from piisub.model import Label


class TestAggMean:
    def test_plain(self):
        assert agg_mean([1.0, 2.0, 3.0]) == 2.0

    def test_skips_none(self):
        assert agg_mean([1.0, None, 3.0]) == 2.0

    def test_all_none(self):
        assert agg_mean([None, None]) is None
        assert agg_mean([]) is None


class TestLeakReport:
    def test_counts_case_insensitive_hits(self):
        report = leak_report(
            [
                (["Walter Abernathy", "x@y.com"], "met WALTER ABERNATHY today"),
                (["Edith Goodwin"], "no names here"),
            ]
        )
        assert report.leaked == 1
        assert report.total == 3
        assert report.rate == pytest.approx(1 / 3)
        assert report.leaked_values == ("Walter Abernathy",)

    def test_zero_total(self):
        report = leak_report([])
        assert report.total == 0
        assert report.rate is None

    def test_examples_capped_at_twenty(self):
        items = [([f"value-{i}"], f"has value-{i}") for i in range(30)]
        report = leak_report(items)
        assert report.leaked == 30
        assert len(report.leaked_values) == 20

    @given(st.lists(st.text(min_size=1, max_size=8), max_size=5), st.text(max_size=40))
    def test_rate_bounds(self, values, output):
        report = leak_report([(values, output)])
        if report.total:
            assert 0.0 <= report.rate <= 1.0


class TestConsistencyReport:
    def test_all_consistent(self):
        report = consistency_report(
            [("Maria met Maria and Bob.", [(2, ["Maria", "Maria"]), (1, ["Bob"])])]
        )
        assert report.multi_mention_groups == 1
        assert report.consistent_groups == 1
        assert report.rate == 1.0
        assert report.occurrence_discrepancies == 0

    def test_inconsistent_group(self):
        report = consistency_report(
            [("Maria met Laura.", [(2, ["Maria", "Laura"])])]
        )
        assert report.rate == 0.0

    def test_occurrence_shortfall_flagged_not_scored(self):
        # surrogate appears once but the group has two mentions
        report = consistency_report([("only one Maria here", [(2, ["Maria", "Maria"])])])
        assert report.rate == 1.0
        assert report.occurrence_discrepancies == 1

    def test_single_mentions_ignored(self):
        report = consistency_report([("text", [(1, ["A"]), (1, ["B"])])])
        assert report.multi_mention_groups == 0
        assert report.rate is None


class TestLengthPreservation:
    def test_identity(self):
        assert length_preservation("abcd", "abcd") == 1.0

    def test_shrink_and_grow_symmetric(self):
        assert length_preservation("abcd", "ab") == pytest.approx(0.5)
        assert length_preservation("abcd", "abcdef") == pytest.approx(0.5)

    def test_empty_input(self):
        assert length_preservation("", "anything") is None


class TestRoundDisplay:
    @pytest.mark.parametrize(
        "raw, expected",
        [
            (10 / 274, 0.037),  # plain 3-decimal rounding would give 0.036
            (18 / 162, 0.111),
            (0.5, 0.5),
            (0.0365, 0.037),  # half rounds up at the significant-figure stage
            (1.0, 1.0),
            (0.0004449, 0.0),
            (0.123449, 0.123),
            (0, 0.0),
        ],
    )
    def test_reference_values(self, raw, expected):
        assert round_display(raw) == expected

    @given(st.floats(min_value=0.0, max_value=1.0, allow_nan=False))
    def test_stays_in_unit_interval(self, x):
        assert 0.0 <= round_display(x) <= 1.0


class TestDistinctness:
    def test_rows_aggregate_by_label(self):
        rows = distinctness_rows(
            [
                (Label.PERSON, "Maria", 3),
                (Label.PERSON, "Laura", 2),
                (Label.PERSON, "Maria", 1),
                (Label.DATE, "07/19/2031", 2),
            ]
        )
        by_label = {row.label: row for row in rows}
        person = by_label[Label.PERSON]
        assert person.mentions == 6
        assert person.unique_surrogates == 2
        assert person.ttr == pytest.approx(2 / 6)
        assert by_label[Label.DATE].unique_surrogates == 1

    def test_reference_ttr_displays(self):
        row = DistinctnessRow(Label.PERSON, mentions=274, unique_surrogates=10)
        assert row.ttr_display == 0.037
        row = DistinctnessRow(Label.PERSON, mentions=162, unique_surrogates=18)
        assert row.ttr_display == 0.111

    def test_zero_mentions(self):
        row = DistinctnessRow(Label.PERSON, mentions=0, unique_surrogates=0)
        assert row.ttr is None
        assert row.ttr_display is None

    def test_rows_sorted_by_label_name(self):
        rows = distinctness_rows(
            [(Label.URL, "u", 1), (Label.ACCOUNT, "a", 1), (Label.DATE, "d", 1)]
        )
        assert [r.label for r in rows] == [Label.ACCOUNT, Label.DATE, Label.URL]


class TestWelch:
    def test_population_sd_reference(self):
        result = welch_from_stats(0.506, 0.056, 5, 0.346, 0.044, 5)
        assert result.mean_diff == pytest.approx(0.160, abs=1e-9)
        assert result.se == pytest.approx(0.031850, abs=5e-7)
        assert result.t == pytest.approx(5.023604, abs=5e-6)
        assert result.dof == pytest.approx(7.575928, abs=5e-6)
        assert result.p == pytest.approx(5.1e-7, rel=0.01)
        assert result.p < 0.001

    def test_sample_sd_variant(self):
        sd_a = sample_sd_from_population(0.056, 5)
        sd_b = sample_sd_from_population(0.044, 5)
        result = welch_from_stats(0.506, sd_a, 5, 0.346, sd_b, 5)
        assert result.t == pytest.approx(4.493248, abs=5e-6)

    def test_sample_sd_conversion(self):
        assert sample_sd_from_population(2.0, 5) == pytest.approx(2.0 * math.sqrt(5 / 4))
        with pytest.raises(ValueError):
            sample_sd_from_population(1.0, 1)

    def test_from_samples_matches_stats(self):
        xs = [0.51, 0.48, 0.55, 0.47, 0.52]
        ys = [0.31, 0.36, 0.33, 0.38, 0.35]
        direct = welch_from_samples(xs, ys)
        expected = welch_from_stats(
            statistics.fmean(xs), statistics.stdev(xs), 5,
            statistics.fmean(ys), statistics.stdev(ys), 5,
        )
        assert direct == expected

    def test_symmetry(self):
        a = welch_from_stats(0.5, 0.05, 5, 0.3, 0.04, 5)
        b = welch_from_stats(0.3, 0.04, 5, 0.5, 0.05, 5)
        assert a.t == pytest.approx(-b.t)
        assert a.p == pytest.approx(b.p)

    def test_degenerate_variance(self):
        with pytest.raises(DegenerateVariance):
            welch_from_stats(0.5, 0.0, 5, 0.3, 0.0, 5)

    def test_small_n_rejected(self):
        with pytest.raises(ValueError):
            welch_from_stats(0.5, 0.1, 1, 0.3, 0.1, 5)
        with pytest.raises(ValueError):
            welch_from_samples([1.0], [1.0, 2.0])

    @given(
        st.floats(min_value=-10, max_value=10),
        st.floats(min_value=0.01, max_value=5),
        st.integers(min_value=2, max_value=30),
        st.floats(min_value=-10, max_value=10),
        st.floats(min_value=0.01, max_value=5),
        st.integers(min_value=2, max_value=30),
    )
    def test_p_in_unit_interval(self, ma, sa, na, mb, sb, nb):
        result = welch_from_stats(ma, sa, na, mb, sb, nb)
        assert 0.0 <= result.p <= 1.0
        assert result.dof >= 1.0


class TestCharNgramScorer:
    def test_training_lowers_perplexity_on_seen_text(self):
        scorer = CharNgramScorer()
        scorer.train(["the quick brown fox jumps over the lazy dog"] * 3)
        seen = scorer.perplexity("the quick brown fox")
        unseen = scorer.perplexity("zxqj vvwk yyzzq")
        assert seen is not None and unseen is not None
        assert seen < unseen

    def test_untrained_raises(self):
        with pytest.raises(ValueError, match="trained"):
            CharNgramScorer().perplexity("abc")

    def test_empty_text(self):
        scorer = CharNgramScorer()
        scorer.train(["abc"])
        assert scorer.perplexity("") is None

    def test_corpus_perplexity_pools_characters(self):
        scorer = CharNgramScorer()
        scorer.train(["aaaa bbbb"])
        single = scorer.perplexity("aaaa bbbb")
        pooled = scorer.corpus_perplexity(["aaaa", " bbbb"])
        assert single is not None and pooled is not None
        assert pooled > 1.0

    def test_bad_order(self):
        with pytest.raises(ValueError):
            CharNgramScorer(order=0)


class TestExternalScorer:
    def test_reads_first_line_number(self, tmp_path):
        script = tmp_path / "ppl.py"
        script.write_text(
            "import sys; text = sys.stdin.read(); print(float(len(text)))\n",
            encoding="utf-8",
        )
        scorer = ExternalScorer([sys.executable, str(script)])
        assert scorer.perplexity("abcd") == 4.0

    def test_nonzero_exit(self, tmp_path):
        script = tmp_path / "bad.py"
        script.write_text("import sys; sys.exit(2)\n", encoding="utf-8")
        with pytest.raises(ExternalScorerError, match="exit 2"):
            ExternalScorer([sys.executable, str(script)]).perplexity("x")

    def test_non_numeric_output(self, tmp_path):
        script = tmp_path / "words.py"
        script.write_text("print('not a number')\n", encoding="utf-8")
        with pytest.raises(ExternalScorerError, match="not a number"):
            ExternalScorer([sys.executable, str(script)]).perplexity("x")

    def test_empty_command(self):
        with pytest.raises(ValueError):
            ExternalScorer([])
