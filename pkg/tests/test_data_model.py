"""Tests for corpus loading, derived targets, and corpus statistics."""

import itertools

import numpy as np
import pytest

from wic_disagree.data_model import (
    Dataset,
    Instance,
    Usage,
    dataset_stats,
    escape_context,
    load_dataset,
    load_instances,
    load_usages,
    mean_pairwise_disagreement,
    median_label,
    targets_for,
    unescape_context,
    write_instances_tsv,
    write_usages_tsv,
)
from wic_disagree.errors import DataError


def oracle_median(ratings):
    """Naive oracle: sort, take the middle, keep only integral medians."""
    rs = sorted(ratings)
    n = len(rs)
    if n % 2 == 1:
        return rs[n // 2]
    mid = (rs[n // 2 - 1] + rs[n // 2]) / 2
    return int(mid) if mid == int(mid) else None


def oracle_disagreement(ratings):
    """Naive oracle: enumerate all unordered pairs."""
    pairs = list(itertools.combinations(ratings, 2))
    return sum(abs(a - b) for a, b in pairs) / len(pairs)


class TestMedianLabel:
    def test_odd_count_middle_element(self):
        assert median_label([2, 2, 3]) == 2

    def test_even_count_half_integer_is_absent(self):
        assert median_label([2, 3]) is None

    def test_even_count_split_extremes_absent(self):
        assert median_label([1, 1, 4, 4]) is None

    def test_even_count_integral_median(self):
        assert median_label([3, 3, 3, 3]) == 3
        assert median_label([1, 3]) == 2

    def test_rating_out_of_domain_rejected(self):
        with pytest.raises(DataError):
            median_label([1, 5])
        with pytest.raises(DataError):
            median_label([0, 2])

    def test_empty_rejected(self):
        with pytest.raises(DataError):
            median_label([])

    def test_exhaustive_against_oracle(self):
        """All rating lists of length <= 6 over {1..4} match the naive oracle."""
        for n in range(1, 7):
            for ratings in itertools.product((1, 2, 3, 4), repeat=n):
                assert median_label(ratings) == oracle_median(ratings), ratings

    def test_median_between_min_and_max(self):
        rng = np.random.default_rng(42)
        for _ in range(200):
            ratings = rng.integers(1, 5, size=rng.integers(1, 9)).tolist()
            med = median_label(ratings)
            if med is not None:
                assert min(ratings) <= med <= max(ratings)


class TestMeanPairwiseDisagreement:
    def test_identical_ratings_zero(self):
        assert mean_pairwise_disagreement([4, 4, 4]) == 0.0

    def test_single_pair_max_span(self):
        assert mean_pairwise_disagreement([1, 4]) == 3.0

    def test_three_ratings_hand_enumerated(self):
        # pairs (1,2), (1,4), (2,4) -> diffs 1, 3, 2 -> 6/3
        assert mean_pairwise_disagreement([1, 2, 4]) == 2.0

    def test_fewer_than_two_rejected(self):
        with pytest.raises(DataError):
            mean_pairwise_disagreement([3])

    def test_exhaustive_against_oracle(self):
        for n in range(2, 7):
            for ratings in itertools.product((1, 2, 3, 4), repeat=n):
                assert mean_pairwise_disagreement(ratings) == pytest.approx(
                    oracle_disagreement(ratings), abs=1e-12
                )

    def test_bounds_and_permutation_invariance(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            ratings = rng.integers(1, 5, size=rng.integers(2, 9)).tolist()
            value = mean_pairwise_disagreement(ratings)
            assert 0.0 <= value <= 3.0
            assert (value == 0.0) == (len(set(ratings)) == 1)
            shuffled = list(ratings)
            rng.shuffle(shuffled)
            assert mean_pairwise_disagreement(shuffled) == value


class TestContextEscaping:
    def test_round_trip_special_characters(self):
        text = "tabs\tand\nnewlines\r plus back\\slash"
        assert unescape_context(escape_context(text)) == text

    def test_escaped_form_has_no_raw_separators(self):
        escaped = escape_context("a\tb\nc")
        assert "\t" not in escaped and "\n" not in escaped

    def test_round_trip_random_strings(self):
        rng = np.random.default_rng(3)
        alphabet = list("ab\t\n\r\\ xyz")
        for _ in range(200):
            text = "".join(rng.choice(alphabet, size=rng.integers(0, 30)))
            assert unescape_context(escape_context(text)) == text


def _usage(uid, lang="de", lemma="bank", context="ein bank satz", start=4, end=8):
    return Usage(usage_id=uid, context=context, lemma=lemma,
                 target_start=start, target_end=end, language=lang)


def _instance(iid, u1, u2, ratings, lang="de", lemma="bank"):
    return Instance(instance_id=iid, usage_1=u1, usage_2=u2, lemma=lemma,
                    language=lang, ratings=tuple(ratings))


class TestUsageAndInstanceValidation:
    def test_target_span_validated(self):
        with pytest.raises(DataError):
            _usage("u1", context="kurz", start=2, end=9)
        with pytest.raises(DataError):
            _usage("u1", start=5, end=5)

    def test_target_text(self):
        assert _usage("u1").target_text == "bank"

    def test_instance_rating_domain(self):
        with pytest.raises(DataError):
            _instance("i1", "u1", "u2", [1, 7])
        with pytest.raises(DataError):
            _instance("i1", "u1", "u2", [])


class TestTsvRoundTrip:
    def test_usages_and_instances_round_trip(self, tmp_path):
        usages = [
            _usage("u1", context="context with\ttab and bank inside", start=21, end=25),
            _usage("u2", context="multi\nline bank context", start=11, end=15),
        ]
        instances = [_instance("i1", "u1", "u2", [2, 3, 3])]
        write_usages_tsv(usages, tmp_path / "u.tsv")
        write_instances_tsv(instances, tmp_path / "i.tsv")
        dataset = load_dataset(tmp_path / "u.tsv", tmp_path / "i.tsv")
        assert dataset.usages["u1"].context == usages[0].context
        assert dataset.usages["u2"].context == usages[1].context
        assert dataset.instances == instances

    def test_ratings_column_format(self, tmp_path):
        write_instances_tsv([_instance("i1", "u1", "u2", [2, 3, 3, 4])],
                            tmp_path / "i.tsv")
        raw = (tmp_path / "i.tsv").read_text(encoding="utf-8")
        assert raw.splitlines()[1].split("\t")[5] == "2,3,3,4"


class TestLoaders:
    def _write(self, tmp_path, usages, instances):
        write_usages_tsv(usages, tmp_path / "u.tsv")
        write_instances_tsv(instances, tmp_path / "i.tsv")
        return tmp_path / "u.tsv", tmp_path / "i.tsv"

    def test_empty_instance_file(self, tmp_path):
        up, ip = self._write(tmp_path, [_usage("u1")], [])
        dataset = load_dataset(up, ip)
        assert dataset.instances == []
        assert dataset_stats(dataset).rows[0].ogwic_instances == 0

    def test_half_integer_median_only_counts_for_disagreement(self, tmp_path):
        up, ip = self._write(tmp_path, [_usage("u1"), _usage("u2")],
                             [_instance("i1", "u1", "u2", [2, 3])])
        dataset = load_dataset(up, ip)
        assert len(dataset.diswic_instances()) == 1
        assert len(dataset.ogwic_instances()) == 0
        assert dataset.excluded_no_median == 1

    def test_single_rating_excluded_from_disagreement(self, tmp_path):
        up, ip = self._write(tmp_path, [_usage("u1"), _usage("u2")],
                             [_instance("i1", "u1", "u2", [3])])
        dataset = load_dataset(up, ip)
        assert len(dataset.ogwic_instances()) == 1
        assert len(dataset.diswic_instances()) == 0
        assert dataset.excluded_single_rating == 1

    def test_duplicate_instance_id_rejected(self, tmp_path):
        up, ip = self._write(tmp_path, [_usage("u1"), _usage("u2")],
                             [_instance("i1", "u1", "u2", [2, 2]),
                              _instance("i1", "u2", "u1", [3, 3])])
        with pytest.raises(DataError, match="i1"):
            load_dataset(up, ip)

    def test_duplicate_usage_id_rejected(self, tmp_path):
        write_usages_tsv([_usage("u1"), _usage("u1")], tmp_path / "u.tsv")
        with pytest.raises(DataError, match="u1"):
            load_usages(tmp_path / "u.tsv")

    def test_dangling_usage_reference_names_instance(self, tmp_path):
        up, ip = self._write(tmp_path, [_usage("u1")],
                             [_instance("i1", "u1", "missing", [2, 2])])
        with pytest.raises(DataError, match="i1"):
            load_dataset(up, ip)

    def test_lemma_mismatch_rejected(self, tmp_path):
        up, ip = self._write(
            tmp_path,
            [_usage("u1", lemma="bank"), _usage("u2", lemma="ufer", context="am ufer hier", start=3, end=7)],
            [_instance("i1", "u1", "u2", [2, 2], lemma="bank")],
        )
        with pytest.raises(DataError, match="lemma"):
            load_dataset(up, ip)

    def test_malformed_row_reports_line_number(self, tmp_path):
        path = tmp_path / "i.tsv"
        path.write_text(
            "instance_id\tlemma\tlanguage\tusage_1\tusage_2\tratings\n"
            "i1\tbank\tde\tu1\tu2\n",
            encoding="utf-8",
        )
        with pytest.raises(DataError, match=r":2:"):
            load_instances(path)

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "u.tsv"
        path.write_text("wrong\theader\n", encoding="utf-8")
        with pytest.raises(DataError):
            load_usages(path)

    def test_non_integer_rating_rejected(self, tmp_path):
        (tmp_path / "u.tsv").write_text(
            "usage_id\tlemma\tlanguage\ttarget_start\ttarget_end\tcontext\n"
            "u1\tbank\tde\t0\t4\tbank hier\n"
            "u2\tbank\tde\t0\t4\tbank dort\n",
            encoding="utf-8",
        )
        (tmp_path / "i.tsv").write_text(
            "instance_id\tlemma\tlanguage\tusage_1\tusage_2\tratings\n"
            "i1\tbank\tde\tu1\tu2\t2,x\n",
            encoding="utf-8",
        )
        with pytest.raises(DataError, match=r":2:"):
            load_dataset(tmp_path / "u.tsv", tmp_path / "i.tsv")


class TestTargetsFor:
    def test_both_targets(self):
        targets = targets_for(_instance("i1", "u1", "u2", [1, 2, 4]))
        assert targets.median_label == 2
        assert targets.mean_disagreement == 2.0

    def test_single_rating_has_median_only(self):
        targets = targets_for(_instance("i1", "u1", "u2", [3]))
        assert targets.median_label == 3
        assert targets.mean_disagreement is None


class TestDatasetStats:
    def _corpus(self, tmp_path):
        usages = [
            _usage("u1", lang="de", context="a b c bank"),
            _usage("u2", lang="de", context="bank x", start=0, end=4),
            # u3 repeats u1's context string: counted once per language
            _usage("u3", lang="de", context="a b c bank"),
            _usage("u4", lang="en", lemma="wall", context="the wall stands here",
                   start=4, end=8),
            _usage("u5", lang="en", lemma="wall", context="wall again", start=0, end=4),
        ]
        instances = [
            _instance("i1", "u1", "u2", [2, 2, 3], lang="de"),
            _instance("i2", "u3", "u2", [2, 3], lang="de"),  # no integral median
            _instance("i3", "u4", "u5", [4], lang="en", lemma="wall"),  # single rating
        ]
        write_usages_tsv(usages, tmp_path / "u.tsv")
        write_instances_tsv(instances, tmp_path / "i.tsv")
        return load_dataset(tmp_path / "u.tsv", tmp_path / "i.tsv")

    def test_hand_counted_table(self, tmp_path):
        table = dataset_stats(self._corpus(tmp_path))
        by_lang = {r.language: r for r in table.rows}
        de, en = by_lang["de"], by_lang["en"]
        assert (de.unique_contexts, de.unique_lemmas) == (2, 1)
        # contexts "a b c bank" (4 words) and "bank x" (2 words) -> mean 3
        assert de.mean_context_words == 3
        assert (de.ogwic_instances, de.diswic_instances) == (1, 2)
        assert (en.unique_contexts, en.unique_lemmas) == (2, 1)
        assert (en.ogwic_instances, en.diswic_instances) == (1, 0)

    def test_average_row_first_in_tsv(self, tmp_path):
        table = dataset_stats(self._corpus(tmp_path))
        lines = table.to_tsv().splitlines()
        assert lines[1].startswith("AVG\t")
        assert table.average.unique_contexts == 2
        # ogwic counts 1 and 1 -> AVG 1
        assert table.average.ogwic_instances == 1

    def test_empty_dataset(self):
        table = dataset_stats(Dataset(usages={}, instances=[], targets={}))
        assert table.rows == []
        assert table.average is None
        assert table.to_tsv().splitlines()[0].startswith("language\t")
