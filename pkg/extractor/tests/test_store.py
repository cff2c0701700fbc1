"""Store writer validation and corpus TSV parsing."""

import numpy as np
import pytest

from embed_extractor.corpus import load_instance_pairs, load_usages, unescape_context
from embed_extractor.errors import DataError
from embed_extractor.store import read_header, write_store

from conftest import read_records


class TestWriteStore:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        recs = [
            ("a", rng.normal(size=4).astype(np.float32), rng.normal(size=4).astype(np.float32)),
            ("b", rng.normal(size=4).astype(np.float32), rng.normal(size=4).astype(np.float32)),
        ]
        path = tmp_path / "s.wice"
        assert write_store(recs, path) == 2
        dim, records = read_records(path)
        assert dim == 4
        for iid, e1, e2 in recs:
            assert records[iid][0].tobytes() == e1.tobytes()
            assert records[iid][1].tobytes() == e2.tobytes()
        header = read_header(path)
        assert (header.version, header.dim, header.count) == (1, 4, 2)

    def test_empty_rejected(self, tmp_path):
        with pytest.raises(DataError, match="empty"):
            write_store([], tmp_path / "s.wice")

    def test_dimension_mismatch(self, tmp_path):
        recs = [
            ("a", np.zeros(4, np.float32), np.zeros(4, np.float32)),
            ("b", np.zeros(5, np.float32), np.zeros(5, np.float32)),
        ]
        with pytest.raises(DataError, match="dimension"):
            write_store(recs, tmp_path / "s.wice")
        with pytest.raises(DataError, match="different lengths"):
            write_store([("a", np.zeros(4, np.float32), np.zeros(3, np.float32))], tmp_path / "s.wice")

    def test_duplicate_id(self, tmp_path):
        recs = [
            ("a", np.zeros(4, np.float32), np.zeros(4, np.float32)),
            ("a", np.ones(4, np.float32), np.ones(4, np.float32)),
        ]
        with pytest.raises(DataError, match="duplicate"):
            write_store(recs, tmp_path / "s.wice")

    def test_non_finite_rejected(self, tmp_path):
        bad = np.array([0.0, np.nan, 0.0], np.float32)
        with pytest.raises(DataError, match="non-finite"):
            write_store([("a", bad, np.zeros(3, np.float32))], tmp_path / "s.wice")

    def test_read_header_rejects_garbage(self, tmp_path):
        path = tmp_path / "s.wice"
        path.write_bytes(b"nope")
        with pytest.raises(DataError, match="truncated"):
            read_header(path)
        path.write_bytes(b"XXXX" + bytes(14))
        with pytest.raises(DataError, match="magic"):
            read_header(path)


class TestCorpusParsing:
    def test_unescape(self):
        assert unescape_context(r"a\tb\nc\rd\\e") == "a\tb\nc\rd\\e"
        assert unescape_context("plain") == "plain"

    def test_load_usages(self, tmp_path):
        path = tmp_path / "usages.tsv"
        path.write_text(
            "usage_id\tlemma\tlanguage\ttarget_start\ttarget_end\tcontext\n"
            "u1\tbank\ten\t4\t8\tthe bank of the river\n"
        )
        usages = load_usages(path)
        assert usages["u1"].context == "the bank of the river"
        assert usages["u1"].context[4:8] == "bank"

    def test_bad_header(self, tmp_path):
        path = tmp_path / "usages.tsv"
        path.write_text("usage_id\tlemma\n")
        with pytest.raises(DataError, match="header"):
            load_usages(path)

    def test_duplicate_usage_id(self, tmp_path):
        path = tmp_path / "usages.tsv"
        path.write_text(
            "usage_id\tlemma\tlanguage\ttarget_start\ttarget_end\tcontext\n"
            "u1\tbank\ten\t0\t3\tthe bank\n"
            "u1\tbank\ten\t0\t3\tthe bank\n"
        )
        with pytest.raises(DataError, match="duplicate"):
            load_usages(path)

    def test_invalid_span(self, tmp_path):
        path = tmp_path / "usages.tsv"
        path.write_text(
            "usage_id\tlemma\tlanguage\ttarget_start\ttarget_end\tcontext\n"
            "u1\tbank\ten\t5\t99\tthe bank\n"
        )
        with pytest.raises(DataError, match="span"):
            load_usages(path)

    def test_field_count_with_line_number(self, tmp_path):
        path = tmp_path / "instances.tsv"
        path.write_text(
            "instance_id\tlemma\tlanguage\tusage_1\tusage_2\tratings\n" "i1\tbank\ten\n"
        )
        with pytest.raises(DataError, match=":2:"):
            load_instance_pairs(path)

    def test_duplicate_instance_id(self, tmp_path):
        path = tmp_path / "instances.tsv"
        path.write_text(
            "instance_id\tlemma\tlanguage\tusage_1\tusage_2\tratings\n"
            "i1\tbank\ten\tu1\tu2\t2\n"
            "i1\tbank\ten\tu1\tu2\t3\n"
        )
        with pytest.raises(DataError, match="duplicate"):
            load_instance_pairs(path)
