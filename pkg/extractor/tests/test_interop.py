"""The emitted store is readable by the modeling pipeline it feeds.

These tests use the consumer package (installed alongside in this repo) as
an oracle for the binary format; they are skipped when it is absent.
"""

import numpy as np
import pytest

from embed_extractor.extraction import ExtractionConfig, extract

from conftest import build_corpus, read_records

wic_disagree = pytest.importorskip("wic_disagree")


class TestConsumerInterop:
    def test_store_loads_and_joins(self, tmp_path, model_dir):
        paths = build_corpus(tmp_path)
        config = ExtractionConfig(model=model_dir, max_len=32)
        summary = extract(paths["usages"], paths["instances"], paths["out"], config)

        store = wic_disagree.read_store(paths["out"])
        assert store.dim == summary.dim
        assert store.ids == ["i1", "i2", "i3"]

        view = wic_disagree.join(["i3", "i1"], store)
        assert view.instance_ids == ["i3", "i1"]
        _, records = read_records(paths["out"])
        np.testing.assert_array_equal(view.e1[0], records["i3"][0].astype(np.float64))
        np.testing.assert_array_equal(view.e2[1], records["i1"][1].astype(np.float64))

    def test_round_trip_vectors_bit_identical(self, tmp_path, model_dir):
        paths = build_corpus(tmp_path)
        config = ExtractionConfig(model=model_dir, max_len=32)
        extract(paths["usages"], paths["instances"], paths["out"], config)
        store = wic_disagree.read_store(paths["out"])
        _, records = read_records(paths["out"])
        for iid in store.ids:
            rec = store.record(iid)
            assert rec.e1.tobytes() == records[iid][0].tobytes()
            assert rec.e2.tobytes() == records[iid][1].tobytes()
