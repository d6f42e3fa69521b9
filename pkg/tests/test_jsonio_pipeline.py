import json

import numpy as np
import pytest

from bsp import jsonio
from bsp.pipeline import bimodule_from_record, bimodule_record, discover, representatives
from bsp.search import Bimodule, SearchConfig

from test_search import planted_noise_dataset


def test_dumps_sorted_and_roundtrip():
    obj = {"b": [1, 2.5, None, True], "a": {"y": np.float64(0.1), "x": np.int64(3)}}
    text = jsonio.dumps(obj)
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": {"x": 3, "y": 0.1}, "b": [1, 2.5, None, True]}
    assert "0.10000000000000001" in text


def test_float_precision_roundtrip():
    rng = np.random.default_rng(0)
    vals = rng.standard_normal(100).tolist()
    assert json.loads(jsonio.dumps(vals)) == vals


def test_nonfinite_rejected():
    with pytest.raises(ValueError):
        jsonio.dumps([float("nan")])


def test_dump_load(tmp_path):
    jsonio.dump({"k": [1.0]}, tmp_path / "a.json", indent=2)
    assert jsonio.load(tmp_path / "a.json") == {"k": [1.0]}


def test_record_roundtrip():
    ds = planted_noise_dataset(seed=2)
    res = discover(ds, SearchConfig(seed_fraction_s=0.2))
    assert res.discoveries
    for d in res.discoveries:
        rec = bimodule_record(ds, d.bimodule, d.stats, ident=0)
        assert bimodule_from_record(rec) == d.bimodule
        assert bimodule_from_record(rec, ds) == d.bimodule
        assert len(rec["essential_edges"]) >= len(rec["A"]) + len(rec["B"]) - 1


def test_record_unknown_id():
    ds = planted_noise_dataset(seed=2)
    with pytest.raises(ValueError, match="unknown feature id"):
        bimodule_from_record({"A": ["nope"], "B": ["t0"]}, ds)


def test_representatives_weights_hits():
    a = Bimodule((0, 1), (0,), hits=3)
    b = Bimodule((0, 1, 2), (0,))
    out = representatives([a, b])
    assert len(out) == len({bm.key for bm in out})


def test_discover_pipeline_filters():
    ds = planted_noise_dataset(seed=0)
    res = discover(ds, SearchConfig())
    assert res.n_raw >= res.n_significant >= len(res.discoveries) >= 1
    for d in res.discoveries:
        assert d.bimodule.pvalue_ab <= 0.05 / (ds.p * ds.q)
