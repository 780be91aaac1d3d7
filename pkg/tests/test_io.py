import json
import os

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dampedeuler.io import atomic_write, config_hash, dumps, fmt_float, read_csv_columns, write_csv


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_round_trip(x):
    assert float(fmt_float(x)) == x
    assert json.loads(dumps({"x": x}))["x"] == x


def test_nonfinite_values():
    assert fmt_float(np.nan) == "nan"
    assert json.loads(dumps([np.inf, np.nan])) == [None, None]


def test_dumps_types():
    text = dumps({"a": np.float64(0.1), "b": np.int64(3), "c": [True, None, "s"], "d": np.arange(2.0)})
    assert json.loads(text) == {"a": 0.1, "b": 3, "c": [True, None, "s"], "d": [0.0, 1.0]}
    assert "0.10000000000000001" in text
    with pytest.raises(TypeError):
        dumps({"x": object()})


def test_csv_round_trip(tmp_path):
    x = np.random.default_rng(0).normal(size=50)
    p = tmp_path / "a.csv"
    write_csv(p, ["x", "y"], [x, 2 * x])
    cols = read_csv_columns(p)
    np.testing.assert_array_equal(cols["x"], x)
    np.testing.assert_array_equal(cols["y"], 2 * x)


def test_atomic_write_leaves_no_temporaries(tmp_path):
    p = tmp_path / "out" / "f.txt"
    atomic_write(p, "one")
    atomic_write(p, "two")
    assert p.read_text() == "two"
    assert os.listdir(p.parent) == ["f.txt"]


def test_config_hash_is_stable():
    a = config_hash({"gamma": 2.0, "nu": 0.0})
    assert a == config_hash({"nu": 0.0, "gamma": 2.0})
    assert a != config_hash({"gamma": 2.0, "nu": 0.1})
    assert len(a) == 12
