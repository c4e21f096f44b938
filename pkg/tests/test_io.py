import json
import math

import numpy as np
import pytest

from motional import io


def test_csv_round_trip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    data = np.column_stack((np.linspace(0, 1, 50), rng.standard_normal(50) * 1e-300,
                            rng.standard_normal(50) * 1e300))
    p = io.write_csv(tmp_path / "x.csv", ["a", "b", "c"], data)
    cols, back = io.read_csv(p)
    assert cols == ["a", "b", "c"]
    np.testing.assert_array_equal(back, data)


def test_csv_format(tmp_path):
    p = io.write_csv(tmp_path / "x.csv", ["T", "R"], [(0.1, 1), (float("nan"), -math.inf)])
    raw = p.read_bytes()
    assert b"\r" not in raw
    assert raw.decode() == "T,R\n0.10000000000000001,1\nnan,-inf\n"


def test_csv_rejects_ragged_rows(tmp_path):
    with pytest.raises(ValueError):
        io.write_csv(tmp_path / "x.csv", ["a", "b"], [(1.0,)])


def test_json_conversions(tmp_path):
    class Obj:
        def to_dict(self):
            return {"z": np.float32(1.5), "a": np.arange(3)}

    p = io.write_json(tmp_path / "x.json", {"b": float("nan"), "a": Obj(), "c": np.bool_(True)})
    text = p.read_text()
    assert json.loads(text) == {"a": {"a": [0, 1, 2], "z": 1.5}, "b": None, "c": True}
    assert text.index('"a"') < text.index('"b"')  # keys sorted
    assert text.endswith("\n")
