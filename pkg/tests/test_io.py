import json

import numpy as np
import pytest

from gmsteady import build_grid
from gmsteady.io import dumps, read_field_csv, write_field_csv, write_json


def test_field_csv_1d(tmp_path):
    g = build_grid(1, (0, 1), 5)
    p = write_field_csv(tmp_path / "f.csv", g, np.arange(5.0))
    lines = p.read_text().splitlines()
    assert lines[0] == "x,value"
    assert lines[2] == "0.25,1.0"
    pts, vals = read_field_csv(p)
    assert np.array_equal(vals, np.arange(5.0)) and np.array_equal(pts[:, 0], g.coords[0])


def test_field_csv_2d_lexicographic(tmp_path):
    g = build_grid(2, [(0, 1), (0, 2)], [3, 4])
    vals = np.random.default_rng(0).standard_normal(12)
    p = write_field_csv(tmp_path / "f.csv", g, vals)
    assert p.read_text().splitlines()[0] == "x,y,value"
    pts, back = read_field_csv(p)
    assert np.array_equal(back, vals)
    assert pts[:4, 1].tolist() == pytest.approx([0, 2 / 3, 4 / 3, 2]) and np.all(pts[:4, 0] == 0)


def test_field_csv_size_check(tmp_path):
    with pytest.raises(ValueError):
        write_field_csv(tmp_path / "f.csv", build_grid(1, (0, 1), 5), np.ones(4))


def test_json_handles_numpy(tmp_path):
    p = write_json(tmp_path / "r.json", {"b": np.float64(1.5), "a": np.arange(3), "c": np.int64(2)})
    assert json.loads(p.read_text()) == {"a": [0, 1, 2], "b": 1.5, "c": 2}
    assert dumps({"z": 1, "a": 2}).index('"a"') < dumps({"z": 1, "a": 2}).index('"z"')
