import json

import numpy as np
import pytest

from planar_sps.grid import Field, build_grid, gaussian_field
from planar_sps.io import (
    SCHEMA,
    dumps_summary,
    jsonable,
    read_csv,
    read_field,
    write_csv,
    write_field,
    write_summary,
)


@pytest.mark.parametrize("complex_", [False, True])
def test_field_roundtrip_is_bit_exact(tmp_path, gauss64, complex_):
    u = gauss64
    if complex_:
        u = Field(u.grid, u.values * np.exp(0.4j * u.grid.coords[0]))
    bin_path, meta_path = write_field(tmp_path / "sub" / "u", u, "test field")
    assert bin_path.stat().st_size == u.grid.n ** 2 * 8 * (2 if complex_ else 1)
    meta = json.loads(meta_path.read_text())
    assert meta == {"n": 64, "L": 12.0, "dtype": "float64-le", "complex": complex_,
                    "description": "test field"}
    back = read_field(tmp_path / "sub" / "u.bin")
    assert back.grid == u.grid
    np.testing.assert_array_equal(back.values, u.values)


def test_raw_layout_is_row_major_little_endian(tmp_path):
    g = build_grid(1.0, 8)
    vals = np.arange(64, dtype=float).reshape(8, 8)
    write_field(tmp_path / "r", Field(g, vals))
    raw = np.frombuffer((tmp_path / "r.bin").read_bytes(), dtype="<f8")
    np.testing.assert_array_equal(raw, np.arange(64))


def test_truncated_dump_rejected(tmp_path, gauss64):
    bin_path, _ = write_field(tmp_path / "u", gauss64)
    bin_path.write_bytes(bin_path.read_bytes()[:-8])
    with pytest.raises(ValueError):
        read_field(tmp_path / "u")


def test_csv_roundtrip(tmp_path):
    path = write_csv(tmp_path / "t.csv", ("a", "b", "ok"), [(0.1, 2, True), (1e-17, 3, False)])
    rows = read_csv(path)
    assert rows[0] == {"a": "0.1", "b": "2", "ok": "true"}
    assert float(rows[1]["a"]) == 1e-17


def test_jsonable_handles_numpy_and_nonfinite():
    doc = jsonable({"a": np.float64(1.5), "b": np.arange(3), "c": float("nan"),
                    "d": (np.bool_(True), -np.inf), 4: np.int64(7)})
    assert doc == {"a": 1.5, "b": [0, 1, 2], "c": "nan", "d": [True, "-inf"], "4": 7}
    json.dumps(doc, allow_nan=False)


def test_summary_is_schema_tagged_and_stable(tmp_path):
    payload = {"z": 1.0, "a": [np.float64(2.0)]}
    text = dumps_summary("groundstate", payload)
    doc = json.loads(text)
    assert doc["schema"] == SCHEMA
    assert doc["kind"] == "groundstate"
    assert text == dumps_summary("groundstate", dict(reversed(list(payload.items()))))
    path = write_summary(tmp_path / "x" / "summary.json", "groundstate", payload)
    assert path.read_text() == text


def test_gaussian_dump_reads_back_as_field(tmp_path, small_grid):
    write_field(tmp_path / "g", gaussian_field(small_grid))
    assert isinstance(read_field(tmp_path / "g.json"), Field)
