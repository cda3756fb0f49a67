"""
Tests for result files
"""

import json

import numpy as np
import pytest

from thermoporo.error_handler import ShapeError
from thermoporo.output import (
    ProfileCSV,
    format_number,
    read_table,
    write_manifest,
    write_table,
)


class TestProfileCSV:
    """Tests for ProfileCSV"""

    def test_write_and_read(self, tmp_path):
        """Test that written profiles are read back exactly"""
        x = np.linspace(0.0, 1.0, 11)
        table = ProfileCSV.from_columns({"x": x, "v_f": np.cosh(x) / np.cosh(1.0)})
        path = table.write(tmp_path / "nested" / "profiles.csv")
        back = ProfileCSV.read(path)
        assert back.header == ["x", "v_f"]
        np.testing.assert_array_equal(back.columns["v_f"], table.columns["v_f"])

    def test_file_layout(self, tmp_path):
        """Test header row, comma separation and LF line endings"""
        path = ProfileCSV.from_columns({"x": [0.0, 0.5], "P": [1.0, 0.25]}).write(
            tmp_path / "p.csv", precision=6
        )
        raw = path.read_bytes()
        assert b"\r\n" not in raw
        assert raw.decode().splitlines() == ["x,P", "0,1", "0.5,0.25"]

    def test_coordinate_must_increase(self):
        """Test that a non-increasing first column raises ShapeError"""
        with pytest.raises(ShapeError):
            ProfileCSV.from_columns({"x": [0.0, 0.0, 1.0], "u_s": [0.0, 1.0, 2.0]})

    def test_unequal_lengths_rejected(self):
        """Test that columns of different lengths raise ShapeError"""
        with pytest.raises(ShapeError):
            ProfileCSV.from_columns({"x": [0.0, 1.0], "u_s": [0.0]})

    def test_empty_table_rejected(self):
        """Test that a table without columns raises ShapeError"""
        with pytest.raises(ShapeError):
            ProfileCSV({})

    def test_empty_file_rejected(self, tmp_path):
        """Test that reading an empty file raises ShapeError"""
        path = tmp_path / "empty.csv"
        path.write_text("", encoding="utf-8")
        with pytest.raises(ShapeError):
            ProfileCSV.read(path)


class TestTables:
    """Tests for summary tables and manifests"""

    def test_format_number_round_trips(self):
        """Test that 17 significant digits reproduce the double"""
        value = 0.1 + 0.2
        assert float(format_number(value)) == value

    def test_write_table(self, tmp_path):
        """Test cell formatting of ints, floats, bools and strings"""
        rows = [
            {"kappa_s": 1, "theta_s_end": 0.5, "ok": True, "model": "thermal"},
            {"kappa_s": 2, "theta_s_end": 0.25, "ok": False, "model": "thermal"},
        ]
        path = write_table(tmp_path / "sweep.csv", rows)
        back = read_table(path)
        assert back[0] == {"kappa_s": "1", "theta_s_end": "0.5", "ok": "true", "model": "thermal"}
        assert back[1]["ok"] == "false"

    def test_rows_must_share_columns(self, tmp_path):
        """Test that rows with different keys raise ShapeError"""
        with pytest.raises(ShapeError):
            write_table(tmp_path / "t.csv", [{"a": 1}, {"b": 2}])

    def test_manifest_sorted_and_jsonable(self, tmp_path):
        """Test sorted keys and conversion of numpy and path values"""
        payload = {
            "times": np.array([0.0, 60.0]),
            "n": np.int64(21),
            "directory": tmp_path,
            "gap": float("inf"),
        }
        path = write_manifest(tmp_path / "manifest.json", payload)
        text = path.read_text(encoding="utf-8")
        data = json.loads(text)
        assert list(data) == sorted(data)
        assert data["times"] == [0.0, 60.0]
        assert data["n"] == 21
        assert data["directory"] == str(tmp_path)
        assert data["gap"] == "inf"
        assert text.endswith("\n")
