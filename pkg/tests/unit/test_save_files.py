"""
Tests for raster, preview and table writers.
"""

import csv
import json
import os

import numpy as np
import pytest
from PIL import Image

from models.exceptions import StorageError
from utils.config import RunLayout
from utils.save_files import load_raster, save_csv, save_grid, save_jsonl, save_raster, to_snake_case


def test_raster_round_trip_is_exact(tmp_path):
    values = np.random.default_rng(0).normal(size=(7, 5))
    path = save_raster(str(tmp_path / "phase.ras"), values, 6.4e-6)
    loaded, pitch = load_raster(path)
    np.testing.assert_array_equal(loaded, values)
    assert pitch == 6.4e-6


def test_integer_counts_are_stored_as_floats(tmp_path):
    counts = np.arange(12, dtype=np.int64).reshape(3, 4) - 6
    loaded, _ = load_raster(save_raster(str(tmp_path / "counts.ras"), counts, 1e-5))
    np.testing.assert_array_equal(loaded, counts.astype(float))


def test_bad_rasters_are_rejected(tmp_path):
    foreign = tmp_path / "foreign.ras"
    foreign.write_bytes(b"NOPE" + bytes(64))
    with pytest.raises(StorageError):
        load_raster(str(foreign))
    truncated = tmp_path / "short.ras"
    truncated.write_bytes(b"RAS")
    with pytest.raises(StorageError):
        load_raster(str(truncated))
    with pytest.raises(StorageError):
        load_raster(str(tmp_path / "absent.ras"))
    with pytest.raises(StorageError):
        save_raster(str(tmp_path / "cube.ras"), np.zeros((2, 2, 2)), 1e-5)


def test_grid_writes_raster_and_previews(tmp_path):
    values = np.linspace(-1.0, 1.0, 48).reshape(6, 8)
    paths = save_grid(str(tmp_path / "phase"), values, 6.4e-6, "coolwarm")
    assert [os.path.splitext(p)[1] for p in paths] == [".ras", ".pgm", ".png"]

    with open(paths[1], "rb") as f:
        header = f.read(32)
    assert header.startswith(b"P5")
    assert b"65535" in header

    with Image.open(paths[2]) as png:
        assert png.size == (8, 6)
        assert png.mode == "RGB"


def test_constant_grid_previews(tmp_path):
    paths = save_grid(str(tmp_path / "flat"), np.zeros((4, 4)), 6.4e-6)
    assert all(os.path.isfile(p) for p in paths)


def test_csv_uses_union_of_keys(tmp_path):
    path = save_csv(str(tmp_path / "rows.csv"), [{"a": 1, "b": 2}, {"a": 3, "c": 4}])
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    assert list(rows[0]) == ["a", "b", "c"]
    assert rows[1] == {"a": "3", "b": "", "c": "4"}


def test_jsonl_one_record_per_line(tmp_path):
    path = save_jsonl(str(tmp_path / "report.jsonl"), [{"rmse": 0.1, "method": "tee"}, {"rmse": 0.2}])
    with open(path) as f:
        lines = f.read().splitlines()
    assert [json.loads(line)["rmse"] for line in lines] == [0.1, 0.2]
    assert lines[0] == '{"method": "tee", "rmse": 0.1}'


def test_unwritable_table_is_a_storage_error(tmp_path):
    with pytest.raises(StorageError):
        save_csv(str(tmp_path / "missing" / "rows.csv"), [{"a": 1}])


def test_layout_creates_directories(tmp_path):
    layout = RunLayout(str(tmp_path / "run")).ensure()
    assert os.path.isdir(layout.rasters_dir)
    assert os.path.isdir(layout.tables_dir)
    assert os.path.isdir(layout.events_dir)
    assert layout.table("report.csv") == os.path.join(layout.tables_dir, "report.csv")


def test_to_snake_case():
    assert to_snake_case("Tilted Wave (v2)") == "tilted_wave_v2"
