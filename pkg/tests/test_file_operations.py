# tests/test_file_operations.py

import logging
import math

import numpy as np

from utils.file_operations import load_csv, load_json, save_csv, save_json, write_text_atomic
from utils.log_config import LEVELS, configure_logging
from utils.numeric_helpers import format_float, format_point, to_jsonable


def test_atomic_write_replaces_and_leaves_no_temporaries(tmp_path):
    target = tmp_path / "out.txt"
    write_text_atomic("first", str(target))
    write_text_atomic("second", str(target))
    assert target.read_text() == "second"
    assert [p.name for p in tmp_path.iterdir()] == ["out.txt"]


def test_json_round_trip_converts_numpy(tmp_path):
    path = tmp_path / "report.json"
    save_json({"point": np.array([1.5, 2.0]), "n": np.int64(3), "pair": (np.float64(0.25), None),
               "bound": float("inf")}, str(path))
    assert load_json(str(path)) == {"point": [1.5, 2.0], "n": 3, "pair": [0.25, None], "bound": "inf"}


def test_csv_keeps_seventeen_digits(tmp_path):
    path = tmp_path / "trace.csv"
    save_csv(["n", "value", "bound"], [[1, 1.0 / 3.0, None]], str(path))
    header, rows = load_csv(str(path))
    assert header == ["n", "value", "bound"]
    assert rows == [["1", "0.33333333333333331", ""]]
    assert float(rows[0][1]) == 1.0 / 3.0


def test_numeric_helpers():
    assert format_float(None) == ""
    assert float(format_float(math.pi)) == math.pi
    assert format_point(np.zeros(10)).endswith("(10 nodes)]")
    assert to_jsonable({1: np.array([[1, 2]])}) == {"1": [[1, 2]]}


def test_logging_levels_from_environment(caplog):
    assert configure_logging({"NSCONTRACT_LOG": "debug"}) == logging.DEBUG
    assert logging.getLogger().level == logging.DEBUG
    assert configure_logging({"NSCONTRACT_LOG": "silent"}) == LEVELS["silent"]
    assert configure_logging({}) == logging.INFO
    with caplog.at_level(logging.INFO):
        assert configure_logging({"NSCONTRACT_LOG": "loud"}) == logging.INFO
    assert "unknown NSCONTRACT_LOG value 'loud'" in caplog.text
    configure_logging({"NSCONTRACT_LOG": "silent"})
