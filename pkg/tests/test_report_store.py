# -*- coding: utf-8 -*-
"""report_store：报告落盘、索引与数值格式"""
import json
import math

import numpy as np
import pytest

from core.report_store import ReportStore, config_hash, format_number, tool_version


@pytest.fixture
def store(tmp_path):
    return ReportStore(str(tmp_path / "out"))


def test_save_json_adds_common_fields(store):
    path = store.save_json("check", {"gamma": 0.5, "violated": []}, config_hash="abc", seed=3)
    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["command"] == "check"
    assert data["config_hash"] == "abc"
    assert data["seed"] == 3
    assert data["tool_version"] == tool_version() == "1.0.0"
    assert store.load_json("check") == data
    assert store.load_json("evolve") is None


def test_json_values_are_normalized(store):
    report = {
        "array": np.array([1.0, 2.0]),
        "value": complex(1.0, -2.0),
        "missing": math.nan,
        "nested": {"tuple": (1, 2)},
    }
    data = json.loads(store.save_json("steady", report).read_text(encoding="utf-8"))
    assert data["array"] == [1.0, 2.0]
    assert data["value"] == {"re": 1.0, "im": -2.0}
    assert data["missing"] is None
    assert data["nested"]["tuple"] == [1, 2]


def test_infinite_values_stay_strict_json(store):
    report = {
        "beta": math.inf,
        "floor": -math.inf,
        "array": np.array([1.0, np.inf]),
        "value": complex(math.inf, 0.5),
    }
    text = store.save_json("check", report).read_text(encoding="utf-8")
    assert "Infinity" not in text

    def reject(constant):
        raise ValueError(constant)

    data = json.loads(text, parse_constant=reject)
    assert data["beta"] == "inf"
    assert data["floor"] == "-inf"
    assert data["array"] == [1.0, "inf"]
    assert data["value"] == {"re": "inf", "im": 0.5}


def test_index_tracks_files_by_hash(store):
    store.save_json("evolve", {}, config_hash="h1")
    store.save_csv("evolve", ["time"], [[0.0]], config_hash="h1")
    store.save_json("check", {}, config_hash="h2")
    index = json.loads(store.index_file.read_text(encoding="utf-8"))
    assert index["h1"]["files"] == {"evolve": "evolve.json", "evolve.csv": "evolve.csv"}
    assert index["h2"]["files"] == {"check": "check.json"}
    reopened = ReportStore(str(store.out_dir))
    assert reopened.index == index


def test_csv_format(store):
    path = store.save_csv("evolve", ["time", "p", "flag"], [[0.0, 0.1, True], [1.5, 2.0 ** -70, 3]])
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "time,p,flag"
    assert lines[1] == "0,0.10000000000000001,1"
    assert lines[2] == "1.5,8.4703294725430034e-22,3"


def test_no_temporary_files_left(store):
    store.save_json("gamma", {"gamma": 1.0}, config_hash="h")
    store.save_csv("gamma", ["a"], [[1.0]])
    assert sorted(p.name for p in store.out_dir.iterdir()) == ["gamma.csv", "gamma.json", "index.json"]


def test_identical_reports_are_byte_identical(tmp_path):
    first = ReportStore(str(tmp_path / "a")).save_json("check", {"x": 0.1, "y": [1, 2]}, "h", 0)
    second = ReportStore(str(tmp_path / "b")).save_json("check", {"y": [1, 2], "x": 0.1}, "h", 0)
    assert first.read_bytes() == second.read_bytes()


def test_config_hash():
    assert config_hash({"a": 1, "b": {"c": 2}}) == config_hash({"b": {"c": 2}, "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})
    assert len(config_hash({})) == 32


@pytest.mark.parametrize("value, text", [(1, "1"), (False, "0"), (0.25, "0.25"), ("fock", "fock")])
def test_format_number(value, text):
    assert format_number(value) == text
