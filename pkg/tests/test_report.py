import json

import numpy as np
import pytest

from cli.report import RunResults, Table, canonical, emit_report, format_float
from core.errors import DomainError
from reconstruct.probe import probe_direction


@pytest.fixture
def results(identity_field):
    series = probe_direction(identity_field, None, 0.5, [0.0, 0.0], [1.0, 0.0], (16.0, 32.0, 64.0), "dtn")
    table = Table(("name", "value", "flag"), [{"name": "b", "value": 1 / 3, "flag": True}, {"name": "a", "value": None}])
    return RunResults(task="probe", summary={"z": 1.0, "a": [np.float64(2.0), 3]}, tables={"t": table},
                      series=[series], provenance={"seed": 0})


def test_float_format():
    assert format_float(1 / 3) == "0.333333333333"
    assert format_float(float("nan")) == "nan"
    assert canonical({"x": np.array([1.0, 2.5]), 1: complex(1, -2)}) == {
        "x": [1.0, 2.5], "1": {"real": 1.0, "imag": -2.0},
    }


def test_csv(results, tmp_path):
    (path,) = emit_report(results, "csv", tmp_path)
    raw = path.read_bytes()
    assert raw == b"name,value,flag\r\nb,0.333333333333,True\r\na,,\r\n"


def test_json_is_sorted_and_stable(results, tmp_path):
    (path,) = emit_report(results, "json", tmp_path / "one")
    (again,) = emit_report(results, "json", tmp_path / "two")
    assert path.read_bytes() == again.read_bytes()
    body = json.loads(path.read_text(encoding="utf-8"))
    assert list(body) == sorted(body)
    assert list(body["summary"]) == ["a", "z"]
    assert body["tables"]["t"][0]["value"] == 0.333333333333


def test_svg_is_deterministic(results, tmp_path):
    (first,) = emit_report(results, "svg", tmp_path / "one")
    (second,) = emit_report(results, "svg", tmp_path / "two")
    text = first.read_text(encoding="utf-8")
    assert text.startswith("<?xml")
    assert "<dc:date>" not in text
    assert first.read_bytes() == second.read_bytes()


def test_output_path_must_be_a_directory(results, tmp_path):
    blocker = tmp_path / "taken"
    blocker.write_text("x")
    with pytest.raises(DomainError):
        emit_report(results, "json", blocker)
    with pytest.raises(DomainError):
        emit_report(results, "xml", tmp_path)
