import json

import pytest

from cli.config import THREADS_ENV, RunConfig, dump_config, load_config, resolve_threads
from core.errors import ConfigError

PROBE_TOML = """
task = "probe"
s = 0.3

[field]
family = "bump"
amplitude = 0.5
width = 0.5
direction = [[1.0, 0.3], [0.3, 0.5]]

[probe]
mode = "ntd"
schedule = [16.0, 32.0, 64.0, 128.0]
"""


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_load_toml(tmp_path):
    config = load_config(_write(tmp_path, "run.toml", PROBE_TOML))
    assert config.task == "probe"
    assert config.s == 0.3
    assert config.field.family == "bump"
    assert config.probe.mode == "ntd"
    assert config.probe.schedule == [16.0, 32.0, 64.0, 128.0]
    assert config.grid.normal_nodes == 96
    assert config.output.formats == ["csv", "json", "svg"]


def test_json_syntax_error_reports_position(tmp_path):
    path = _write(tmp_path, "run.json", '{"task": "constants",\n  "s": }\n')
    with pytest.raises(ConfigError) as info:
        load_config(path)
    assert info.value.details["line"] == 2
    assert info.value.details["column"] == 8


def test_toml_syntax_error(tmp_path):
    with pytest.raises(ConfigError, match="run.toml"):
        load_config(_write(tmp_path, "run.toml", "task = \n"))


@pytest.mark.parametrize(
    "raw, where",
    [
        ({"grid": {"normal_nodes": 10}}, "grid.normal_nodes"),
        ({"probe": {"bogus": 1}}, "probe.bogus"),
        ({"s": 1.0}, "s"),
        ({"checks": {"fourier_tol": -1.0}}, "checks.fourier_tol"),
    ],
)
def test_validation_errors_carry_the_path(tmp_path, raw, where):
    with pytest.raises(ConfigError) as info:
        load_config(_write(tmp_path, "run.json", json.dumps(raw)))
    assert info.value.details["field"] == where
    assert where in str(info.value)


def test_cross_field_checks(tmp_path):
    with pytest.raises(ConfigError, match="does not match"):
        load_config(_write(tmp_path, "run.json", json.dumps({"n": 3})))
    with pytest.raises(ConfigError, match="strictly increasing"):
        load_config(_write(tmp_path, "run.json", json.dumps({"probe": {"schedule": [32, 16, 64]}})))
    with pytest.raises(ConfigError, match="3 entries"):
        load_config(_write(tmp_path, "run.json", json.dumps({"n": 3, "field": {"n": 3}, "probe": {"x0": [0, 0]}})))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "absent.toml")


def test_dump_round_trip(tmp_path):
    config = load_config(_write(tmp_path, "run.toml", PROBE_TOML))
    again = load_config(_write(tmp_path, "dumped.json", dump_config(config)))
    assert again == config
    assert dump_config(again) == dump_config(config)


def test_overrides():
    config = RunConfig().with_overrides(task="solve", out="elsewhere", threads=4)
    assert (config.task, config.output.directory, config.threads) == ("solve", "elsewhere", 4)
    assert RunConfig().with_overrides() == RunConfig()
    with pytest.raises(ConfigError):
        RunConfig().with_overrides(task="unknown")


def test_thread_resolution(monkeypatch):
    monkeypatch.delenv(THREADS_ENV, raising=False)
    assert resolve_threads(2) == 2
    assert resolve_threads(None) is None
    monkeypatch.setenv(THREADS_ENV, "6")
    assert resolve_threads(2) == 6
    monkeypatch.setenv(THREADS_ENV, "many")
    with pytest.raises(ConfigError):
        resolve_threads(None)
    monkeypatch.setenv(THREADS_ENV, "0")
    with pytest.raises(ConfigError):
        resolve_threads(None)
