import pytest

from logger import catch_and_log, get_logger, log_function_call, log_performance, log_probe_event

log = get_logger(__name__)


@log_performance
def _square(x):
    return x * x


@log_function_call("DEBUG")
def _fails(x):
    raise ValueError(f"bad {x}")


@catch_and_log(level="WARNING", message="skipped", default_return="fallback")
def _swallowed():
    raise RuntimeError("boom")


def test_log_performance_returns_result(log_records):
    assert _square(3) == 9
    assert any("_square executed" in r["message"] for r in log_records)


def test_log_function_call_logs_and_reraises(log_records):
    with pytest.raises(ValueError):
        _fails(2)
    messages = [r["message"] for r in log_records]
    assert any("Calling _fails(2)" in m for m in messages)
    assert any("_fails failed with ValueError" in m for m in messages)


def test_catch_and_log_swallows(log_records):
    assert _swallowed() == "fallback"
    warning = [r for r in log_records if r["level"].name == "WARNING"]
    assert warning and "skipped" in warning[0]["message"]


def test_probe_event_binds_extra(log_records):
    log_probe_event(log, "limit reached", "INFO", N=64)
    record = log_records[-1]
    assert record["extra"]["N"] == 64
    assert record["extra"]["name"] == __name__
    assert "limit reached" in record["message"]
