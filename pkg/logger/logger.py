"""
Run Logger

Structured file logging for probe runs, forward solves and reconstructions,
built on loguru. Console output is opt-in through ``configure_console``.
"""

import functools
import os
import sys
import time
from pathlib import Path
from typing import Any, Callable

from loguru import logger

# Setup log directory
LOG_DIR = Path(os.environ.get("EXTPROBE_LOG_DIR", Path(__file__).parent))
LOG_DIR.mkdir(parents=True, exist_ok=True)

# Remove default handler
logger.remove()

_console_sink_id: int | None = None

# Detailed file handler for debugging
logger.add(
    LOG_DIR / "extprobe_debug.log",
    level="DEBUG",
    format=(
        "{time:YYYY-MM-DD HH:mm:ss.SSS} | "
        "{level: <8} | "
        "{name}:{function}:{line} | "
        "{message} | "
        "Extra: {extra}"
    ),
    rotation="50 MB",
    retention="7 days",
    compression="zip",
    enqueue=True,
    backtrace=True,
    diagnose=False,
    serialize=False,
    catch=True,
)

# Run events log (INFO and above)
logger.add(
    LOG_DIR / "extprobe_run.log",
    level="INFO",
    format=(
        "{time:YYYY-MM-DD HH:mm:ss} | "
        "{level: <8} | "
        "{extra[name]} | "
        "{message}"
    ),
    rotation="50 MB",
    retention="30 days",
    compression="zip",
    enqueue=True,
    filter=lambda record: "name" in record["extra"],
    catch=True,
)

# Error-only log
logger.add(
    LOG_DIR / "extprobe_errors.log",
    level="ERROR",
    format=(
        "{time:YYYY-MM-DD HH:mm:ss.SSS} | "
        "{level: <8} | "
        "{name}:{function}:{line} | "
        "{message} | "
        "Exception: {exception}"
    ),
    rotation="10 MB",
    retention="90 days",
    compression="zip",
    enqueue=True,
    backtrace=True,
    diagnose=False,
    catch=True,
)


def configure_console(level: str = "INFO") -> None:
    """
    Attach (or replace) a colorized stderr sink.

    Args:
        level: Minimum level shown on the console
    """
    global _console_sink_id
    if _console_sink_id is not None:
        logger.remove(_console_sink_id)
    _console_sink_id = logger.add(
        sys.stderr,
        level=level.upper(),
        format=(
            "<green>{time:HH:mm:ss.SSS}</green> | "
            "<level>{level: <8}</level> | "
            "<cyan>{extra[name]}</cyan> | "
            "<level>{message}</level>"
        ),
        filter=lambda record: "name" in record["extra"],
        colorize=True,
    )


def get_logger(name: str):
    """
    Get a logger instance for a module with context binding.

    Args:
        name: Name of the module/component (usually __name__)

    Returns:
        Logger instance with bound context

    Example:
        >>> log = get_logger(__name__)
        >>> log.info("Assembled tangential stiffness")
    """
    return logger.bind(name=name)


def log_function_call(log_level: str = "DEBUG"):
    """
    Decorator to log calls of pipeline entry points.

    Array arguments are summarized by shape so that log lines stay short.

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR)
    """
    def _summarize(value: Any) -> str:
        shape = getattr(value, "shape", None)
        if shape is not None:
            return f"<array {tuple(shape)}>"
        text = repr(value)
        return text if len(text) <= 80 else text[:77] + "..."

    def decorator(func: Callable) -> Callable:
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            func_logger = get_logger(func.__module__)

            args_str = ", ".join(_summarize(a) for a in args)
            kwargs_str = ", ".join(f"{k}={_summarize(v)}" for k, v in kwargs.items())
            params = ", ".join(filter(None, [args_str, kwargs_str]))

            getattr(func_logger, log_level.lower())(
                f"🚀 Calling {func.__name__}({params})"
            )

            try:
                result = func(*args, **kwargs)
                getattr(func_logger, log_level.lower())(
                    f"✅ {func.__name__} completed"
                )
                return result
            except Exception as e:
                func_logger.error(
                    f"❌ {func.__name__} failed with {type(e).__name__}: {e}"
                )
                raise

        return wrapper
    return decorator


def log_performance(func: Callable) -> Callable:
    """
    Decorator to log wall time of numerical kernels.

    Example:
        @log_performance
        def assemble_tangential(...):
            ...
    """
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        func_logger = get_logger(func.__module__)

        start_time = time.perf_counter()
        try:
            result = func(*args, **kwargs)
            execution_time = (time.perf_counter() - start_time) * 1000
            func_logger.debug(
                f"⏱️  {func.__name__} executed in {execution_time:.2f}ms"
            )
            return result
        except Exception as e:
            execution_time = (time.perf_counter() - start_time) * 1000
            func_logger.error(
                f"💥 {func.__name__} failed after {execution_time:.2f}ms: {e}"
            )
            raise

    return wrapper


def log_probe_event(event_logger, message: str, level: str = "INFO", **extra_data):
    """Log probe/reconstruction milestones with emoji and extra context."""
    probe_logger = event_logger or get_logger("extprobe")
    emoji_map = {
        "DEBUG": "🔍",
        "INFO": "📡",
        "WARNING": "⚠️ ",
        "ERROR": "❌",
        "CRITICAL": "💀",
    }

    emoji = emoji_map.get(level.upper(), "📝")
    getattr(probe_logger.bind(**extra_data), level.lower())(f"{emoji} {message}")


def catch_and_log(
    level: str = "ERROR",
    message: str | None = None,
    reraise: bool = False,
    default_return: Any = None,
):
    """
    Catch, log and optionally swallow exceptions of the wrapped function.

    Args:
        level: Log level for caught exceptions
        message: Custom message prefix
        reraise: Whether to re-raise the exception
        default_return: Value to return if exception is caught and not re-raised
    """
    def decorator(func: Callable) -> Callable:
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            func_logger = get_logger(func.__module__)

            try:
                return func(*args, **kwargs)
            except Exception as e:
                error_msg = message or f"Exception in {func.__name__}"
                getattr(func_logger, level.lower())(
                    f"💥 {error_msg}: {type(e).__name__}: {e}"
                )

                if reraise:
                    raise
                return default_return

        return wrapper
    return decorator
