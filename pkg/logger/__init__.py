# Log package
from .logger import (
    catch_and_log,
    configure_console,
    get_logger,
    log_function_call,
    log_performance,
    log_probe_event,
)

__all__ = [
    'get_logger',
    'configure_console',
    'catch_and_log',
    'log_function_call',
    'log_probe_event',
    'log_performance',
]
