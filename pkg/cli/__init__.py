# CLI package
from .config import RunConfig, dump_config, load_config, resolve_threads
from .report import RunResults, Table, emit_report
from .runner import exit_code, run

__all__ = [
    'RunConfig',
    'RunResults',
    'Table',
    'dump_config',
    'emit_report',
    'exit_code',
    'load_config',
    'resolve_threads',
    'run',
]
