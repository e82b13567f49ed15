"""
Report writers.

Output is byte-stable for identical results: JSON keys are sorted, floats are
written with 12 significant digits, and the SVG carries no timestamp and a
fixed id salt.
"""

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from core.constants import SIGNIFICANT_DIGITS  # noqa: E402
from core.errors import DomainError  # noqa: E402
from logger import catch_and_log, get_logger  # noqa: E402
from reconstruct.probe import PairingSeries  # noqa: E402

log = get_logger(__name__)

ReportFormat = Literal["csv", "json", "svg"]


@dataclass
class Table:
    columns: tuple[str, ...]
    rows: list[dict] = field(default_factory=list)


@dataclass
class RunResults:
    task: str
    summary: dict = field(default_factory=dict)
    tables: dict[str, Table] = field(default_factory=dict)
    series: list[PairingSeries] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)
    passed: bool = True


def format_float(value: float) -> str:
    if not math.isfinite(value):
        return str(value)
    return format(value, f".{SIGNIFICANT_DIGITS}g")


def canonical(value: Any) -> Any:
    """Plain JSON types with floats rounded to the report precision."""
    if isinstance(value, dict):
        return {str(k): canonical(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [canonical(v) for v in value]
    if isinstance(value, np.ndarray):
        return canonical(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return float(format_float(v)) if math.isfinite(v) else str(v)
    if isinstance(value, complex):
        return {"real": canonical(value.real), "imag": canonical(value.imag)}
    if value is None or isinstance(value, str):
        return value
    return str(value)


def _cell(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return format_float(float(value))
    if value is None:
        return ""
    return str(value)


def write_csv(table: Table, path: Path) -> Path:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([_cell(row.get(c)) for c in table.columns])
    return path


def write_json(results: RunResults, path: Path) -> Path:
    body = {
        "task": results.task,
        "passed": results.passed,
        "provenance": canonical(results.provenance),
        "summary": canonical(results.summary),
        "tables": {name: [canonical({c: row.get(c) for c in t.columns}) for row in t.rows]
                   for name, t in results.tables.items()},
    }
    path.write_text(json.dumps(body, sort_keys=True, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return path


@catch_and_log(level="WARNING", message="convergence plot skipped")
def write_svg(series: Sequence[PairingSeries], path: Path) -> Path:
    """Scaled pairing against N^{-1/2}, fitted curve, limit marker at the axis and the target when known."""
    with plt.rc_context({"svg.hashsalt": "extprobe", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for k, ser in enumerate(series):
            color = f"C{k % 10}"
            N = np.asarray(ser.schedule)
            label = f"{ser.mode.value} alpha=({', '.join(f'{a:.3g}' for a in ser.alpha)})"
            ax.plot(N ** -0.5, ser.scaled, "o", color=color, label=label, gid=f"data-{k}")
            dense = np.geomspace(N[0], N[-1] * 1e6, 200)
            ax.plot(dense ** -0.5, ser.fit.predict(dense), "-", color=color, lw=1.0, gid=f"fit-{k}")
            ax.plot([0.0], [ser.fit.limit], "D", color=color, gid=f"limit-{k}")
            if ser.target is not None:
                ax.axhline(ser.target, color=color, ls=":", lw=1.0, gid=f"target-{k}")
        ax.set_xlim(left=0.0)
        ax.set_xlabel("N^(-1/2)")
        ax.set_ylabel("scaled pairing")
        if series:
            ax.legend(fontsize="small")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path


def emit_report(results: RunResults, fmt: ReportFormat, directory: str | Path) -> list[Path]:
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DomainError(f"cannot create output directory {directory}: {exc.strerror}", module="cli") from exc
    if not directory.is_dir():
        raise DomainError(f"output path {directory} is not a directory", module="cli")
    try:
        if fmt == "csv":
            return [write_csv(table, directory / f"{name}.csv") for name, table in sorted(results.tables.items())]
        if fmt == "json":
            return [write_json(results, directory / "report.json")]
        if fmt == "svg":
            written = write_svg(results.series, directory / "convergence.svg")
            return [written] if written is not None else []
    except OSError as exc:
        raise DomainError(f"cannot write {fmt} report to {directory}: {exc.strerror}", module="cli") from exc
    raise DomainError(f"unknown report format {fmt!r}", module="cli")
