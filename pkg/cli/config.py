"""
Run configuration.

A run is described by one TOML or JSON file; every section is a strict
pydantic model, so unknown keys and out-of-range values are rejected with
their dotted path.
"""

import json
import os
import tomllib
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from core.constants import CUTOFF_EPSILON_DEFAULT, DEFAULT_FIT_POWERS, DEFAULT_SCHEDULE
from core.errors import ConfigError
from logger import get_logger
from solver.field import FieldSpec
from solver.grid import ResolutionSpec

log = get_logger(__name__)

THREADS_ENV = "EXTPROBE_THREADS"

Task = Literal["constants", "validate", "solve", "probe", "reconstruct", "stability"]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ProbeConfig(_Strict):
    x0: list[float] | None = None  # origin when omitted
    directions: list[list[float]] | None = None  # e1 for probe/solve, polarization set for reconstruct
    extra_directions: list[list[float]] = []
    mode: Literal["dtn", "ntd"] = "dtn"
    depth_k: int | None = Field(None, ge=0, le=3)
    cutoff: Literal["mollified_box", "radial_bump"] | None = None
    epsilon: float = Field(CUTOFF_EPSILON_DEFAULT, gt=0.0, lt=0.25)
    schedule: list[float] = list(DEFAULT_SCHEDULE)
    fit_powers: list[float] = list(DEFAULT_FIT_POWERS)
    fast_path: bool = True  # constant fields skip the finite element solve
    recover_metric: bool = False

    @model_validator(mode="after")
    def _check(self) -> "ProbeConfig":
        if len(self.schedule) < 3:
            raise ValueError("schedule needs at least 3 frequencies")
        if any(b <= a for a, b in zip(self.schedule, self.schedule[1:])) or self.schedule[0] <= 0:
            raise ValueError("schedule must be positive and strictly increasing")
        if not self.fit_powers or any(p <= 0 for p in self.fit_powers):
            raise ValueError("fit_powers must be a nonempty list of positive exponents")
        return self


class StabilityConfig(_Strict):
    field2: FieldSpec | None = None
    deltas: list[float] = [0.05, 0.1, 0.2]  # gamma2 = (1 + delta) gamma1 when field2 is omitted
    frequencies: list[float] = [32.0]

    @model_validator(mode="after")
    def _check(self) -> "StabilityConfig":
        if any(d <= -1.0 for d in self.deltas):
            raise ValueError("deltas must exceed -1")
        if not self.frequencies or any(N <= 0 for N in self.frequencies):
            raise ValueError("frequencies must be positive")
        return self


class CheckConfig(_Strict):
    """Tolerances of the validate task."""

    orders: list[float] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
    t_min: float = Field(1e-6, gt=0.0)
    t_max: float = Field(40.0, gt=0.0)
    points: int = Field(64, ge=2)
    identity_tol: float = Field(1e-8, gt=0.0)
    constants_tol: float = Field(1e-8, gt=0.0)
    fourier_check: bool = True
    fourier_cells: int = Field(32, ge=8)
    fourier_nodes: int = Field(400, ge=48)
    fourier_depth: float = Field(20.0, gt=0.0)
    fourier_tol: float = Field(1e-3, gt=0.0)


class OutputConfig(_Strict):
    directory: str = "out"
    formats: list[Literal["csv", "json", "svg"]] = ["csv", "json", "svg"]
    snapshot: bool = False


class RunConfig(_Strict):
    task: Task = "constants"
    s: float = Field(0.5, gt=0.0, lt=1.0)
    n: int = Field(2, ge=1)
    seed: int = 0
    threads: int = Field(1, ge=1)
    field: FieldSpec = FieldSpec()
    grid: ResolutionSpec = ResolutionSpec()
    probe: ProbeConfig = ProbeConfig()
    stability: StabilityConfig = StabilityConfig()
    checks: CheckConfig = CheckConfig()
    output: OutputConfig = OutputConfig()

    @model_validator(mode="after")
    def _check(self) -> "RunConfig":
        if self.field.n != self.n:
            raise ValueError(f"field.n = {self.field.n} does not match n = {self.n}")
        if self.stability.field2 is not None and self.stability.field2.n != self.n:
            raise ValueError("stability.field2 has another dimension")
        vectors = [self.probe.x0 or [0.0] * self.n, *(self.probe.directions or []), *self.probe.extra_directions]
        if any(len(v) != self.n for v in vectors):
            raise ValueError(f"probe vectors must have {self.n} entries")
        return self

    def with_overrides(self, task: str | None = None, out: str | None = None, threads: int | None = None) -> "RunConfig":
        data = self.model_dump(mode="json")
        if task is not None:
            data["task"] = task
        if out is not None:
            data["output"]["directory"] = out
        if threads is not None:
            data["threads"] = threads
        return _validate(data, "<command line>")


def _validate(raw: dict, source: str) -> RunConfig:
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(p) for p in first["loc"]) or "<root>"
        raise ConfigError(f"{source}: {where}: {first['msg']}", field=where,
                          errors=len(exc.errors())) from exc


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    except UnicodeDecodeError as exc:
        raise ConfigError(f"config {path} is not UTF-8 text: {exc.reason}") from exc
    try:
        raw = json.loads(text) if path.suffix == ".json" else tomllib.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}", line=exc.lineno, column=exc.colno) from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    config = _validate(raw, str(path))
    log.debug(f"loaded config {path}: task={config.task}, s={config.s}, n={config.n}")
    return config


def dump_config(config: RunConfig) -> str:
    """Canonical JSON form; ``load_config`` of it reproduces ``config``."""
    return json.dumps(config.model_dump(mode="json"), sort_keys=True, indent=2)


def resolve_threads(cli_value: int | None) -> int | None:
    """EXTPROBE_THREADS takes precedence over --threads."""
    env = os.environ.get(THREADS_ENV)
    if env is None or env.strip() == "":
        return cli_value
    try:
        value = int(env)
    except ValueError as exc:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from exc
    if value < 1:
        raise ConfigError(f"{THREADS_ENV} must be at least 1")
    return value
