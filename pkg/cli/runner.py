"""
Task driver.

``run`` executes one RunConfig and writes its reports; ``exit_code`` maps
the error hierarchy onto the process exit status.
"""

import hashlib
from concurrent.futures import ThreadPoolExecutor
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import numpy as np
from rich.console import Console
from rich.markup import escape
from rich.table import Table as RichTable

from ansatz.data import BoundaryData, ProbeSpec, dirichlet_data, nearest_admissible, neumann_data
from core.constants import DEFAULT_DEPTH_DIRICHLET, DEFAULT_DEPTH_NEUMANN
from core.errors import (
    AdmissibilityError,
    BesselOverflowError,
    ConfigError,
    DomainError,
    ExtProbeError,
    ResolutionError,
    ValidationFailure,
)
from core.specfun import LimitConstants, check_bessel_identities, limit_constants
from core.types import PairingMode, ProbeMode
from logger import get_logger, log_probe_event
from reconstruct.probe import GridChoice, admissible_schedule, default_cutoff, probe_direction
from reconstruct.stability import stability_gap
from reconstruct.tensor import polarization_directions, reconstruct_point
from solver.extension import solve_dirichlet, solve_neumann
from solver.field import ConductivityField
from solver.fourier import fourier_reference
from solver.grid import build_domain, periodic_domain
from solver.snapshot import save_snapshot

from .config import RunConfig, dump_config
from .report import RunResults, Table, emit_report

log = get_logger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_VALIDATION = 4

SERIES_COLUMNS = ("mode", "alpha", "N", "raw", "scaled", "fit")
FIT_COLUMNS = ("mode", "alpha", "limit", "slopes", "residual", "limit_half", "target", "relative_error", "monotone")


# domain errors that only surface while a task computes, not from the inputs alone
RUNTIME_DOMAIN_ERRORS = (ResolutionError, AdmissibilityError, BesselOverflowError)

_PACKAGE_TAGS = {
    "solver": "extsolver",
    "core.specfun": "specfun",
    "core.odekernel": "odekernel",
    "ansatz": "ansatz",
    "reconstruct": "reconstruct",
    "cli": "cli",
    "core": "core",
    "logger": "logger",
}


def exit_code(error: BaseException) -> int:
    if isinstance(error, ValidationFailure):
        return EXIT_VALIDATION
    if isinstance(error, RUNTIME_DOMAIN_ERRORS):
        return EXIT_NUMERICAL
    if isinstance(error, (ConfigError, DomainError)):
        return EXIT_CONFIG
    return EXIT_NUMERICAL


def _raising_module(error: BaseException) -> str:
    """Tag of the innermost extprobe module on the traceback of a foreign exception."""
    tag = "extprobe"
    tb = error.__traceback__
    while tb is not None:
        name = tb.tb_frame.f_globals.get("__name__", "")
        for prefix, candidate in _PACKAGE_TAGS.items():
            if name == prefix or name.startswith(prefix + "."):
                tag = candidate
                break
        tb = tb.tb_next
    return tag


def describe_error(error: BaseException) -> str:
    module = error.module if isinstance(error, ExtProbeError) else _raising_module(error)
    return f"[{module}] {type(error).__name__}: {error}"


def _package_version() -> str:
    try:
        return version("extprobe")
    except PackageNotFoundError:
        return "0+local"


def provenance(config: RunConfig, constants: LimitConstants | None = None) -> dict:
    text = dump_config(config)
    out = {
        "version": _package_version(),
        "config_sha256": hashlib.sha256(text.encode("utf-8")).hexdigest(),
        "field_hash": config.field.digest(),
        "field": config.field.model_dump(mode="json"),
        "grid": config.grid.model_dump(mode="json"),
        "schedule": list(config.probe.schedule),
        "fit_powers": list(config.probe.fit_powers),
        "s": config.s,
        "n": config.n,
        "seed": config.seed,
    }
    if constants is not None:
        out["constants"] = constants.as_dict()
    return out


def _grid_choice(config: RunConfig, field_: ConductivityField) -> GridChoice:
    return None if field_.is_constant and config.probe.fast_path else config.grid


def _directions(config: RunConfig) -> list[np.ndarray]:
    raw = config.probe.directions or [[1.0] + [0.0] * (config.n - 1)]
    return [np.asarray(d, float) / np.linalg.norm(d) for d in raw]


def _x0(config: RunConfig) -> np.ndarray:
    return np.asarray(config.probe.x0 or [0.0] * config.n, float)


def _series_tables(series) -> dict[str, Table]:
    rows, fits = [], []
    for ser in series:
        rows.extend(ser.rows())
        fits.append({
            "mode": ser.mode.value,
            "alpha": " ".join(f"{a:.12g}" for a in ser.alpha),
            "limit": ser.fit.limit,
            "slopes": " ".join(f"{b:.12g}" for b in ser.fit.slopes),
            "residual": ser.fit.residual,
            "limit_half": ser.fit_half.limit,
            "target": ser.target,
            "relative_error": ser.diagnostics.get("relative_error"),
            "monotone": ser.monotone,
        })
    return {"series": Table(SERIES_COLUMNS, rows), "fits": Table(FIT_COLUMNS, fits)}


def _series_summary(ser) -> dict:
    return {
        "mode": ser.mode.value,
        "alpha": list(ser.alpha),
        "x0": list(ser.x0),
        "cutoff": ser.cutoff,
        "schedule": list(ser.schedule),
        "raw": list(ser.raw),
        "scaled": list(ser.scaled),
        "fit": ser.fit.as_dict(),
        "fit_half": ser.fit_half.as_dict(),
        "monotone": ser.monotone,
        "frequency_cap": ser.frequency_cap,
        "target": ser.target,
        "diagnostics": dict(ser.diagnostics),
    }


# tasks

def task_constants(config: RunConfig) -> RunResults:
    constants = limit_constants(config.s)
    row = constants.as_dict()
    columns = ("s", "c_s", "c_hat_s", "c_bar_s", "c1", "c2", "c_sum", "closed_form_sum", "quad_error")
    return RunResults(
        task="constants",
        summary={"constants": row, "closed_form_deviation": constants.closed_form_deviation},
        tables={"constants": Table(columns, [row])},
        provenance=provenance(config, constants),
    )


def _fourier_check(config: RunConfig) -> dict:
    """Dirichlet solve of a single Fourier mode on a periodic box against the separable solution."""
    checks = config.checks
    n = config.n
    field_ = ConductivityField.from_spec(config.field)
    if not field_.is_constant:
        origin = np.zeros((1, n))
        field_ = ConductivityField.constant(field_.gamma(origin)[0], float(field_.c(origin)[0]))
    gamma0, c0 = field_.constant_coefficients()
    spec = config.grid.model_copy(update={"normal_nodes": checks.fourier_nodes, "method": "modal"})
    period = 2.0 * np.pi
    grid = periodic_domain(np.zeros(n), period, checks.fourier_cells, checks.fourier_depth, config.s, spec)
    xi = np.zeros(n)
    xi[0] = 1.0
    reference = fourier_reference(config.s, xi, gamma0, c0)
    points = grid.tangential.points()
    phi = BoundaryData.from_field(np.exp(1j * (points @ xi)), grid.tangential, ProbeMode.DIRICHLET)
    solution = solve_dirichlet(field_, grid, config.s, phi)
    exact = reference.values(points, grid.z)
    cells = grid.weight_integrals()
    weights = np.zeros(grid.normal_count)  # lumped z^{1-2s} mass per node
    weights[:-1] += 0.5 * cells
    weights[1:] += 0.5 * cells
    diff = np.sum(np.abs(solution.values - exact) ** 2 * weights)
    norm = np.sum(np.abs(exact) ** 2 * weights)
    error = float(np.sqrt(diff / norm))
    energy_ref = reference.energy(period**n)
    pairing_error = abs(solution.energy - energy_ref) / energy_ref
    return {
        "relative_l2_error": error,
        "pairing": solution.energy,
        "pairing_reference": energy_ref,
        "pairing_relative_error": pairing_error,
        "passed": error <= checks.fourier_tol and pairing_error <= 1e-2,
    }


def task_validate(config: RunConfig) -> RunResults:
    checks = config.checks
    grid = np.geomspace(checks.t_min, checks.t_max, checks.points)
    rows = []
    passed = True
    for s in checks.orders:
        report = check_bessel_identities(s, grid)
        constants = limit_constants(s)
        product = abs(constants.c_bar_s * constants.c_hat_s - constants.c_sum) / constants.c_sum
        ok = (report.passed(checks.identity_tol) and constants.closed_form_deviation <= checks.constants_tol
              and product <= checks.constants_tol)
        passed &= ok
        rows.append({
            "s": s,
            "wronskian": report.wronskian,
            "recurrence": report.recurrence,
            "weighted_derivative": report.weighted_derivative,
            "closed_form_deviation": constants.closed_form_deviation,
            "product_deviation": product,
            "passed": ok,
        })
    summary: dict = {"identities": rows}
    if checks.fourier_check:
        fourier = _fourier_check(config)
        summary["fourier"] = fourier
        passed &= fourier["passed"]
    columns = ("s", "wronskian", "recurrence", "weighted_derivative", "closed_form_deviation",
               "product_deviation", "passed")
    return RunResults(task="validate", summary=summary, tables={"identities": Table(columns, rows)},
                      provenance=provenance(config), passed=bool(passed))


def _probe_spec(config: RunConfig, alpha: np.ndarray, N: float) -> ProbeSpec:
    mode = PairingMode(config.probe.mode)
    eta = default_cutoff(mode, config.n, config.probe.epsilon, config.probe.cutoff)
    depth = config.probe.depth_k
    if depth is None:
        depth = DEFAULT_DEPTH_DIRICHLET if mode is PairingMode.DTN else DEFAULT_DEPTH_NEUMANN
    if mode is PairingMode.NTD:
        N = nearest_admissible(eta, alpha, N)
    return ProbeSpec(config.s, tuple(_x0(config)), tuple(alpha), N, mode.boundary, depth, eta)


def task_solve(config: RunConfig) -> RunResults:
    field_ = ConductivityField.from_spec(config.field)
    probe = _probe_spec(config, _directions(config)[0], config.probe.schedule[0])
    grid = build_domain(field_, probe.N, config.grid, config.s, N_min=probe.N, center=probe.x0,
                        alignment=probe.eta.scale)
    if probe.mode is ProbeMode.DIRICHLET:
        solution = solve_dirichlet(field_, grid, config.s, dirichlet_data(probe, grid.tangential))
    else:
        solution = solve_neumann(field_, grid, config.s, neumann_data(probe, grid.tangential))
    row = {"N": probe.N, **solution.diagnostics()}
    summary = {"solution": row, "grid": grid.describe()}
    if config.output.snapshot:
        path = save_snapshot(solution, Path(config.output.directory).joinpath("solution.extsnap"))
        summary["snapshot"] = path.name
    columns = ("N", "kind", "method", "iterations", "residual", "energy", "pairing_real", "pairing_imag")
    return RunResults(task="solve", summary=summary, tables={"solve": Table(columns, [row])},
                      provenance=provenance(config))


def task_probe(config: RunConfig) -> RunResults:
    field_ = ConductivityField.from_spec(config.field)
    mode = PairingMode(config.probe.mode)
    eta = default_cutoff(mode, config.n, config.probe.epsilon, config.probe.cutoff)
    grid = _grid_choice(config, field_)
    x0 = _x0(config)

    def one(alpha: np.ndarray):
        schedule = config.probe.schedule if mode is PairingMode.DTN else admissible_schedule(eta, alpha, config.probe.schedule)
        return probe_direction(field_, grid, config.s, x0, alpha, schedule, mode, cutoff=eta,
                               depth_k=config.probe.depth_k, fit_powers=config.probe.fit_powers)

    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        series = list(pool.map(one, _directions(config)))
    constants = limit_constants(config.s)
    return RunResults(
        task="probe",
        summary={"series": [_series_summary(ser) for ser in series], "fast_path": grid is None},
        tables=_series_tables(series),
        series=series,
        provenance=provenance(config, constants),
    )


def task_reconstruct(config: RunConfig) -> RunResults:
    field_ = ConductivityField.from_spec(config.field)
    constants = limit_constants(config.s)
    x0 = _x0(config)
    result = reconstruct_point(
        field_, _grid_choice(config, field_), config.s, x0, config.probe.mode, config.probe.schedule,
        constants=constants, extra_directions=config.probe.extra_directions, fit_powers=config.probe.fit_powers,
        epsilon=config.probe.epsilon, cutoff_kind=config.probe.cutoff, recover_metric=config.probe.recover_metric,
        threads=config.threads,
    )
    truth = field_.weighted_tensor(x0[None, :], config.s)[0]
    recovered = result.tensor.matrix
    error = float(np.max(np.abs(recovered - truth)) / np.max(np.abs(truth)))
    rows = [
        {"i": i, "j": j, "recovered": float(recovered[i, j]), "true": float(truth[i, j])}
        for i in range(config.n) for j in range(config.n)
    ]
    summary = {
        "tensor": result.tensor.as_dict(),
        "true_tensor": truth.tolist(),
        "max_relative_error": error,
        "series": [_series_summary(ser) for ser in result.series],
    }
    if result.metric is not None:
        summary["metric"] = result.metric.tolist()
    log_probe_event(log, f"recovered tensor at x0={x0.tolist()}, max relative error {error:.3e}", "INFO")
    tables = _series_tables(result.series)
    tables["tensor"] = Table(("i", "j", "recovered", "true"), rows)
    return RunResults(task="reconstruct", summary=summary, tables=tables, series=list(result.series),
                      provenance=provenance(config, constants))


def task_stability(config: RunConfig) -> RunResults:
    field1 = ConductivityField.from_spec(config.field)
    if config.stability.field2 is not None:
        cases = [(None, ConductivityField.from_spec(config.stability.field2))]
    else:
        cases = [(delta, field1.scaled(1.0 + delta)) for delta in config.stability.deltas]
    if config.probe.directions is None:
        directions = list(polarization_directions(config.n).values())
    else:
        directions = _directions(config)
    probes = [_probe_spec(config, alpha, N) for N in config.stability.frequencies for alpha in directions]
    fast = field1.is_constant and all(f.is_constant for _, f in cases) and config.probe.fast_path
    grid = None if fast else config.grid

    rows, reports = [], []
    for delta, field2 in cases:
        report = stability_gap(field1, field2, grid, config.s, probes, threads=config.threads)
        reports.append({"delta": delta, **report.as_dict()})
        rows.append({"delta": delta, "gap_proxy": report.gap_proxy, "coefficient_gap": report.coefficient_gap,
                     "ratio": report.ratio, "exact_equality": report.exact_equality})
    ratios = [r["ratio"] for r in rows if r["ratio"] is not None]
    spread = (max(ratios) / min(ratios) - 1.0) if len(ratios) > 1 and min(ratios) > 0 else 0.0
    summary = {"cases": reports, "ratio_spread": spread}
    columns = ("delta", "gap_proxy", "coefficient_gap", "ratio", "exact_equality")
    return RunResults(task="stability", summary=summary, tables={"stability": Table(columns, rows)},
                      provenance=provenance(config))


TASKS = {
    "constants": task_constants,
    "validate": task_validate,
    "solve": task_solve,
    "probe": task_probe,
    "reconstruct": task_reconstruct,
    "stability": task_stability,
}


def _print_results(console: Console, results: RunResults) -> None:
    for name, table in sorted(results.tables.items()):
        view = RichTable(title=f"{results.task}: {name}", show_lines=False)
        for column in table.columns:
            view.add_column(column)
        for row in table.rows:
            view.add_row(*[_short(row.get(c)) for c in table.columns])
        console.print(view)


def _short(value) -> str:
    if isinstance(value, float):
        return f"{value:.8g}"
    return "" if value is None else str(value)


def _prepare_directory(directory: Path) -> None:
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DomainError(f"cannot create output directory {directory}: {exc.strerror}", module="cli") from exc


def run(config: RunConfig, console: Console | None = None) -> int:
    """Execute the configured task, write its reports and return the exit status."""
    console = console or Console(stderr=True)
    log_probe_event(log, f"task {config.task} started", "INFO", s=config.s, n=config.n, threads=config.threads)
    try:
        if config.output.snapshot:
            _prepare_directory(Path(config.output.directory))
        results = TASKS[config.task](config)
        written = []
        for fmt in sorted(set(config.output.formats)):
            written += emit_report(results, fmt, config.output.directory)
        _print_results(console, results)
        if not results.passed:
            raise ValidationFailure(f"task {config.task} missed its tolerances", module="cli")
    except ExtProbeError as exc:
        console.print(f"[red]{escape(describe_error(exc))}[/red]")
        log.error(describe_error(exc))
        return exit_code(exc)
    except Exception as exc:
        console.print(f"[red]{escape(describe_error(exc))}[/red]")
        log.exception(describe_error(exc))
        return EXIT_NUMERICAL
    log_probe_event(log, f"task {config.task} finished, {len(written)} files", "INFO")
    return EXIT_OK
