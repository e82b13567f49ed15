"""
Forward solves of the weighted extension problem

    -div(z^{1-2s} c diag(gamma, 1) grad u) = 0   in R^n x (0, L_z)

with Dirichlet data u(., 0) = phi or weighted Neumann data
-c lim z^{1-2s} d_z u = f, homogeneous Dirichlet data at z = L_z and on
non-periodic lateral walls.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy import sparse
from scipy.sparse import linalg as splinalg

from ansatz.data import BoundaryData
from core.constants import MEAN_ZERO_TOL
from core.errors import AdmissibilityError, DomainError, SolverError
from core.types import LateralBC, Order, ProbeMode
from logger import get_logger, log_function_call, log_performance

from .assembly import NormalMatrices, TangentialMatrices, apply_operator, normal_matrices, tangential_matrices
from .field import ConductivityField
from .fourier import fast_dtn_pairing, fast_ntd_pairing
from .grid import WeightedGrid

log = get_logger(__name__)

_GAUGE_TOL = 1e-13


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    grid: WeightedGrid
    tangential: TangentialMatrices
    normal: NormalMatrices
    c_nodes: np.ndarray  # c at the tangential unknowns

    def apply(self, U: np.ndarray) -> np.ndarray:
        return apply_operator(self.tangential, self.normal, U)

    def energy(self, U: np.ndarray) -> float:
        return float(np.real(np.vdot(U, self.apply(U))))

    def scatter(self, values: np.ndarray) -> np.ndarray:
        """Tangential unknowns back onto the full tangential grid."""
        out = np.zeros(self.grid.tangential.size, dtype=values.dtype)
        out[self.tangential.interior] = values
        return out.reshape(self.grid.tangential.shape)


@dataclass(frozen=True, eq=False)
class ExtensionSolution:
    """
    Solution of one forward problem.

    ``flux`` is the Richardson estimate of c lim z^{1-2s} d_z u and
    ``variational_flux`` the same quantity read off the weak residual;
    both are negative for decaying solutions. ``pairing`` is the
    sesquilinear boundary pairing, equal to ``energy`` up to solver
    tolerance.
    """

    grid: WeightedGrid = field(repr=False)
    kind: ProbeMode
    values: np.ndarray = field(repr=False)  # (*tangential shape, normal nodes)
    energy: float
    trace: np.ndarray = field(repr=False)
    flux: np.ndarray = field(repr=False)
    variational_flux: np.ndarray = field(repr=False)
    pairing: complex
    method: str
    iterations: int
    residual: float
    residual_history: tuple[float, ...] = ()
    field_hash: str = "custom"
    operator: DiscreteOperator | None = field(default=None, repr=False)

    def energy_of(self, values: np.ndarray) -> float:
        """Discrete energy of another nodal field on the same grid."""
        if self.operator is None:
            raise DomainError("solution carries no operator", module="extsolver")
        U = np.asarray(values).reshape(self.grid.tangential.size, -1)[self.operator.tangential.interior]
        return self.operator.energy(U)

    def neumann_datum(self) -> BoundaryData:
        """The outward weighted flux -c lim z^{1-2s} d_z u as Neumann data."""
        return BoundaryData.from_field(-self.variational_flux, self.grid.tangential, ProbeMode.NEUMANN,
                                       source="variational_flux")

    def diagnostics(self) -> dict:
        return {
            "kind": self.kind.value,
            "method": self.method,
            "iterations": self.iterations,
            "residual": self.residual,
            "energy": self.energy,
            "pairing_real": float(self.pairing.real),
            "pairing_imag": float(self.pairing.imag),
        }


@log_performance
def discrete_operator(field_: ConductivityField, grid: WeightedGrid) -> DiscreteOperator:
    if field_.n != grid.n:
        raise DomainError("field and grid dimensions differ", module="extsolver", field_n=field_.n, grid_n=grid.n)
    tm = tangential_matrices(grid, field_.gamma, field_.c)
    nm = normal_matrices(grid)
    points = grid.tangential.points().reshape(-1, grid.n)[tm.interior]
    return DiscreteOperator(grid=grid, tangential=tm, normal=nm, c_nodes=field_.c(points))


def _check_data(data: BoundaryData, grid: WeightedGrid, kind: ProbeMode) -> None:
    if data.kind is not kind:
        raise DomainError(f"expected {kind.value} data, got {data.kind.value}", module="extsolver")
    tg = data.grid
    same = (
        tg.shape == grid.tangential.shape
        and np.isclose(tg.h, grid.h, rtol=1e-12, atol=0.0)
        and np.allclose(tg.lower, grid.tangential.lower, rtol=0.0, atol=1e-12 * max(1.0, grid.half_width))
    )
    if not same:
        raise DomainError("boundary data is not sampled on the solver grid", module="extsolver",
                          data_grid=tg.describe(), solver_grid=grid.tangential.describe())


def _column(matrix: sparse.csr_matrix, j: int) -> np.ndarray:
    return np.asarray(matrix[:, j].toarray()).ravel()


def _block(matrix: sparse.csr_matrix, rows: np.ndarray) -> sparse.csr_matrix:
    return matrix[rows][:, rows].tocsr()


def _split_solve(solve, rhs: np.ndarray) -> np.ndarray:
    """Apply a real solver to a complex right-hand side."""
    if not np.iscomplexobj(rhs):
        return solve(rhs)
    return solve(rhs.real) + 1j * solve(rhs.imag)


def _solve_modal(op: DiscreteOperator, F: np.ndarray, J: np.ndarray) -> np.ndarray:
    """Fast diagonalization in the normal direction, one sparse factorization per mode."""
    Kz = _block(op.normal.stiffness, J).toarray()
    Mz = _block(op.normal.mass, J).toarray()
    lam, Phi = linalg.eigh(Kz, Mz)  # Phi^T Mz Phi = I
    Ft = F @ Phi
    W = np.empty_like(Ft)
    Kx = op.tangential.stiffness
    Mx = op.tangential.mass_c
    for k, lam_k in enumerate(lam):
        lu = splinalg.splu((Kx + lam_k * Mx).tocsc())
        W[:, k] = _split_solve(lu.solve, Ft[:, k])
    return W @ Phi.T


def _global_matrix(op: DiscreteOperator, J: np.ndarray) -> sparse.csr_matrix:
    Kz = _block(op.normal.stiffness, J)
    Mz = _block(op.normal.mass, J)
    return (sparse.kron(op.tangential.stiffness, Mz) + sparse.kron(op.tangential.mass_c, Kz)).tocsr()


def _solve_cg(op: DiscreteOperator, F: np.ndarray, J: np.ndarray, rtol: float, max_iter: int):
    A = _global_matrix(op, J)
    diagonal = A.diagonal()
    jacobi = splinalg.LinearOperator(A.shape, matvec=lambda r: r / diagonal, dtype=float)
    history: list[float] = []
    iterations = 0

    def run(b: np.ndarray) -> np.ndarray:
        nonlocal iterations
        norm_b = np.linalg.norm(b)
        if norm_b == 0.0:
            return np.zeros_like(b)

        start = len(history)

        def record(xk):
            history.append(float(np.linalg.norm(b - A @ xk) / norm_b))

        x, info = splinalg.cg(A, b, rtol=rtol, maxiter=max_iter, M=jacobi, callback=record)
        iterations += len(history) - start
        if info != 0:
            raise SolverError("conjugate gradients did not converge", iterations=max_iter,
                              residual=history[-1] if history else float("nan"),
                              residual_history=tuple(history[-20:]))
        return x

    x = _split_solve(run, F.ravel())
    return x.reshape(F.shape), iterations, tuple(history)


def _solve_direct(op: DiscreteOperator, F: np.ndarray, J: np.ndarray) -> np.ndarray:
    lu = splinalg.splu(_global_matrix(op, J).tocsc())
    return _split_solve(lu.solve, F.ravel()).reshape(F.shape)


@log_performance
def _solve_system(op: DiscreteOperator, F: np.ndarray, J: np.ndarray):
    spec = op.grid.spec
    iterations, history = 0, ()
    if not np.any(F):
        return np.zeros_like(F), iterations, history
    if spec.method == "modal":
        U = _solve_modal(op, F, J)
    elif spec.method == "cg":
        U, iterations, history = _solve_cg(op, F, J, spec.rtol, spec.max_iter)
    else:
        U = _solve_direct(op, F, J)
    return U, iterations, history


def _weak_residual(op: DiscreteOperator, U_full: np.ndarray, F: np.ndarray, J: np.ndarray, scale: float) -> float:
    R = op.apply(U_full)[:, J] - F
    return float(np.linalg.norm(R) / scale) if scale > 0 else float(np.linalg.norm(R))


def _check_residual(residual: float, rtol: float, history: tuple) -> None:
    if residual > 100.0 * rtol:
        raise SolverError("linear system not solved to tolerance", residual=residual, rtol=rtol,
                          residual_history=history[-20:])
    if residual > rtol:
        log.warning(f"weak residual {residual:.2e} above rtol {rtol:.0e}")


def richardson_flux(op: DiscreteOperator, U_full: np.ndarray) -> np.ndarray:
    """
    Extrapolate c z^{1-2s} d_z u to z = 0 from the three smallest layers.

    With tau = z^{2s} / (2s) the weighted derivative is d_tau u. The layer
    quotients q_j are fitted by F + a X_j + b X_j^2 where X_j is the quotient
    of z^2, the leading regular correction.
    """
    z = op.grid.z
    s = op.grid.s.s
    tau = z[:4] ** (2 * s) / (2 * s)
    dtau = np.diff(tau)
    q = np.diff(U_full[:, :4], axis=1) / dtau
    X = np.diff(z[:4] ** 2) / dtau
    V = np.vander(X, 3, increasing=True)
    coeffs = np.linalg.solve(V, q.T)
    return op.c_nodes * coeffs[0]


def variational_flux(op: DiscreteOperator, U_full: np.ndarray) -> np.ndarray:
    """c lim z^{1-2s} d_z u from the weak residual at the z = 0 row."""
    r0 = op.apply(U_full)[:, 0]
    lu = splinalg.splu(op.tangential.mass.tocsc())
    return -_split_solve(lu.solve, r0)


@log_function_call("DEBUG")
def solve_dirichlet(
    field_: ConductivityField,
    grid: WeightedGrid,
    s: Order | float,
    phi: BoundaryData,
    *,
    operator: DiscreteOperator | None = None,
) -> ExtensionSolution:
    order = Order.of(s)
    if abs(order.s - grid.s.s) > 1e-14:
        raise DomainError("grid was built for another order", module="extsolver", s=order.s, grid_s=grid.s.s)
    _check_data(phi, grid, ProbeMode.DIRICHLET)
    op = operator or discrete_operator(field_, grid)
    tm, nm = op.tangential, op.normal

    boundary = phi.field.ravel()[tm.interior]
    M = grid.normal_count - 1
    J = np.arange(1, M)
    F = -np.outer(tm.stiffness @ boundary, _column(nm.mass, 0)[J]) - np.outer(
        tm.mass_c @ boundary, _column(nm.stiffness, 0)[J]
    )
    U_J, iterations, history = _solve_system(op, F, J)

    U = np.zeros((tm.size, grid.normal_count), dtype=complex)
    U[:, 0] = boundary
    U[:, J] = U_J
    residual = _weak_residual(op, U, np.zeros_like(F), J, np.linalg.norm(F))
    _check_residual(residual, grid.spec.rtol, history)

    energy = op.energy(U)
    vflux = variational_flux(op, U)
    pairing = -np.vdot(boundary, tm.mass @ vflux)  # int (-flux) conj(phi)
    solution = ExtensionSolution(
        grid=grid,
        kind=ProbeMode.DIRICHLET,
        values=_full_values(op, U),
        energy=energy,
        trace=op.scatter(U[:, 0]),
        flux=op.scatter(richardson_flux(op, U)),
        variational_flux=op.scatter(vflux),
        pairing=complex(pairing),
        method=grid.spec.method,
        iterations=iterations,
        residual=residual,
        residual_history=history,
        field_hash=field_.digest,
        operator=op,
    )
    log.debug(f"dirichlet solve: energy={energy:.10g}, residual={residual:.2e}")
    return solution


def _full_values(op: DiscreteOperator, U: np.ndarray) -> np.ndarray:
    grid = op.grid
    out = np.zeros((grid.tangential.size, grid.normal_count), dtype=complex)
    out[op.tangential.interior] = U
    return out.reshape(grid.shape)


def _check_compatibility(f: BoundaryData, grid: WeightedGrid) -> None:
    tg = f.grid
    mean = complex(tg.integrate(f.field))
    l1 = tg.norm_l1(f.field)
    if l1 > 0.0 and abs(mean) > MEAN_ZERO_TOL * l1:
        raise AdmissibilityError("Neumann data violates the compatibility condition", module="extsolver",
                                 mean=abs(mean), relative_mean=abs(mean) / l1, N=f.N)
    if grid.lateral is LateralBC.PERIODIC and l1 > 0.0 and abs(mean) > _GAUGE_TOL * l1:
        log.warning(f"gauge ambiguity: periodic laterals with discrete mean {abs(mean):.2e}, "
                    "the constant mode is fixed by the truncation at z = L_z")


@log_function_call("DEBUG")
def solve_neumann(
    field_: ConductivityField,
    grid: WeightedGrid,
    s: Order | float,
    f: BoundaryData,
    *,
    operator: DiscreteOperator | None = None,
) -> ExtensionSolution:
    order = Order.of(s)
    if abs(order.s - grid.s.s) > 1e-14:
        raise DomainError("grid was built for another order", module="extsolver", s=order.s, grid_s=grid.s.s)
    _check_data(f, grid, ProbeMode.NEUMANN)
    _check_compatibility(f, grid)
    op = operator or discrete_operator(field_, grid)
    tm = op.tangential

    datum = f.field.ravel()[tm.interior]
    M = grid.normal_count - 1
    J = np.arange(M)
    load = tm.mass @ datum
    F = np.zeros((tm.size, M), dtype=complex)
    F[:, 0] = load
    U_J, iterations, history = _solve_system(op, F, J)

    U = np.zeros((tm.size, grid.normal_count), dtype=complex)
    U[:, J] = U_J
    residual = _weak_residual(op, U, F, J, np.linalg.norm(F))
    _check_residual(residual, grid.spec.rtol, history)

    trace = U[:, 0]
    pairing = np.vdot(trace, load)  # int f conj(u(., 0))
    solution = ExtensionSolution(
        grid=grid,
        kind=ProbeMode.NEUMANN,
        values=_full_values(op, U),
        energy=op.energy(U),
        trace=op.scatter(trace),
        flux=op.scatter(richardson_flux(op, U)),
        variational_flux=op.scatter(-datum),
        pairing=complex(pairing),
        method=grid.spec.method,
        iterations=iterations,
        residual=residual,
        residual_history=history,
        field_hash=field_.digest,
        operator=op,
    )
    log.debug(f"neumann solve: pairing={pairing:.10g}, residual={residual:.2e}")
    return solution


def _fast_path_coefficients(field_: ConductivityField) -> tuple[np.ndarray, float]:
    if not field_.is_constant:
        raise DomainError("the spectral fast path needs constant coefficients, pass a grid",
                          module="extsolver", field=field_.label)
    return field_.constant_coefficients()


def dtn_pairing(
    field_: ConductivityField,
    grid: WeightedGrid | None,
    s: Order | float,
    phi: BoundaryData,
    *,
    operator: DiscreteOperator | None = None,
) -> float:
    """<Lambda phi, phi>, the energy of the Dirichlet solution. ``grid=None`` selects the spectral fast path."""
    if phi.kind is not ProbeMode.DIRICHLET:
        raise DomainError("dtn_pairing needs Dirichlet data", module="extsolver")
    if grid is None:
        gamma0, c0 = _fast_path_coefficients(field_)
        return fast_dtn_pairing(gamma0, c0, s, phi)
    return solve_dirichlet(field_, grid, s, phi, operator=operator).energy


def ntd_pairing(
    field_: ConductivityField,
    grid: WeightedGrid | None,
    s: Order | float,
    f: BoundaryData,
    *,
    operator: DiscreteOperator | None = None,
) -> float:
    """int f conj(u(., 0)) for the Neumann solution. ``grid=None`` selects the spectral fast path."""
    if f.kind is not ProbeMode.NEUMANN:
        raise DomainError("ntd_pairing needs Neumann data", module="extsolver")
    if grid is None:
        gamma0, c0 = _fast_path_coefficients(field_)
        return fast_ntd_pairing(gamma0, c0, s, f)
    solution = solve_neumann(field_, grid, s, f, operator=operator)
    if abs(solution.pairing.imag) > 1e-8 * max(abs(solution.pairing.real), 1e-300):
        log.warning(f"NtD pairing has imaginary part {solution.pairing.imag:.3e}")
    return float(solution.pairing.real)
