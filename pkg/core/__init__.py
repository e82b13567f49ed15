"""Core numerics: order, Bessel functions, limit constants and radial profiles."""

from .constants import *
from .errors import (
    AdmissibilityError,
    BesselOverflowError,
    ConfigError,
    DomainError,
    ExtProbeError,
    ExtrapolationError,
    NumericalError,
    QuadratureError,
    ResolutionError,
    SolverError,
    ValidationFailure,
)
from .types import CutoffKind, LateralBC, Order, PairingMode, ProbeMode, ProfileKind, TangentialGrid
from .specfun import (
    IdentityReport,
    LimitConstants,
    check_bessel_identities,
    eval_I,
    eval_I_negative,
    eval_K,
    limit_constants,
)
from .odekernel import (
    ProfileGridSpec,
    RadialProfile,
    bessel_profile,
    flux_from_source,
    homogeneous_profile,
    ode_residual,
    solve_inhomogeneous,
    weighted_flux_limit,
)
