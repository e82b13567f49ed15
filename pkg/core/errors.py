"""Exception hierarchy shared by all packages.

Every error carries the tag of the package that raised it and a dict of
diagnostics, so the CLI can print module-tagged messages.
"""

from typing import Any


class ExtProbeError(Exception):
    module = "extprobe"

    def __init__(self, message: str, *, module: str | None = None, **details: Any):
        super().__init__(message)
        if module is not None:
            self.module = module
        self.details = details

    def __str__(self) -> str:
        base = super().__str__()
        if not self.details:
            return base
        extra = ", ".join(f"{k}={v}" for k, v in sorted(self.details.items()))
        return f"{base} ({extra})"


class ConfigError(ExtProbeError):
    module = "cli"


class DomainError(ExtProbeError, ValueError):
    """Precondition violation of a public operation."""


class BesselOverflowError(DomainError):
    module = "specfun"


class NumericalError(ExtProbeError, ArithmeticError):
    """A computation ran but did not reach its accuracy target."""


class QuadratureError(NumericalError):
    pass


class ExtrapolationError(NumericalError):
    pass


class SolverError(NumericalError):
    module = "extsolver"


class ResolutionError(DomainError):
    pass


class AdmissibilityError(DomainError):
    module = "ansatz"


class ValidationFailure(ExtProbeError):
    """Raised by the validate task when any check misses its tolerance."""
