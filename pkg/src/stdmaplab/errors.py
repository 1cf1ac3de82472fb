"""Exception types shared across the package."""


class StdMapLabError(Exception):
    """Base class for all package errors."""


class NonFinite(StdMapLabError):
    """A renormalized product diverged in floating point (renorm interval too large)."""


class LogOfZero(StdMapLabError):
    """log|entry| hit an exact zero that survived the documented seed perturbation."""


class QuadratureFail(StdMapLabError):
    """Adaptive quadrature did not reach the requested tolerance."""


class EigFail(StdMapLabError):
    """Dense eigensolver failed to converge; carries iteration diagnostics."""


class RootFindFail(StdMapLabError):
    """Companion-matrix root finding failed to converge."""


class DomainError(StdMapLabError, ValueError):
    """Argument outside the mathematical domain of the operation."""


class DegenerateOverlap(StdMapLabError):
    """Cell-overlap matrix is identically zero; measure estimation is broken."""


class ZeroOnPath(StdMapLabError):
    """|g| fell below the guard on an argument-tracking path after max refinement."""


class Divergence(StdMapLabError):
    """Series evaluation outside the estimated convergence annulus."""


class SupportViolation(StdMapLabError):
    """Measure support lies outside the annulus required by the operation."""


class ConfigError(StdMapLabError):
    """Experiment configuration failed schema validation."""
