"""Closed-form and quadrature-based upper/lower bound constants.

The central objects:

  M(E, lam)   = |E + i + sqrt((E+i)^2 - lam^2)| / sqrt(3)    (norm bound)
  C(E, lam)   = log M(E, lam) - log(lam/2)
  C(lam)      = C(0, lam) = arcsinh(1/lam) + log(2/sqrt(3))
  lam0        = 2 sqrt(2/(6 - 3 sqrt(3))) = 3.15470...

The entropy lower bound log(lam/2) - C(lam) crosses zero exactly at
lam0 (algebraically: lam0^2 = (16 + 8 sqrt(3))/3), equivalently
log M(0, lam0) = 2 log(lam0/2).  Note C(lam) itself is positive for all
lam and decreases to log(2/sqrt(3)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, QuadratureFail

LOG_2_OVER_SQRT3 = float(np.log(2.0 / np.sqrt(3.0)))


def _sqrt_upper(z: complex) -> complex:
    """Square root branch with nonnegative imaginary part.

    Principal branch post-composed with a sign flip; for a real
    nonnegative radicand the principal (real >= 0) root is kept.
    """
    s = np.sqrt(complex(z))
    if s.imag < 0.0:
        s = -s
    return s


def M(E: complex, lam: float) -> float:
    """Upper-bound constant |E + i + sqrt((E+i)^2 - lam^2)|/sqrt(3)."""
    if lam <= 0:
        raise DomainError("lam must be positive")
    w = complex(E) + 1j
    return abs(w + _sqrt_upper(w * w - lam * lam)) / np.sqrt(3.0)


def C_E(E: complex, lam: float) -> float:
    """C(E, lam) = log M(E, lam) - log(lam/2)."""
    return float(np.log(M(E, lam)) - np.log(lam / 2.0))


def C_lambda(lam: float) -> float:
    """C(lam) = arcsinh(1/lam) + log(2/sqrt(3)); strictly decreasing in lam."""
    if lam <= 0:
        raise DomainError("lam must be positive")
    return float(np.arcsinh(1.0 / lam) + LOG_2_OVER_SQRT3)


def lambda0() -> float:
    """Coupling where the entropy lower bound log(lam/2) - C(lam) vanishes."""
    return float(2.0 * np.sqrt(2.0 / (6.0 - 3.0 * np.sqrt(3.0))))


def entropy_lower(lam: float) -> float:
    """log(lam/2) - C(lam); positive iff lam > lambda0()."""
    return float(np.log(lam / 2.0) - C_lambda(lam))


def _quad_1d(f, a, b, tol):
    val, err = quad(f, a, b, epsabs=tol, epsrel=0.0, limit=400)
    if not np.isfinite(val) or err > 10.0 * tol:
        raise QuadratureFail(f"abserr={err:.3e} exceeds tol={tol:.3e}")
    return val


def hadamard_c(E: float, lam: float, tol: float = 1e-10) -> float:
    """Row-norm determinant bound c(E, lam) = (1/2pi) int log sqrt(2 + (E + lam cos x)^2) dx.

    The squared kick term is used throughout (the integrand of the
    determinant inequality); 2 + (.)^2 never vanishes so the integrand
    is smooth.
    """
    if lam <= 0:
        raise DomainError("lam must be positive")

    def f(x):
        t = E + lam * np.cos(x)
        return 0.5 * np.log(2.0 + t * t)

    # cos symmetry: integrate the half period and double
    return (2.0 / (2.0 * np.pi)) * _quad_1d(f, 0.0, np.pi, tol / 2.0)


def spectral_norm_2x2(a, b, c, d):
    """Largest singular value of [[a, b], [c, d]] (entrywise arrays allowed)."""
    s = np.abs(a) ** 2 + np.abs(b) ** 2 + np.abs(c) ** 2 + np.abs(d) ** 2
    det2 = np.abs(a * d - b * c) ** 2
    disc = np.sqrt(np.maximum(s * s - 4.0 * det2, 0.0))
    return np.sqrt((s + disc) / 2.0)


def m_one_step(E: float, lam: float, tol: float = 1e-10) -> float:
    """One-step norm integral m(E, lam) = (1/2pi) int log ||A_{E,lam cos}(x)|| dx.

    Upper bound for the Lyapunov exponent; log M(E, lam) bounds it from above.
    """

    def f(x):
        t = E - lam * np.cos(x)
        return np.log(spectral_norm_2x2(t, -1.0, 1.0, 0.0))

    return _quad_1d(f, 0.0, 2.0 * np.pi, tol) / (2.0 * np.pi)


def _gl_panels(n_panels: int, order: int = 12):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    h = 2.0 * np.pi / n_panels
    starts = np.arange(n_panels) * h
    x = (starts[:, None] + (nodes[None, :] + 1.0) * (h / 2.0)).ravel()
    w = np.tile(weights * (h / 2.0), n_panels)
    return x, w


def C2(lam: float, E: float = 0.0, tol: float = 1e-6, max_panels: int = 256) -> float:
    """Two-step upper-bound constant.

    (1/2) * mean over T^2 of log || A(y) A(x) || minus log(lam/2), where
    A(x) = [[E - lam cos x, -1], [1, 0]].  Composite tensor Gauss-Legendre
    with panel doubling until successive values agree to tol (the
    integrand has singular-value kinks on measure-zero curves, so a
    fixed-order rule with refinement is the robust choice).
    """
    if lam <= 0:
        raise DomainError("lam must be positive")

    def value(n_panels):
        x, wx = _gl_panels(n_panels)
        tx = E - lam * np.cos(x)
        ty = tx  # same grid in y
        # product [[ty,-1],[1,0]] @ [[tx,-1],[1,0]] = [[ty*tx - 1, -ty], [tx, -1]]
        TX, TY = np.meshgrid(tx, ty, indexing="ij")
        nrm = spectral_norm_2x2(TY * TX - 1.0, -TY, TX, -1.0 * np.ones_like(TX))
        vals = np.log(nrm)
        W = wx[:, None] * wx[None, :]
        return 0.5 * np.sum(W * vals) / (2.0 * np.pi) ** 2

    n_panels = 16
    prev = value(n_panels)
    while n_panels < max_panels:
        n_panels *= 2
        cur = value(n_panels)
        if abs(cur - prev) <= tol:
            return float(cur - np.log(lam / 2.0))
        prev = cur
    raise QuadratureFail("C2 panel doubling did not converge")


def pesin_lower(lam: float, use_hadamard: bool = False) -> float:
    """Analytic lower bound for the Lebesgue measure of the Pesin region.

    (log(lam/2) - C(lam)) / (log(lam/2) + C(2, lam)), vacuous (DomainError)
    for lam <= lambda0.  With use_hadamard=True the denominator uses the
    Hadamard constant c(E=2, lam) instead of C(E=2, lam).
    """
    if lam <= lambda0():
        raise DomainError("pesin bound is vacuous for lam <= lambda0")
    num = entropy_lower(lam)
    if use_hadamard:
        den = hadamard_c(2.0, lam)
    else:
        den = float(np.log(lam / 2.0) + C_E(2.0, lam))
    return float(num / den)


@dataclass(frozen=True)
class BoundReport:
    lam: float
    E: float
    M: float
    C_E: float
    C: float
    hadamard: float
    C2: float
    lam0: float
    entropy_lower: float
    entropy_upper: float
    pesin_lower: float


def bound_report(lam: float, E: float = 2.0, with_c2: bool = True) -> BoundReport:
    """All bound constants at (E, lam) in one record."""
    lo = entropy_lower(lam)
    had = hadamard_c(E, lam)
    c2 = C2(lam) if with_c2 else float("nan")
    pes = pesin_lower(lam) if lam > lambda0() else float("nan")
    return BoundReport(
        lam=lam, E=E, M=M(E, lam), C_E=C_E(E, lam), C=C_lambda(lam),
        hadamard=had, C2=c2, lam0=lambda0(),
        entropy_lower=lo, entropy_upper=float(np.log(lam / 2.0) + C_E(E, lam)),
        pesin_lower=pes,
    )
