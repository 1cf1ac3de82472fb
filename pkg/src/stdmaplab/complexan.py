"""Jensen formula in a sector, argument tracking, harmonic continuation, Harnack bounds.

Angle integrals are normalized to d(theta)/2pi throughout, so the sector
Jensen identity reads

    (1/2pi) int_a^b log|g(R e^{it})| dt - (1/2pi) int_a^b log|g(r e^{it})| dt
        = int_r^R Arg_{gamma_t}(g) dt / t,

with Arg_{gamma_t}(g) = Re (1/2pi i) int_{gamma_t} g'/g dz the continuous
argument change along the circular arc at radius t, divided by 2pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad

from .errors import Divergence, DomainError, ZeroOnPath

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Sector:
    r: float
    R: float
    alpha: float
    beta: float

    def __post_init__(self):
        if not (0 < self.r < self.R):
            raise ValueError("need 0 < r < R")
        if not (self.alpha < self.beta <= self.alpha + TWO_PI):
            raise ValueError("need alpha < beta <= alpha + 2pi")


def arg_change(g: Callable, path: np.ndarray, max_refine: int = 40,
               guard: float = 1e-13) -> float:
    """Continuous-branch argument increment of g along a sampled path, in turns.

    The path is refined adaptively until each step turns by less than
    pi/4.  An exact zero of g on a sample point, or a step that keeps
    turning fast on a segment shrunk below guard * path scale, raises
    ZeroOnPath (the finite exceptional set of the sector bookkeeping).
    """
    pts = np.asarray(path, dtype=complex)
    path_scale = float(np.max(np.abs(pts[1:] - pts[:-1]))) * len(pts)
    vals = np.asarray(g(pts), dtype=complex)
    for _ in range(max_refine):
        if np.any(vals == 0.0):
            raise ZeroOnPath("g vanishes at a path point")
        steps = np.angle(vals[1:] / vals[:-1])
        wide = np.abs(steps) >= np.pi / 4
        if not np.any(wide):
            return float(np.sum(steps) / TWO_PI)
        seglen = np.abs(pts[1:] - pts[:-1])
        if np.any(wide & (seglen < guard * path_scale)):
            raise ZeroOnPath("argument step does not settle; zero on the path")
        pts = _merge(pts, wide)
        vals = np.asarray(g(pts), dtype=complex)
    raise ZeroOnPath("argument step did not settle after max refinement")


def _merge(pts: np.ndarray, bad: np.ndarray) -> np.ndarray:
    """Insert midpoints into the flagged segments, preserving path order."""
    out = []
    for i in range(len(pts) - 1):
        out.append(pts[i])
        if bad[i]:
            out.append((pts[i] + pts[i + 1]) / 2.0)
    out.append(pts[-1])
    return np.asarray(out)


def arc_path(t: float, alpha: float, beta: float, n: int = 64) -> np.ndarray:
    th = np.linspace(alpha, beta, n)
    return t * np.exp(1j * th)


def ray_path(theta: float, r: float, R: float, n: int = 64) -> np.ndarray:
    return np.linspace(r, R, n) * np.exp(1j * theta)


def _mean_log_abs_on_arc(g, t, alpha, beta, tol=1e-10) -> float:
    """(1/2pi) int_alpha^beta log|g(t e^{i th})| d th by adaptive quadrature."""
    val, err = quad(lambda th: math.log(abs(g(t * np.exp(1j * th)))),
                    alpha, beta, epsabs=tol, epsrel=0.0, limit=300)
    return val / TWO_PI


def jensen_sector_residual(g: Callable, sector: Sector, n_t: int = 0,
                           breaks: Optional[Sequence[float]] = None,
                           tol: float = 1e-10) -> float:
    """|lhs - rhs| of the sector Jensen identity for analytic g.

    The t-integral of the arc argument change is done by adaptive
    quadrature; radii of known zeros can be passed as breakpoints (the
    integrand jumps there).
    """
    gv = _vectorize(g)
    lhs = (_mean_log_abs_on_arc(g, sector.R, sector.alpha, sector.beta, tol)
           - _mean_log_abs_on_arc(g, sector.r, sector.alpha, sector.beta, tol))

    def argfun(t):
        return arg_change(gv, arc_path(t, sector.alpha, sector.beta)) / t

    pts = None
    if breaks is not None:
        pts = [b for b in breaks if sector.r < b < sector.R]
    val, err = quad(argfun, sector.r, sector.R, epsabs=max(tol, 1e-12), epsrel=0.0,
                    limit=300, points=pts)
    return abs(lhs - val)


def _vectorize(g):
    def gv(z):
        z = np.asarray(z)
        try:
            out = g(z)
            out = np.asarray(out, dtype=complex)
            if out.shape == z.shape:
                return out
        except Exception:
            pass
        return np.array([g(zz) for zz in z.ravel()], dtype=complex).reshape(z.shape)
    return gv


def annulus_jensen_closed_form(zeros: Sequence[complex], r: float, R: float) -> float:
    """Closed-form annulus Jensen value for a monic polynomial with the given zeros.

    (1/2pi) int log|g(R e^{it})| dt - same at r
      = sum_j [max(log R, log|a_j|) - max(log r, log|a_j|)].
    """
    tot = 0.0
    for a in zeros:
        tot += max(math.log(R), math.log(abs(a))) - max(math.log(r), math.log(abs(a)))
    return tot


# ---------------------------------------------------------------------------
# Radial argument mismatch over piecewise-analytic Lax bases
# ---------------------------------------------------------------------------

def radial_argument_sum(lam: float, base, n: int, annulus: Tuple[float, float] = (0.8, 1.25),
                        y_grid: int = 8, E: complex = 0.0) -> float:
    """Averaged radial argument mismatch of the sector branches of z -> [B^n(z)]_11.

    The complexified dynamics z = t e^{ix} is analytic per angular
    sector of the cube-exchange base; across each boundary ray the two
    one-sided branches (itineraries of the ray as a limit from either
    side) disagree.  Summing (branch-above minus branch-below) radial
    argument changes over all boundary rays, averaging over y seeds and
    normalizing by n gives the radial term of the sector-wise argument
    bookkeeping, in turns.  It vanishes identically when the extension
    is globally analytic (rotations, lam = 0): the reversed-path sign is
    fixed by exactly that requirement.

    Zeros on a ray are handled by a half-cell y-seed perturbation.
    """
    from .dynamics import Rotation
    from .lax import AnnulusPermutation, CubeExchange

    if lam == 0.0:
        return 0.0
    if isinstance(base, Rotation):
        return 0.0  # globally analytic extension: branches coincide

    if isinstance(base, (CubeExchange, AnnulusPermutation)):
        k = base.n
    else:
        raise TypeError("base must be a Lax cube exchange, annulus permutation or rotation")

    s, t_out = annulus
    h = TWO_PI / k
    ys = (np.arange(y_grid) + 0.5) / y_grid * TWO_PI
    base_pts = np.linspace(s, t_out, 65)
    totals = []
    for y0 in ys:
        for attempt_y in (y0, y0 + np.pi / k):
            try:
                tot = 0.0
                for j in range(k):
                    above = _branch_angles(base, j, attempt_y, n, offset_frac=0.0)
                    below = _branch_angles(base, (j - 1) % k, attempt_y, n, offset_frac=1.0)
                    tot += (arg_change(_radial_g(lam, E, above), base_pts)
                            - arg_change(_radial_g(lam, E, below), base_pts))
                totals.append(tot)
                break
            except ZeroOnPath:
                continue
    if not totals:
        raise ZeroOnPath("all y seeds hit zeros on boundary rays")
    return float(np.mean(totals) / n)


def _branch_angles(base, cell_x: int, y: float, n: int, offset_frac: float) -> np.ndarray:
    """Angle itinerary of a boundary ray taken as the limit from inside cell cell_x.

    offset_frac is the x-offset within the cell in units of the cell
    width (0 for the lower edge, 1 for the upper edge); rigid cell
    permutations preserve it exactly.
    """
    from .lax import AnnulusPermutation, CubeExchange

    k = base.n
    h = TWO_PI / k
    xs = np.empty(n)
    if isinstance(base, CubeExchange):
        jy = min(int(y // h), k - 1)
        cell = cell_x * k + jy
        for m in range(n):
            xs[m] = (cell // k) * h + offset_frac * h
            cell = int(base.perm[cell])
    else:
        a = cell_x
        for m in range(n):
            xs[m] = a * h + offset_frac * h
            a = int(base.pi[a])
    return xs


def _radial_g(lam: float, E: complex, angles: np.ndarray):
    """g(t) = [prod B(t e^{i x_m})]_11 along a radial path, renormalized.

    The renormalization factor is a positive real, so the argument of
    the returned value is exactly the argument of g.
    """
    phases = np.exp(1j * angles)

    def g(pts):
        t = np.real(np.asarray(pts, dtype=complex)).ravel()
        a = np.ones(len(t), dtype=complex)
        b = np.zeros(len(t), dtype=complex)
        c = np.zeros(len(t), dtype=complex)
        d = np.ones(len(t), dtype=complex)
        for ph in phases:
            z = t * ph
            top = E - 0.5 * lam * (z + 1.0 / z)
            # B(z) = z * [[top, -1], [1, 0]]
            a, c = z * (top * a - c), z * a
            b, d = z * (top * b - d), z * b
            scale = np.maximum(np.maximum(np.abs(a), np.abs(b)),
                               np.maximum(np.abs(c), np.abs(d)))
            scale = np.where(scale == 0.0, 1.0, scale)
            a, b, c, d = a / scale, b / scale, c / scale, d / scale
        return a.reshape(np.asarray(pts).shape)
    return g


# ---------------------------------------------------------------------------
# Harmonic continuation series
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CircleMeasureSeries:
    """Fourier coefficients a_n = int e^{-i n t} dk(t), |n| <= n_max."""
    coeffs: np.ndarray  # length 2*n_max + 1, index n + n_max

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if len(c) % 2 != 1:
            raise ValueError("need coefficients for -n_max..n_max")
        object.__setattr__(self, "coeffs", c)

    @property
    def n_max(self) -> int:
        return (len(self.coeffs) - 1) // 2

    def a(self, n: int) -> complex:
        return self.coeffs[n + self.n_max]

    def is_real_measure(self, tol: float = 1e-12) -> bool:
        n = self.n_max
        return bool(np.all(np.abs(self.coeffs[:n][::-1] - np.conj(self.coeffs[n + 1:])) < tol))


def _radius_estimates(series: CircleMeasureSeries) -> Tuple[float, float]:
    """(inner, outer) convergence bounds from the root test on the coefficients."""
    n = series.n_max
    ms = np.arange(1, n + 1)
    ap = np.abs(np.array([series.a(m) for m in ms]))
    am = np.abs(np.array([series.a(-m) for m in ms]))

    def limsup(mags):
        nz = mags > 0
        if not np.any(nz):
            return 0.0
        return float(np.max(mags[nz] ** (1.0 / ms[nz])))

    lp = limsup(ap)   # H+ series sum a_m z^m / m converges for |z| < 1/lp
    lm = limsup(am)   # H- series sum a_{-m} z^{-m} / m converges for |z| > lm
    outer = np.inf if lp == 0 else 1.0 / lp
    inner = lm
    return inner, outer


def harmonic_continuation(series: CircleMeasureSeries, z: complex) -> dict:
    """Truncated H+/H- continuation values and the radial argument change alpha(z).

    H+(z) = -sum_{m>=1} a_m z^m / m (inner series), H-(z) = -sum_{m>=1}
    a_{-m} z^{-m} / m (outer series); alpha(z) = Im H-(z) for |z| <= 1
    and Im H+(z) + Im H(z/|z|) for |z| >= 1 with H = H- - H+.
    Raises Divergence outside the root-test annulus of the requested side.
    """
    z = complex(z)
    inner, outer = _radius_estimates(series)
    n = series.n_max
    ms = np.arange(1, n + 1)
    ap = np.array([series.a(m) for m in ms])
    am = np.array([series.a(-m) for m in ms])

    def Hplus(zz):
        return -np.sum(ap * zz ** ms / ms)

    def Hminus(zz):
        return -np.sum(am * zz ** (-ms.astype(float)) / ms)

    r = abs(z)
    if r <= 1.0:
        if not (r < outer * (1 + 1e-12)):
            raise Divergence("inner series diverges at |z|")
        if r > 0 and not (r > inner * (1 - 1e-12) or inner == 0.0):
            # H- must continue analytically inward; root test says it cannot
            raise Divergence("outer series does not continue to |z|")
        alpha = float(np.imag(Hminus(z))) if r > 0 else 0.0
    else:
        if not (r > inner * (1 - 1e-12)):
            raise Divergence("outer series diverges at |z|")
        zc = z / r
        H_circle = Hminus(zc) - Hplus(zc)
        alpha = float(np.imag(Hplus(z)) + np.imag(H_circle))
    return {
        "H_plus": complex(Hplus(z)) if r < outer else None,
        "H_minus": complex(Hminus(z)) if (r > inner and r > 0) else None,
        "alpha": alpha,
    }


def poisson_series(c: float, n_max: int) -> CircleMeasureSeries:
    """Coefficients a_n = c^{|n|} (harmonic measure of the point c in the disc)."""
    n = np.arange(-n_max, n_max + 1)
    return CircleMeasureSeries(c ** np.abs(n))


# ---------------------------------------------------------------------------
# Harnack / distortion lower bounds for harmonic functions
# ---------------------------------------------------------------------------

def harnack_bound(C_r: float, r: float, variant: str = "a") -> float:
    """Lower bound at |z| = 1 for harmonic h on |z| < r with h(0) = 0, h <= C_r.

    variant 'a': -C_r * 2/(r-1)   (Harnack inequality)
    variant 'b': -C_r * (1 + (1 + 1/r)/(1 - 1/r)^3)   (distortion theorem)
    """
    if r <= 1:
        raise DomainError("need r > 1")
    if C_r < 0:
        raise DomainError("need C_r >= 0")
    if variant == "a":
        return -C_r * 2.0 / (r - 1.0)
    if variant == "b":
        rinv = 1.0 / r
        return -C_r * (1.0 + (1.0 + rinv) / (1.0 - rinv) ** 3)
    raise ValueError("variant must be 'a' or 'b'")


def random_harmonic_poly(rng, degree: int = 6):
    """h(z) = Re sum_{k=1..degree} c_k z^k with h(0) = 0."""
    c = rng.normal(size=degree) + 1j * rng.normal(size=degree)

    def h(z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape)
        zp = np.ones_like(z)
        for k in range(degree):
            zp = zp * z
            out = out + np.real(c[k] * zp)
        return out
    return h


def harnack_harness(rng, n_poly: int, radii: Sequence[float], variant: str = "a",
                    n_grid: int = 512) -> bool:
    """Monte-Carlo verification: random harmonic polynomials never violate the bound."""
    th = np.arange(n_grid) / n_grid * TWO_PI
    circle = np.exp(1j * th)
    ok = True
    for _ in range(n_poly):
        h = random_harmonic_poly(rng)
        for r in radii:
            boundary = r * circle
            C = float(np.max(h(boundary)))  # sup over the disc is on the boundary
            if C < 0:
                continue  # h(0)=0 forces C >= 0 up to grid resolution
            lower = float(np.min(h(circle)))
            if lower < harnack_bound(C, r, variant) - 1e-9 * max(1.0, abs(C)):
                ok = False
    return ok
