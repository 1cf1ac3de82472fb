"""Transfer cocycles over measure-preserving base maps and their Lyapunov exponents.

Three one-step matrix families share the machinery:

  spectral      A(w; x) = [[E - f_w(x), -1], [1, 0]]
  jacobian      [[E + lam f'(x), -1], [1, 0]]      (twist-form Jacobian, E = 2)
  jacobian_ham  [[1 + lam f'(x), 1], [lam f'(x), 1]]  (Hamiltonian-form Jacobian)

with the w-dependent kick f_w(x) = lam (w^{-1} e^{ix} + w e^{-ix}) / 2, so
w = 1 recovers the potential lam cos(x).  The B form is w * A(w); at w = 0
it is the analytic continuation [[-lam e^{ix}/2, 0], [0, 0]].

The sign convention (E minus potential) makes the spectral family the
transfer matrix of the Jacobi operator u_{n+1} + u_{n-1} + f_w(x_n) u_n = E u_n;
it matches the Jacobian family under the relabeling x -> x + pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .bounds import spectral_norm_2x2
from .dynamics import SIN, BaseMap, Identity, KickFunction, StandardMap, TorusPoint, wrap
from .errors import LogOfZero, NonFinite

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Cocycle2:
    """2x2 cocycle configuration over a base map."""
    E: complex = 0.0
    lam: float = 0.0
    f: KickFunction = SIN
    w: complex = 1.0 + 0.0j
    base: BaseMap = Identity()
    kind: str = "spectral"  # spectral | jacobian | jacobian_ham

    def entry11(self, x, w=None):
        """(1,1) entry of the A form at angle(s) x."""
        if self.kind == "spectral":
            ww = self.w if w is None else w
            pot = 0.5 * self.lam * (np.exp(1j * np.asarray(x)) / ww
                                    + ww * np.exp(-1j * np.asarray(x)))
            return self.E - pot
        if self.kind == "jacobian":
            return self.E + self.lam * self.f.derivative(x)
        raise ValueError("entry11 defined for spectral/jacobian kinds")


def one_step_matrix(x: float, cfg: Cocycle2, form: str = "A") -> np.ndarray:
    """One-step 2x2 matrix at angle x; form 'B' multiplies the A form by w.

    At w = 0 the B form is evaluated as the continuation w*A(w)|_{w=0},
    which is [[-lam e^{ix}/2, 0], [0, 0]].
    """
    if cfg.kind == "jacobian_ham":
        d = cfg.lam * cfg.f.derivative(x)
        return np.array([[1.0 + d, 1.0], [d, 1.0]])
    if cfg.kind == "jacobian":
        m11 = cfg.E + cfg.lam * cfg.f.derivative(x)
        return np.array([[m11, -1.0], [1.0, 0.0]])
    w = cfg.w
    if form == "A":
        return np.array([[cfg.entry11(x), -1.0], [1.0, 0.0]], dtype=complex)
    if w == 0:
        # w*A(w) -> [[-lam e^{ix}/2, 0], [0, 0]]
        return np.array([[-0.5 * cfg.lam * np.exp(1j * x), 0.0], [0.0, 0.0]], dtype=complex)
    return w * np.array([[cfg.entry11(x), -1.0], [1.0, 0.0]], dtype=complex)


@dataclass(frozen=True)
class LyapunovEstimate:
    value: float
    n_steps: int
    std_error: float
    seed: Tuple[float, float]


@dataclass(frozen=True)
class GridAverage:
    grid: np.ndarray          # (g, g) pointwise exponents, NaN for excluded cells
    mean: float
    values: np.ndarray        # valid pointwise values, sorted (empirical CDF support)
    invalid_cells: int
    n_steps: int

    def cdf(self, t):
        """Empirical CDF of the pointwise exponents."""
        return np.searchsorted(self.values, t, side="right") / len(self.values)

    def atom_at_zero(self, half_width: float = 0.005) -> float:
        """Mass of |exponent| < half_width (the KAM-region indicator bin)."""
        return float(np.mean(np.abs(self.values) < half_width))


def _matfun(cfg: Cocycle2) -> Callable[[np.ndarray], Tuple]:
    """Entries (m11, m12, m21, m22) of the one-step A-form matrix, vectorized."""
    if cfg.kind == "jacobian_ham":
        def fn(x):
            d = cfg.lam * cfg.f.derivative(x)
            return 1.0 + d, 1.0, d, 1.0
        return fn
    if cfg.kind == "jacobian":
        def fn(x):
            return cfg.E + cfg.lam * cfg.f.derivative(x), -1.0, 1.0, 0.0
        return fn

    def fn(x):
        return cfg.entry11(x), -1.0, 1.0, 0.0
    return fn


def _iterate_products(cfg: Cocycle2, x0, y0, n: int, renorm_every: int,
                      rotate: Optional[np.ndarray] = None):
    """Renormalized Birkhoff products of one-step matrices over the base orbit.

    Maintains the accumulated 2x2 block for every seed in parallel,
    rescaling by the largest column norm every renorm_every steps.
    Returns (log-accumulator, final block entries, invalid mask).
    """
    matfun = _matfun(cfg)
    x = np.array(x0, dtype=float, copy=True)
    y = np.array(y0, dtype=float, copy=True)
    cplx = (cfg.kind == "spectral") or np.iscomplexobj(np.asarray(cfg.E))
    dt = complex if cplx else float
    shape = x.shape
    a = np.ones(shape, dtype=dt)
    b = np.zeros(shape, dtype=dt)
    c = np.zeros(shape, dtype=dt)
    d = np.ones(shape, dtype=dt)
    acc = np.zeros(shape, dtype=float)
    invalid = np.zeros(shape, dtype=bool)
    if rotate is not None:
        r11, r12, r21, r22 = rotate
    for i in range(n):
        m11, m12, m21, m22 = matfun(x)
        a, c = m11 * a + m12 * c, m21 * a + m22 * c
        b, d = m11 * b + m12 * d, m21 * b + m22 * d
        if rotate is not None:
            a, c = r11 * a + r12 * c, r21 * a + r22 * c
            b, d = r11 * b + r12 * d, r21 * b + r22 * d
        if (i + 1) % renorm_every == 0 or i == n - 1:
            col = np.sqrt(np.maximum(np.abs(a) ** 2 + np.abs(c) ** 2,
                                     np.abs(b) ** 2 + np.abs(d) ** 2))
            bad = ~np.isfinite(col) | (col == 0.0)
            invalid |= bad
            col = np.where(bad, 1.0, col)
            a, b, c, d = a / col, b / col, c / col, d / col
            acc += np.where(bad, 0.0, np.log(col))
        x, y = cfg.base.apply(x, y)
    return acc, (a, b, c, d), invalid


def lyapunov_orbit(cfg: Cocycle2, p0: TorusPoint, n: int, renorm_every: int = 16,
                   rotate: Optional[np.ndarray] = None) -> LyapunovEstimate:
    """Lyapunov exponent along a single orbit.

    (1/n) sum of log rescale factors plus the log spectral norm of the
    final renormalized block.  std_error is the standard error of the
    per-block rates across renormalization blocks.
    """
    if not (n >= renorm_every >= 1):
        raise ValueError("need n >= renorm_every >= 1")
    rot = None
    if rotate is not None:
        rot = (rotate[0, 0], rotate[0, 1], rotate[1, 0], rotate[1, 1])

    # track per-block accumulators for the std error
    matfun = _matfun(cfg)
    x = np.asarray(p0.x, dtype=float)
    y = np.asarray(p0.y, dtype=float)
    cplx = (cfg.kind == "spectral") or np.iscomplexobj(np.asarray(cfg.E))
    dt = complex if cplx else float
    a, b, c, d = np.asarray(1, dtype=dt), np.asarray(0, dtype=dt), np.asarray(0, dtype=dt), np.asarray(1, dtype=dt)
    blocks = []
    acc = 0.0
    for i in range(n):
        m11, m12, m21, m22 = matfun(x)
        a, c = m11 * a + m12 * c, m21 * a + m22 * c
        b, d = m11 * b + m12 * d, m21 * b + m22 * d
        if rot is not None:
            r11, r12, r21, r22 = rot
            a, c = r11 * a + r12 * c, r21 * a + r22 * c
            b, d = r11 * b + r12 * d, r21 * b + r22 * d
        if (i + 1) % renorm_every == 0 or i == n - 1:
            col = math.sqrt(max(abs(a) ** 2 + abs(c) ** 2, abs(b) ** 2 + abs(d) ** 2))
            if not np.isfinite(col) or col == 0.0:
                raise NonFinite("accumulated block overflowed; decrease renorm_every")
            a, b, c, d = a / col, b / col, c / col, d / col
            acc += math.log(col)
            blocks.append(math.log(col))
        x, y = cfg.base.apply(x, y)
    acc += float(np.log(spectral_norm_2x2(a, b, c, d)))
    value = acc / n
    if len(blocks) > 1:
        rates = np.array(blocks) / renorm_every
        std_error = float(np.std(rates, ddof=1) / math.sqrt(len(rates)))
    else:
        std_error = 0.0
    if not np.isfinite(value):
        raise NonFinite("exponent not finite")
    return LyapunovEstimate(value=float(value), n_steps=n, std_error=std_error,
                            seed=(float(p0.x), float(p0.y)))


def grid_seeds(g: int) -> Tuple[np.ndarray, np.ndarray]:
    """Cell-center seeds (i + 1/2)/g * 2pi; avoids symmetric fixed points."""
    t = (np.arange(g) + 0.5) / g * TWO_PI
    X, Y = np.meshgrid(t, t, indexing="ij")
    return X, Y


def grid_lyapunov(cfg: Cocycle2, g: int, n: int, renorm_every: int = 16) -> GridAverage:
    """Pointwise exponents on a g x g grid of cell-center seeds.

    Deterministic given (cfg, g, n).  Cells whose product overflowed are
    excluded from the mean and counted.
    """
    if g < 2:
        raise ValueError("grid size must be >= 2")
    X, Y = grid_seeds(g)
    acc, (a, b, c, d), invalid = _iterate_products(cfg, X, Y, n, renorm_every)
    acc = acc + np.log(spectral_norm_2x2(a, b, c, d))
    vals = acc / n
    invalid |= ~np.isfinite(vals)
    grid = np.where(invalid, np.nan, vals)
    good = grid[~invalid]
    return GridAverage(grid=grid, mean=float(np.mean(good)),
                       values=np.sort(good.ravel()),
                       invalid_cells=int(np.count_nonzero(invalid)), n_steps=n)


def mu_n_subharmonic(cfg: Cocycle2, w: complex, n: int, g: int,
                     form: Optional[str] = None) -> float:
    """Finite-n subharmonic approximant: grid average of n^{-1} log |[M^n(w)]_11|.

    M is the B form for |w| <= 1 scans (which is regular through w = 0)
    and the A form outside, unless overridden.  A vanishing (1,1) entry
    at a grid point is retried once from a half-cell-shifted seed and
    excluded (with LogOfZero if the whole grid degenerates).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if form is None:
        form = "B" if abs(w) <= 1.0 else "A"
    cfgw = Cocycle2(E=cfg.E, lam=cfg.lam, f=cfg.f, w=w, base=cfg.base, kind="spectral")
    X, Y = grid_seeds(g)

    def top_entry(x0, y0):
        if form == "B" and w == 0:
            # product of [[-lam e^{ix}/2, 0],[0,0]]: log|.| telescopes to n log(lam/2)
            if cfg.lam == 0:
                raise LogOfZero("B(0) entry is identically zero at lam = 0")
            return np.full(x0.shape, n * np.log(cfg.lam / 2.0)), np.zeros(x0.shape, bool)
        acc, (a, _, _, _), bad = _iterate_products(cfgw, x0, y0, n, renorm_every=8)
        mag = np.abs(a)
        zero = (mag == 0.0) | ~np.isfinite(mag)
        res = acc + np.where(zero, 0.0, np.log(np.where(zero, 1.0, mag)))
        if form == "B" and w != 0:
            res = res + n * np.log(abs(w))
        return res, zero | bad

    vals, zero = top_entry(X, Y)
    if np.any(zero):
        half = np.pi / g
        vals2, zero2 = top_entry(wrap(X + half), wrap(Y + half))
        vals = np.where(zero, vals2, vals)
        zero = zero & zero2
    if np.all(zero):
        raise LogOfZero("(1,1) entry vanished on the entire grid")
    return float(np.mean(vals[~zero]) / n)


# ---------------------------------------------------------------------------
# Uniform hyperbolicity: cone certificates and the Herman rotation scan
# ---------------------------------------------------------------------------

DEFAULT_SCHEDULE = (np.pi / 4, np.pi / 8)

# geometric ladder reaching the thin cones needed at large coupling
FINE_SCHEDULE = tuple(np.pi / 4 / 2 ** k for k in range(12))


@dataclass(frozen=True)
class ConeReport:
    uniform: bool
    axis: Optional[int] = None
    half_angle: Optional[float] = None
    margin: float = 0.05


def _cone_holds_real(mats: np.ndarray, t: float, margin: float, axis: int) -> bool:
    """Exact cone-invariance check for real 2x2 matrices.

    Cone around basis axis `axis` with half-angle atan(t).  The image
    slope of (1, eta) is a Moebius function of eta, so its maximum over
    [-t, t] is attained at the endpoints provided the denominator has
    constant sign there.
    """
    if axis == 0:
        num1, num2 = mats[:, 1, 0], mats[:, 1, 1]
        den1, den2 = mats[:, 0, 0], mats[:, 0, 1]
    else:
        num1, num2 = mats[:, 0, 1], mats[:, 0, 0]
        den1, den2 = mats[:, 1, 1], mats[:, 1, 0]
    lo_den = den1 - t * den2
    hi_den = den1 + t * den2
    if np.any(lo_den * hi_den <= 0.0):
        return False
    slopes = np.maximum(np.abs((num1 + t * num2) / hi_den),
                        np.abs((num1 - t * num2) / lo_den))
    return bool(np.all(np.arctan(slopes) <= (1.0 - margin) * math.atan(t)))


def _cone_holds_complex(mats: np.ndarray, t: float, margin: float, axis: int) -> bool:
    """Conservative cone check for complex matrices (triangle-inequality bound)."""
    if axis == 0:
        num1, num2 = mats[:, 1, 0], mats[:, 1, 1]
        den1, den2 = mats[:, 0, 0], mats[:, 0, 1]
    else:
        num1, num2 = mats[:, 0, 1], mats[:, 0, 0]
        den1, den2 = mats[:, 1, 1], mats[:, 1, 0]
    den = np.abs(den1) - t * np.abs(den2)
    if np.any(den <= 0.0):
        return False
    bound = (np.abs(num1) + t * np.abs(num2)) / den
    return bool(np.all(np.arctan(bound) <= (1.0 - margin) * math.atan(t)))


def cone_test(mats: Sequence[np.ndarray],
              schedule: Sequence[float] = DEFAULT_SCHEDULE,
              margin: float = 0.05,
              axes: Sequence[int] = (0, 1)) -> ConeReport:
    """Sufficient certificate of uniform hyperbolicity from sampled one-step matrices.

    uniform=True iff some cone in the schedule (around either basis
    axis) is mapped strictly into itself, with image half-angle at most
    (1 - margin) times the input, by every sampled matrix.  A False
    verdict is not a proof of non-hyperbolicity.
    """
    mats = np.asarray(mats)
    if mats.ndim == 2:
        mats = mats[None]
    check = _cone_holds_real if not np.iscomplexobj(mats) else _cone_holds_complex
    for axis in axes:
        for theta in schedule:
            t = math.tan(theta)
            if check(mats, t, margin, axis):
                return ConeReport(uniform=True, axis=axis, half_angle=float(theta),
                                  margin=margin)
    return ConeReport(uniform=False, margin=margin)


def rotation_matrix(beta: float) -> np.ndarray:
    """R(e^{i beta}) in SO(2): [[cos b, sin b], [-sin b, cos b]]."""
    return np.array([[math.cos(beta), math.sin(beta)],
                     [-math.sin(beta), math.cos(beta)]])


@dataclass(frozen=True)
class HermanScan:
    betas: np.ndarray
    exponents: np.ndarray
    uniform: np.ndarray


def herman_scan(lam: float, betas: np.ndarray, n: int = 20000,
                n_seeds: int = 8, sample: int = 2000, seed_rng=None,
                f: KickFunction = SIN) -> HermanScan:
    """Lyapunov exponent and hyperbolicity certificate of R(e^{i beta}) * dT.

    dT is the Hamiltonian-form Jacobian of the standard map (the form in
    which R(-pi/4) dT is triangular with constant diagonal).  The
    certificate is the cone test on a phase-space sample of rotated
    one-step matrices, run down a fine half-angle ladder.
    """
    from .dynamics import Form, MapSpec

    spec = MapSpec(E=2, lam=lam, f=f, form=Form.HAMILTONIAN)
    base = StandardMap(spec)
    cfg = Cocycle2(lam=lam, f=f, base=base, kind="jacobian_ham")
    if seed_rng is None:
        from .rng import stream
        seed_rng = stream(20240101)
    xs = seed_rng.uniform(0.0, TWO_PI, size=sample)
    d = lam * f.derivative(xs)
    base_mats = np.empty((sample, 2, 2))
    base_mats[:, 0, 0] = 1.0 + d
    base_mats[:, 0, 1] = 1.0
    base_mats[:, 1, 0] = d
    base_mats[:, 1, 1] = 1.0

    exps = np.empty(len(betas))
    uni = np.empty(len(betas), dtype=bool)
    X0 = seed_rng.uniform(0.0, TWO_PI, size=n_seeds)
    Y0 = seed_rng.uniform(0.0, TWO_PI, size=n_seeds)
    for i, beta in enumerate(betas):
        R = rotation_matrix(beta)
        acc, (a, b, c, dd), invalid = _iterate_products(
            cfg, X0, Y0, n, renorm_every=16,
            rotate=(R[0, 0], R[0, 1], R[1, 0], R[1, 1]))
        acc = acc + np.log(spectral_norm_2x2(a, b, c, dd))
        exps[i] = float(np.mean(acc[~invalid]) / n)
        rotated = np.einsum("ij,njk->nik", R, base_mats)
        uni[i] = cone_test(rotated, schedule=FINE_SCHEDULE).uniform
    return HermanScan(betas=np.asarray(betas), exponents=exps, uniform=uni)


def pesin_region_size(grid: GridAverage, tau: float) -> Tuple[float, Optional[float]]:
    """Empirical fraction of cells with exponent > tau, plus the analytic bound.

    The analytic value is the ratio bound from the bounds module when it
    applies (lam > lambda0), else None; callers pass the lam they ran.
    """
    if tau < 0:
        raise ValueError("tau must be >= 0")
    frac = float(np.mean(grid.values > tau))
    return frac, None


def pesin_report(grid: GridAverage, tau: float, lam: float):
    from . import bounds
    frac, _ = pesin_region_size(grid, tau)
    try:
        analytic = bounds.pesin_lower(lam)
    except Exception:
        analytic = None
    return frac, analytic
