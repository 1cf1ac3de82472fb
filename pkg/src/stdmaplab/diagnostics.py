"""Remark-level numerical experiments: Wiener test, duality gap, diffusion, exponent CDFs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from .cocycle import Cocycle2, GridAverage, grid_lyapunov
from .dynamics import Form, MapSpec, Rotation, StandardMap, wrap
from .errors import EigFail

TWO_PI = 2.0 * np.pi
GOLDEN_ALPHA = TWO_PI * (np.sqrt(5.0) - 1.0) / 2.0


def mathieu_base(alpha: float = GOLDEN_ALPHA) -> Rotation:
    return Rotation(alpha)


def standard_base(lam: float) -> StandardMap:
    return StandardMap(MapSpec(E=2, lam=lam, form=Form.TWIST))


# ---------------------------------------------------------------------------
# Spectral measure Fourier coefficients and the Wiener criterion
# ---------------------------------------------------------------------------

def spectral_fourier(v: np.ndarray, k_max: int, site: Optional[int] = None) -> np.ndarray:
    """mu_hat_k = <delta, e^{-i k L} delta> for the truncated tau + tau* + v.

    Full diagonalization of the (selfadjoint, real-potential) truncation;
    the seed site defaults to the center to keep the light cone inside
    the box.  k_max beyond roughly N/2 suffers truncation leakage.
    """
    v = np.asarray(v, dtype=float)
    N = len(v)
    if N > 600:
        raise ValueError("truncation capped at 600")
    if site is None:
        site = N // 2
    try:
        E, U = scipy.linalg.eigh_tridiagonal(v, np.ones(N - 1))
    except Exception as e:
        raise EigFail(str(e))
    w = U[site, :] ** 2
    phase = np.exp(-1j * E)
    cur = np.full(N, 1.0 + 0.0j)
    out = np.empty(k_max + 1, dtype=complex)
    out[0] = np.sum(w)
    for k in range(1, k_max + 1):
        cur *= phase
        out[k] = np.dot(w, cur)
    return out


@dataclass(frozen=True)
class WienerReport:
    lam: float
    n_max: int
    s_n: np.ndarray          # Cesaro means, index n-1
    truncation: int

    @property
    def point_mass_estimate(self) -> float:
        return float(self.s_n[-1])


def wiener_sequence(mu_hat: np.ndarray) -> np.ndarray:
    """Cesaro means s_n = n^{-1} sum_{k<=n} |mu_hat_k|^2 (k starting at 1)."""
    sq = np.abs(mu_hat[1:]) ** 2
    return np.cumsum(sq) / np.arange(1, len(sq) + 1)


def wiener_test(base, lam: float, n_max: int, N: int,
                seeds: Sequence[Tuple[float, float]],
                vfun: Optional[Callable] = None) -> WienerReport:
    """Wiener point-spectrum detector s_{n_max}, averaged over seed orbits."""
    if vfun is None:
        vfun = lambda xs: lam * np.cos(xs)
    acc = None
    for (x0, y0) in seeds:
        xs = base.orbit_x(np.asarray(x0), np.asarray(y0), N)
        mu = spectral_fourier(np.asarray(vfun(xs)), n_max)
        s = wiener_sequence(mu)
        acc = s if acc is None else acc + s
    return WienerReport(lam=lam, n_max=n_max, s_n=acc / len(seeds), truncation=N)


def wiener_pure_point_closed_form(E: np.ndarray, w: np.ndarray, n: int) -> float:
    """Exact s_n for the diagonal (pure point) surrogate with levels E, weights w.

    s_n = sum_{j,l} w_j w_l (1/n) sum_{k<=n} e^{-i k (E_j - E_l)}, the
    finite geometric double sum.
    """
    diff = E[:, None] - E[None, :]
    z = np.exp(-1j * diff)
    # sum_{k=1..n} z^k = z (1 - z^n) / (1 - z), with the diagonal giving n
    num = z * (1.0 - z ** n)
    den = 1.0 - z
    mask = np.abs(den) < 1e-14
    geo = np.where(mask, n, np.divide(num, np.where(mask, 1.0, den)))
    val = np.real(w @ geo @ w) / n
    return float(val)


# ---------------------------------------------------------------------------
# Aubry duality gap
# ---------------------------------------------------------------------------

def aubry_gap(base_builder: Callable[[float], object], lam: float,
              g: int = 24, n: int = 30000) -> float:
    """mu(lam) - log(lam/2) - mu(4/lam) with grid-averaged exponents.

    Both exponents are E = 0, w = 1 spectral-cocycle exponents over the
    base at the respective coupling, at matched grid resolution.
    """
    if lam <= 2:
        raise ValueError("need lam > 2 so that the dual coupling is subcritical")

    def mu(l):
        cfg = Cocycle2(E=0.0, lam=l, base=base_builder(l), kind="spectral")
        return grid_lyapunov(cfg, g, n).mean

    return float(mu(lam) - np.log(lam / 2.0) - mu(4.0 / lam))


# ---------------------------------------------------------------------------
# Diffusion of the Hamiltonian form
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiffusionReport:
    ns: np.ndarray
    var_s: np.ndarray
    autocorr: np.ndarray
    beta: float
    beta_band: Tuple[float, float]
    reconstruction_error: float


def diffusion(lam: float, ensemble: int, n_max: int, rng,
              fit_lower_frac: float = 0.5) -> DiffusionReport:
    """Momentum diffusion of the Hamiltonian-form map.

    Var[S_n] for S_n = y_n - y_0 over a uniform ensemble; beta is the
    log-log slope fit on the upper part of the n range.  The identity
    Var[S_n] = n Var[X] + 2 sum_{j<n} (n-j) Cov(X_0, X_j) is checked by
    reconstruction from the empirical autocorrelations.
    """
    if ensemble < 1000:
        raise ValueError("ensemble must be >= 10^3")
    spec = MapSpec(E=2, lam=lam, form=Form.HAMILTONIAN)
    m = StandardMap(spec)
    x = rng.uniform(0.0, TWO_PI, size=ensemble)
    y = rng.uniform(0.0, TWO_PI, size=ensemble)
    X = np.empty((n_max, ensemble))
    for j in range(n_max):
        kick = lam * np.sin(x)
        X[j] = kick
        y_new = y + kick
        x = wrap(x + y_new)
        y = y_new
    S = np.cumsum(X, axis=0)
    var_s = np.var(S, axis=1)
    ns = np.arange(1, n_max + 1)

    if np.allclose(var_s, 0.0):
        beta = 0.0
        band = (0.0, 0.0)
    else:
        lo = int(n_max * fit_lower_frac)
        L = np.log(ns[lo:])
        V = np.log(np.maximum(var_s[lo:], 1e-300))
        A = np.vstack([L, np.ones_like(L)]).T
        coef, res, *_ = np.linalg.lstsq(A, V, rcond=None)
        beta = float(coef[0])
        sigma = float(np.sqrt(np.maximum(res[0] if len(res) else 0.0, 0.0)
                              / max(len(L) - 2, 1)))
        sxx = float(np.sum((L - L.mean()) ** 2))
        se = sigma / np.sqrt(sxx) if sxx > 0 else 0.0
        band = (beta - 2 * se, beta + 2 * se)

    # autocorrelations of the kick sequence (stationarity in j)
    Xc = X - X.mean()
    k_max = min(n_max - 1, 200)
    auto = np.empty(k_max + 1)
    for k in range(k_max + 1):
        auto[k] = float(np.mean(Xc[: n_max - k] * Xc[k:]))
    n_chk = min(n_max, k_max + 1)
    recon = n_chk * auto[0] + 2.0 * np.sum((n_chk - np.arange(1, n_chk)) * auto[1:n_chk])
    direct = var_s[n_chk - 1]
    rec_err = abs(recon - direct) / max(abs(direct), 1e-300) if direct != 0 else abs(recon)
    return DiffusionReport(ns=ns, var_s=var_s, autocorr=auto, beta=beta,
                           beta_band=band, reconstruction_error=float(rec_err))


def diffusion_iid_surrogate(lam: float, ensemble: int, n_max: int, rng) -> float:
    """beta of the shuffled-kick control (expected 1, the random-walk exponent)."""
    spec = MapSpec(E=2, lam=lam, form=Form.HAMILTONIAN)
    m = StandardMap(spec)
    x = rng.uniform(0.0, TWO_PI, size=ensemble)
    y = rng.uniform(0.0, TWO_PI, size=ensemble)
    X = np.empty((n_max, ensemble))
    for j in range(n_max):
        kick = lam * np.sin(x)
        X[j] = kick
        y_new = y + kick
        x = wrap(x + y_new)
        y = y_new
    # shuffle across the whole pool: per-trajectory shuffles keep each total
    # fixed and depress Var[S_n] near n_max (sampling without replacement)
    X = rng.permutation(X.ravel()).reshape(X.shape)
    var_s = np.var(np.cumsum(X, axis=0), axis=1)
    ns = np.arange(1, n_max + 1)
    lo = n_max // 2
    L = np.log(ns[lo:])
    V = np.log(np.maximum(var_s[lo:], 1e-300))
    A = np.vstack([L, np.ones_like(L)]).T
    coef, *_ = np.linalg.lstsq(A, V, rcond=None)
    return float(coef[0])


# ---------------------------------------------------------------------------
# Lyapunov exponent distribution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExponentCdf:
    values: np.ndarray       # sorted pointwise exponents
    normalized: np.ndarray   # sorted standardized exponents
    atom_at_zero: float

    def cdf(self, t):
        return np.searchsorted(self.values, t, side="right") / len(self.values)


def lyapunov_cdf(lam: float, g: int, n: int, atom_half_width: float = 0.005) -> ExponentCdf:
    """Empirical CDF of pointwise Jacobian exponents with the zero-atom estimate."""
    if g < 30:
        raise ValueError("grid must be at least 30x30")
    cfg = Cocycle2(E=2.0, lam=lam, base=standard_base(lam), kind="jacobian")
    ga = grid_lyapunov(cfg, g, n)
    vals = ga.values
    mu, sd = float(np.mean(vals)), float(np.std(vals))
    normed = np.sort((vals - mu) / (sd if sd > 0 else 1.0))
    return ExponentCdf(values=vals, normalized=normed,
                       atom_at_zero=float(np.mean(np.abs(vals) < atom_half_width)))
