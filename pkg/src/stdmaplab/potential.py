"""Empirical measures, logarithmic potentials, Thouless residuals and determinants.

The Riesz measure of a Lyapunov exponent is always represented
empirically here (truncation eigenvalues, or Floquet roots in the
w-parameterized case); total masses follow the normalized-trace
convention (mass 1 for densities of states, mass 2 for the w-plane
measure of the A cocycle's band part).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, Tuple

import numpy as np

from .errors import SupportViolation
from .jacobi import truncated_eigenvalues

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Weighted point masses in the complex plane."""
    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.atoms, dtype=complex).ravel()
        w = np.asarray(self.weights, dtype=float).ravel()
        if a.shape != w.shape:
            raise ValueError("atoms and weights must align")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        object.__setattr__(self, "atoms", a)
        object.__setattr__(self, "weights", w)

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))

    def normalized(self) -> "EmpiricalMeasure":
        return EmpiricalMeasure(self.atoms, self.weights / self.total_mass)

    def support_distance(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return np.min(np.abs(z[:, None] - self.atoms[None, :]), axis=1)


def potential(dk: EmpiricalMeasure, z) -> np.ndarray:
    """Logarithmic potential sum w_i log|z - z_i| (vectorized over z).

    Returns -inf at atoms of the measure.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.empty(len(z))
    block = max(1, int(2e6 // max(len(dk.atoms), 1)))
    for i in range(0, len(z), block):
        d = np.abs(z[i:i + block, None] - dk.atoms[None, :])
        with np.errstate(divide="ignore"):
            out[i:i + block] = np.log(d) @ dk.weights
    return out


def potential_scalar(dk: EmpiricalMeasure, z: complex) -> float:
    return float(potential(dk, z)[0])


# ---------------------------------------------------------------------------
# Densities of states from truncations
# ---------------------------------------------------------------------------

def dos_from_streams(streams: Iterable[np.ndarray]) -> EmpiricalMeasure:
    """Pooled truncation DOS of scalar Jacobi operators tau + tau* + v.

    Equal-weight atoms at all truncation eigenvalues, total mass 1.
    """
    pools = [truncated_eigenvalues(v) for v in streams]
    atoms = np.concatenate(pools)
    return EmpiricalMeasure(atoms, np.full(atoms.shape, 1.0 / atoms.size))


def dos_from_matrices(mats: Iterable[np.ndarray]) -> EmpiricalMeasure:
    """Pooled DOS from dense truncations (strip / five-diagonal operators)."""
    pools = [np.linalg.eigvals(M) for M in mats]
    atoms = np.concatenate(pools)
    return EmpiricalMeasure(atoms, np.full(atoms.shape, 1.0 / atoms.size))


def potential_streams(base, vfun: Callable, seeds: Sequence[Tuple[float, float]],
                      N: int) -> list:
    """Potential samples v(x_k) along base orbits, one stream per seed."""
    out = []
    for (x0, y0) in seeds:
        xs = base.orbit_x(np.asarray(x0), np.asarray(y0), N)
        out.append(np.asarray(vfun(xs)))
    return out


# ---------------------------------------------------------------------------
# Thouless residuals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThoulessReport:
    grid: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray

    @property
    def residuals(self) -> np.ndarray:
        return np.abs(self.lhs - self.rhs)

    @property
    def sup_residual(self) -> float:
        return float(np.max(self.residuals))


def thouless_residual(base, lam: float, E_grid: Sequence[complex], N: int, m: int,
                      n_steps: int = 10000, seeds=None, rng=None,
                      buffer: float = 0.1, kick=None) -> ThoulessReport:
    """Scalar Thouless check: cocycle exponent vs potential of the truncation DOS.

    E-grid points closer than `buffer` to the empirical support are
    rejected (the on-spectrum limit is a Craig-Simon statement, not a
    clean numerical comparison).
    """
    from .cocycle import Cocycle2, grid_seeds, lyapunov_orbit
    from .dynamics import SIN, TorusPoint

    kick = SIN if kick is None else kick
    if seeds is None:
        g = int(np.ceil(np.sqrt(m)))
        X, Y = grid_seeds(g)
        seeds = list(zip(X.ravel()[:m], Y.ravel()[:m]))
    vfun = lambda xs: lam * np.cos(xs)
    dk = dos_from_streams(potential_streams(base, vfun, seeds, N))
    E_grid = np.asarray(E_grid, dtype=complex)
    if np.any(dk.support_distance(E_grid) < buffer):
        raise SupportViolation("E grid intersects the numerical support buffer")
    lhs = np.empty(len(E_grid))
    for i, E in enumerate(E_grid):
        vals = []
        for (x0, y0) in seeds[:min(len(seeds), 8)]:
            cfg = Cocycle2(E=E, lam=lam, f=kick, base=base, kind="spectral")
            vals.append(lyapunov_orbit(cfg, TorusPoint(x0, y0), n_steps).value)
        lhs[i] = float(np.mean(vals))
    rhs = potential(dk, E_grid)
    return ThoulessReport(grid=E_grid, lhs=lhs, rhs=np.asarray(rhs))


def thouless_w_residual(base, lam: float, w_grid: Sequence[complex],
                        seeds: Sequence[Tuple[float, float]],
                        n_theta: int = 128, offsets: int = 16) -> ThoulessReport:
    """w-form residual over a periodic base: mu(B(w)) vs log-potential + log(lam/2).

    lhs is exact for periodic bases (spectral radius of the monodromy,
    cell-averaged); rhs uses the Floquet-root atoms of the w-plane
    density of states (total mass 2).
    """
    from .cocycle import Cocycle2
    from .jacobi import w_dos_atoms
    from .lax import periodic_lyapunov

    locs, wts = w_dos_atoms(base, lam, seeds, n_theta=n_theta)
    dk = EmpiricalMeasure(locs, wts)
    cfg = Cocycle2(E=0.0, lam=lam, kind="spectral")
    w_grid = np.asarray(w_grid, dtype=complex)
    lhs = np.empty(len(w_grid))
    for i, w in enumerate(w_grid):
        mu_a = periodic_lyapunov(base, cfg, offsets=offsets, w=w)
        lhs[i] = mu_a + np.log(abs(w))
    rhs = potential(dk, w_grid) + np.log(lam / 2.0)
    return ThoulessReport(grid=w_grid, lhs=lhs, rhs=np.asarray(rhs))


def strip_thouless_residual(P_builder: Callable, seeds: Sequence[Tuple],
                            E_grid: Sequence[complex], N: int,
                            n_blocks: int = 3000) -> ThoulessReport:
    """Strip Thouless check for product operators.

    lhs: mean of the two largest exponents of the 4x4 transfer cocycle
    (QR-diagonal method), averaged over seeds.  rhs: potential of the
    pooled Dirichlet-truncation DOS of the assembled five-diagonal
    operator (normalized trace, mass 1).
    """
    from .jacobi import top_two_exponent, transfer_cocycle_4

    mats = []
    ops = []
    for s in seeds:
        P = P_builder(s)
        ops.append(P.banded(N))
        mats.append(P)
    dk = dos_from_matrices(ops)
    E_grid = np.asarray(E_grid, dtype=complex)
    lhs = np.empty(len(E_grid))
    for i, E in enumerate(E_grid):
        vals = []
        for P in mats:
            A = transfer_cocycle_4(P, E, n_blocks)
            vals.append(top_two_exponent(A))
        lhs[i] = float(np.mean(vals))
    rhs = potential(dk, E_grid)
    return ThoulessReport(grid=E_grid, lhs=lhs, rhs=np.asarray(rhs))


# ---------------------------------------------------------------------------
# Fuglede-Kadison determinants
# ---------------------------------------------------------------------------

def fk_determinant(dk: EmpiricalMeasure) -> float:
    """log det = integral of log|E| against the density of states.

    Returns -inf when an atom sits exactly at the origin (the analytic
    extension of the determinant to singular operators).
    """
    with np.errstate(divide="ignore"):
        vals = np.log(np.abs(dk.atoms))
    if np.any(np.isneginf(vals)):
        return float("-inf")
    return float(np.dot(vals, dk.weights))


def product_formula_residual(V1: np.ndarray, V2: np.ndarray, N: int) -> dict:
    """|logdet(L1 L2) - logdet L1 - logdet L2| with pooled truncation DOS.

    L_i = tau + tau* + V_i; the product uses the assembled five-diagonal
    Dirichlet truncation (not the product of truncated matrices, which
    would make the identity hold trivially).
    """
    from .jacobi import ProductOperator

    margin = len(V1) - N
    if margin < 2:
        raise ValueError("need potential streams longer than N + 2")
    d1 = fk_determinant(dos_from_streams([V1[:N]]))
    d2 = fk_determinant(dos_from_streams([V2[:N]]))
    P = ProductOperator(V1, V2)
    d12 = fk_determinant(dos_from_matrices([P.banded(N)]))
    return {"logdet_L1": d1, "logdet_L2": d2, "logdet_product": d12,
            "residual": abs(d12 - d1 - d2)}


# ---------------------------------------------------------------------------
# Regularity / potential-theoretic diagnostics
# ---------------------------------------------------------------------------

def log_holder_profile(dk: EmpiricalMeasure, radii: Sequence[float],
                       centers: Optional[np.ndarray] = None) -> dict:
    """max over centers of dk(B) * log(1/diam B) per radius, plus a fitted constant.

    A log-Hoelder continuous measure keeps the profile bounded; a point
    mass makes it diverge as the radius shrinks (the detector's sanity
    case).
    """
    radii = np.asarray(radii, dtype=float)
    if np.any(radii >= 1.0):
        raise ValueError("radii must be < 1")
    if centers is None:
        centers = dk.atoms
    prof = np.empty(len(radii))
    for i, r in enumerate(radii):
        d = np.abs(centers[:, None] - dk.atoms[None, :])
        mass = (d <= r) @ dk.weights
        prof[i] = float(np.max(mass) * np.log(1.0 / (2.0 * r)))
    return {"radii": radii, "profile": prof, "C_hat": float(np.max(prof))}


def capacity_energy(dk: EmpiricalMeasure) -> dict:
    """Discrete logarithmic energy I and capacity e^{-I} of a probability measure.

    Self-energy excluded via the off-diagonal double sum.
    """
    if len(dk.atoms) < 2:
        raise ValueError("need at least two atoms")
    nu = dk.normalized()
    z, w = nu.atoms, nu.weights
    total = 0.0
    block = max(1, int(4e6 // len(z)))
    for i in range(0, len(z), block):
        d = np.abs(z[i:i + block, None] - z[None, :])
        np.fill_diagonal(d[:, i:i + d.shape[0]], 1.0)  # mask self-pairs
        with np.errstate(divide="ignore"):
            logs = np.log(d)
        logs[~np.isfinite(logs)] = 0.0  # coincident atoms excluded like self-pairs
        total += float(w[i:i + block] @ logs @ w)
    I = -total
    return {"energy": I, "capacity": float(np.exp(-I))}


def circle_projection_compare(dk: EmpiricalMeasure, r: float,
                              n_grid: int = 256) -> dict:
    """Potential deficit of projecting dk radially onto the unit circle.

    Requires supp dk inside the annulus (r, 1/r).  Returns the max over
    a unit-circle grid of potential(proj dk) - potential(dk) together
    with the directly computed per-atom worst distortion bound d_hat.
    """
    if not (0 < r < 1):
        raise ValueError("need 0 < r < 1")
    mod = np.abs(dk.atoms)
    if np.any((mod <= r) | (mod >= 1.0 / r)):
        raise SupportViolation("support not inside the annulus (r, 1/r)")
    # the golden offset keeps grid points off projected atoms
    zs = np.exp(1j * (np.arange(n_grid) + 0.2360679) / n_grid * TWO_PI)
    proj = EmpiricalMeasure(dk.atoms / mod, dk.weights)
    pp = potential(proj, zs)
    pa = potential(dk, zs)
    good = np.isfinite(pp) & np.isfinite(pa)
    deficit = pp[good] - pa[good]
    # worst single-atom distortion over the same grid
    d_atom = np.abs(zs[good][:, None] - dk.atoms[None, :])
    d_proj = np.abs(zs[good][:, None] - (dk.atoms / mod)[None, :])
    keep = d_proj > 1e-12
    d_hat = float(np.max(np.where(keep, np.log(np.where(keep, d_proj, 1.0))
                                  - np.log(d_atom), -np.inf)))
    return {"max_deficit": float(np.max(deficit)), "d_hat": d_hat, "r": r}
