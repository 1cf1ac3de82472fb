"""Periodic (non-selfadjoint) Jacobi matrices, Bloch varieties and truncations.

Conventions.  A period-p scalar Jacobi operator acts by
(Lu)_n = a_n u_{n+1} + c_{n-1} u_{n-1} + b_n u_n.  Its Floquet matrix
L_per(w) carries w a_p in the lower-left and w^{-1} c_p in the upper-right
corner (quasiperiodic boundary u_{n+p} = w u_n).  The characteristic
polynomial is monic in z:

    Delta(z, w) = det(z I - L_per(w)) = Delta(z) - a w - c w^{-1} - b,

with a = prod a_j, c = prod c_j, b = -a - c.  The operator spectrum is
{z : Delta(z) in ellipse a e^{i p t} + b + c e^{-i p t}}, at most p
closed curves; the density of states is the push-forward of dt/2pi
under the root map.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from .errors import EigFail, RootFindFail

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PeriodicJacobi:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        for name in ("a", "b", "c"):
            v = np.asarray(getattr(self, name), dtype=complex)
            if v.ndim != 1 or not np.all(np.isfinite(v)):
                raise ValueError(f"{name} must be a finite vector")
            object.__setattr__(self, name, v)
        if not (len(self.a) == len(self.b) == len(self.c)) or len(self.a) < 1:
            raise ValueError("a, b, c must share a length p >= 1")

    @property
    def p(self) -> int:
        return len(self.b)

    def l_per(self, w: complex) -> np.ndarray:
        """Floquet matrix L_per(w); L_per(1) is the plain periodic block."""
        p = self.p
        M = np.zeros((p, p), dtype=complex)
        M[np.arange(p), np.arange(p)] = self.b
        if p > 1:
            M[np.arange(p - 1), np.arange(1, p)] = self.a[:-1]
            M[np.arange(1, p), np.arange(p - 1)] = self.c[:-1]
        M[p - 1, 0] += w * self.a[-1]
        M[0, p - 1] += self.c[-1] / w
        return M


def char_poly(Mat: np.ndarray) -> np.ndarray:
    """Monic characteristic polynomial det(zI - M) by Faddeev-LeVerrier."""
    n = Mat.shape[0]
    coeffs = np.empty(n + 1, dtype=complex)
    coeffs[0] = 1.0
    Mk = np.array(Mat, dtype=complex)
    ck = -np.trace(Mk)
    coeffs[1] = ck
    for k in range(2, n + 1):
        Mk = Mat @ (Mk + ck * np.eye(n))
        ck = -np.trace(Mk) / k
        coeffs[k] = ck
    return coeffs


@dataclass(frozen=True)
class DeltaStructure:
    """Delta(z) coefficients plus the corner products a, c and b = -a - c."""
    delta_coeffs: np.ndarray
    a: complex
    c: complex
    b: complex

    def delta_z(self, z):
        return np.polyval(self.delta_coeffs, z)

    def delta_zw(self, z, w):
        return self.delta_z(z) - self.a * w - self.c / w - self.b

    def ellipse(self, t):
        """lambda(t) = a e^{ipt} + b + c e^{-ipt}, p = degree."""
        p = len(self.delta_coeffs) - 1
        t = np.asarray(t)
        return self.a * np.exp(1j * p * t) + self.b + self.c * np.exp(-1j * p * t)


def delta_structure(J: PeriodicJacobi) -> DeltaStructure:
    a = complex(np.prod(J.a))
    c = complex(np.prod(J.c))
    return DeltaStructure(delta_coeffs=char_poly(J.l_per(1.0)), a=a, c=c, b=-a - c)


def verify_delta_identity(J: PeriodicJacobi, rng, n_random: int = 20) -> float:
    """Max relative error of Delta(z,w) = Delta(z) - aw - c/w - b vs dense determinants."""
    ds = delta_structure(J)
    worst = 0.0
    for _ in range(n_random):
        z = complex(rng.normal(), rng.normal()) * 2.0
        w = complex(rng.normal(), rng.normal())
        if abs(w) < 0.1:
            w = w + 0.5
        direct = np.linalg.det(z * np.eye(J.p) - J.l_per(w))
        structural = ds.delta_zw(z, w)
        scale = max(abs(direct), abs(structural), 1e-30)
        worst = max(worst, abs(direct - structural) / scale)
    return worst


@dataclass(frozen=True)
class SpectrumCurves:
    theta: np.ndarray
    curves: np.ndarray       # (m, p) complex, column = continued curve
    near_collisions: int

    def dos_atoms(self) -> Tuple[np.ndarray, np.ndarray]:
        pts = self.curves.ravel()
        return pts, np.full(pts.shape, 1.0 / pts.size)


def spectrum_curves(J: PeriodicJacobi, m: int = 256, collision_tol: float = 1e-8) -> SpectrumCurves:
    """Spectrum samples: roots of Delta(z) = lambda(theta) per theta.

    Companion-matrix root finding; curves are continued by
    nearest-neighbor matching between adjacent theta samples, with
    near-collisions counted (curves of Jacobi matrices do not cross
    transversely, so ambiguity there is logged, not resolved).
    """
    if m < 64:
        raise ValueError("need at least 64 theta samples")
    ds = delta_structure(J)
    theta = np.arange(m) / m * TWO_PI
    lam = ds.ellipse(theta)
    p = J.p
    curves = np.empty((m, p), dtype=complex)
    near = 0
    prev = None
    for i, s in enumerate(lam):
        coeffs = ds.delta_coeffs.copy()
        coeffs[-1] -= s
        try:
            roots = np.roots(coeffs)
        except np.linalg.LinAlgError as e:  # pragma: no cover
            raise RootFindFail(str(e))
        if prev is None:
            roots = roots[np.lexsort((roots.imag, roots.real))]
        else:
            # nearest-neighbour continuation against previous column order
            D = np.abs(prev[:, None] - roots[None, :])
            order = _greedy_match(D)
            roots = roots[order]
            if p > 1:
                dmin = np.min(np.abs(roots[:, None] - roots[None, :])
                              + np.diag(np.full(p, np.inf)))
                if dmin < collision_tol:
                    near += 1
        curves[i] = roots
        prev = roots
    return SpectrumCurves(theta=theta, curves=curves, near_collisions=near)


def _greedy_match(D: np.ndarray) -> np.ndarray:
    """Columns permutation matching rows to nearest columns, greedily by distance."""
    n = D.shape[0]
    order = np.full(n, -1)
    used = np.zeros(n, dtype=bool)
    pairs = sorted(((D[i, j], i, j) for i in range(n) for j in range(n)))
    filled = 0
    for _, i, j in pairs:
        if order[i] < 0 and not used[j]:
            order[i] = j
            used[j] = True
            filled += 1
            if filled == n:
                break
    return order


# ---------------------------------------------------------------------------
# Matrix-valued (strip) operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BlockJacobi:
    """Period-k Jacobi operator with N x N matrix entries on l^2(Z, C^N)."""
    a: np.ndarray  # (k, N, N)
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        for name in ("a", "b", "c"):
            v = np.asarray(getattr(self, name), dtype=complex)
            if v.ndim != 3 or v.shape[1] != v.shape[2]:
                raise ValueError(f"{name} must be (k, N, N)")
            object.__setattr__(self, name, v)

    @property
    def k(self) -> int:
        return self.a.shape[0]

    @property
    def N(self) -> int:
        return self.a.shape[1]

    def l_per(self, w: complex) -> np.ndarray:
        k, N = self.k, self.N
        M = np.zeros((k * N, k * N), dtype=complex)
        for j in range(k):
            M[j * N:(j + 1) * N, j * N:(j + 1) * N] = self.b[j]
        for j in range(k - 1):
            M[j * N:(j + 1) * N, (j + 1) * N:(j + 2) * N] += self.a[j]
            M[(j + 1) * N:(j + 2) * N, j * N:(j + 1) * N] += self.c[j]
        M[(k - 1) * N:, :N] += w * self.a[-1]
        M[:N, (k - 1) * N:] += self.c[-1] / w
        return M


def strip_spectrum(B: BlockJacobi, ws: Sequence[complex]) -> np.ndarray:
    """Point cloud: eigenvalues of L_per(w) per sampled w, shape (len(ws), kN)."""
    out = np.empty((len(ws), B.k * B.N), dtype=complex)
    for i, w in enumerate(ws):
        try:
            out[i] = np.linalg.eigvals(B.l_per(w))
        except np.linalg.LinAlgError as e:
            raise RootFindFail(str(e))
    return out


# ---------------------------------------------------------------------------
# Product operators L = L1 L2 of scalar Jacobi factors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProductOperator:
    """Product of two discrete Schroedinger factors tau + tau* + V^(i).

    The assembled five-diagonal row is
      (Lu)_m = u_{m+2} + a_m u_{m+1} + b_m u_m + c_{m-1} u_{m-1} + u_{m-2},
    with stream conventions (fixed by the row-assembly identity)
      a_m = V1_m + V2_{m+1},  b_m = V1_m V2_m + 2,  c_m = V1_{m+1} + V2_m.
    """
    V1: np.ndarray
    V2: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "V1", np.asarray(self.V1, dtype=complex))
        object.__setattr__(self, "V2", np.asarray(self.V2, dtype=complex))
        if self.V1.shape != self.V2.shape or self.V1.ndim != 1:
            raise ValueError("V1, V2 must be 1d of equal length")

    @property
    def n_sites(self) -> int:
        return len(self.V1) - 1  # a_m, c_m need V at m+1

    def streams(self):
        V1, V2 = self.V1, self.V2
        a = V1[:-1] + V2[1:]
        b = V1 * V2 + 2.0
        c = V1[1:] + V2[:-1]
        return a, b[:-1], c

    def banded(self, N: int) -> np.ndarray:
        """Dirichlet truncation of the assembled operator on sites 0..N-1."""
        a, b, c = self.streams()
        if N > len(b):
            raise ValueError("not enough potential samples for this truncation")
        M = np.zeros((N, N), dtype=complex)
        idx = np.arange(N)
        M[idx, idx] = b[:N]
        M[idx[:-1], idx[:-1] + 1] = a[:N - 1]
        M[idx[1:], idx[1:] - 1] = c[:N - 1]
        if N > 2:
            M[idx[:-2], idx[:-2] + 2] = 1.0
            M[idx[2:], idx[2:] - 2] = 1.0
        return M

    def apply_composition(self, u: np.ndarray) -> np.ndarray:
        """(L1 (L2 u)) on the interior (Dirichlet outside), the assembly oracle."""
        def jac(v, V):
            out = np.zeros(len(v), dtype=complex)
            out[1:] += v[:-1]
            out[:-1] += v[1:]
            out += V[:len(v)] * v
            return out
        return jac(jac(np.asarray(u, dtype=complex), self.V2), self.V1)

    def block_entries(self, nt: int):
        """(b~, a~, c~) at block index nt (sites n-1, n with n = 2 nt)."""
        a, b, c = self.streams()
        n = 2 * nt
        bt = np.array([[b[n - 1], a[n - 1]], [c[n - 1], b[n]]], dtype=complex)
        at = np.array([[1.0, 0.0], [a[n], 1.0]], dtype=complex)
        ct = np.array([[1.0, c[n]], [0.0, 1.0]], dtype=complex)
        return bt, at, ct


def product_block_jacobi(P: ProductOperator, k: int, start_block: int = 1) -> BlockJacobi:
    """BlockJacobi view of the product operator over k consecutive blocks."""
    bs, as_, cs = [], [], []
    for nt in range(start_block, start_block + k):
        bt, at, ct = P.block_entries(nt)
        bs.append(bt)
        as_.append(at)
        cs.append(ct)
    return BlockJacobi(a=np.array(as_), b=np.array(bs), c=np.array(cs))


def transfer_cocycle_4(P: ProductOperator, E: complex, n_blocks: int,
                       start_block: int = 2) -> np.ndarray:
    """4x4 one-step transfer matrices of the product operator at energy E.

    The block at index nt (n = 2 nt) propagates the state
    (u_{n-1}, a_{n-2} u_{n-1} + u_n, u_{n-3}, u_{n-2}) to the same state
    two sites up, for any solution of the five-diagonal eigen equation.
    """
    a, b, c = P.streams()
    if 2 * (start_block + n_blocks - 1) > len(b) - 1:
        raise ValueError("potential streams too short for the requested block count")
    out = np.empty((n_blocks, 4, 4), dtype=complex)
    for i in range(n_blocks):
        n = 2 * (start_block + i)
        A = np.zeros((4, 4), dtype=complex)
        A[0, 0] = E - b[n - 1] + a[n - 1] * a[n - 2]
        A[0, 1] = -a[n - 1]
        A[0, 2] = -1.0
        A[0, 3] = -c[n - 2]
        A[1, 0] = a[n - 2] * (b[n] - E) - c[n - 1]
        A[1, 1] = E - b[n]
        A[1, 3] = -1.0
        A[2, 0] = 1.0
        A[3, 0] = -a[n - 2]
        A[3, 1] = 1.0
        out[i] = A
    return out


def strip_state(P: ProductOperator, u: np.ndarray, nt: int) -> np.ndarray:
    """The 4-vector state at block nt for a scalar sequence u (index = site)."""
    a, _, _ = P.streams()
    n = 2 * nt
    return np.array([u[n - 1], a[n - 2] * u[n - 1] + u[n], u[n - 3], u[n - 2]],
                    dtype=complex)


def top_two_exponent(mats: np.ndarray) -> float:
    """Arithmetic mean of the two largest Lyapunov exponents of a 4x4 matrix stream.

    QR-diagonal method: accumulate log |R_11 R_22| of the reduced QR of
    the propagated 4x2 frame, per step, and divide by 2n.
    """
    n = len(mats)
    Q = np.eye(4, 2, dtype=complex)
    acc = 0.0
    for A in mats:
        Q = A @ Q
        Q, R = np.linalg.qr(Q)
        diag = np.abs(np.diagonal(R))
        if np.any(diag == 0) or not np.all(np.isfinite(diag)):
            raise EigFail("QR frame degenerated")
        acc += float(np.sum(np.log(diag)))
    return acc / (2.0 * n)


# ---------------------------------------------------------------------------
# Truncations
# ---------------------------------------------------------------------------

def tridiagonal_truncation(v: np.ndarray) -> np.ndarray:
    """Dense Dirichlet truncation of tau + tau* + v."""
    N = len(v)
    M = np.zeros((N, N), dtype=complex)
    idx = np.arange(N)
    M[idx, idx] = v
    M[idx[:-1], idx[:-1] + 1] = 1.0
    M[idx[1:], idx[1:] - 1] = 1.0
    return M


def truncated_eigenvalues(v: np.ndarray, selfadjoint: Optional[bool] = None) -> np.ndarray:
    """Eigenvalues of the Dirichlet truncation with potential v on the diagonal.

    Real potentials route to the symmetric tridiagonal solver; the
    general case goes to the dense nonsymmetric solver (balanced
    Hessenberg reduction + implicit-shift QR, via LAPACK).
    """
    v = np.asarray(v)
    if len(v) > 600:
        raise ValueError("truncation size capped at 600 (desk-scale eigensolver budget)")
    if selfadjoint is None:
        selfadjoint = not np.iscomplexobj(v) or np.allclose(v.imag, 0.0)
    try:
        if selfadjoint:
            return scipy.linalg.eigh_tridiagonal(np.real(v), np.ones(len(v) - 1),
                                                 eigvals_only=True).astype(complex)
        return np.linalg.eigvals(tridiagonal_truncation(v))
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as e:
        raise EigFail(f"truncation eigensolve failed: {e}")


# ---------------------------------------------------------------------------
# w-parameterized scans over periodic bases
# ---------------------------------------------------------------------------

def periodic_orbit_angles(base, x0: float, y0: float) -> np.ndarray:
    """x-angles of the (exactly periodic) orbit of (x0, y0) under the base map."""
    from .lax import AnnulusPermutation, CubeExchange

    if isinstance(base, CubeExchange):
        p = base.point_period(x0, y0)
    elif isinstance(base, AnnulusPermutation):
        p = len(base.cycle_of(int(base.annulus_of(x0))))
    else:
        raise TypeError("base must be a cube exchange or annulus permutation")
    xs = np.empty(p)
    x = np.asarray(x0, dtype=float)
    y = np.asarray(y0, dtype=float)
    for i in range(p):
        xs[i] = x
        x, y = base.apply(x, y)
    return xs


def trace_laurent(xs: np.ndarray, lam: float, E: complex = 0.0) -> np.ndarray:
    """Laurent coefficients (degrees -p..p) of w -> tr prod A(w; x_m).

    A(w; x) = [[E - lam(w^{-1} e^{ix} + w e^{-ix})/2, -1], [1, 0]]; each
    step is a convolution of the entry polynomials.
    """
    p = len(xs)

    def mul(f, g):
        if f is None or g is None:
            return None
        return np.convolve(f, g)

    def add(f, g, width):
        out = np.zeros(width, dtype=complex)
        if f is not None:
            off = (width - len(f)) // 2
            out[off:off + len(f)] += f
        if g is not None:
            off = (width - len(g)) // 2
            out[off:off + len(g)] += g
        return out

    # entries as centered coefficient arrays; width 2m+1 after m steps
    A11 = np.array([1.0 + 0.0j])
    A12 = np.array([0.0j])
    A21 = np.array([0.0j])
    A22 = np.array([1.0 + 0.0j])
    for m, x in enumerate(xs):
        t = np.array([-0.5 * lam * np.exp(1j * x), E, -0.5 * lam * np.exp(-1j * x)],
                     dtype=complex)  # degrees -1, 0, +1
        width = 2 * (m + 1) + 1
        n11 = add(mul(t, A11), -np.pad(A21, 1), width)
        n12 = add(mul(t, A12), -np.pad(A22, 1), width)
        n21 = add(np.pad(A11, 1), None, width)
        n22 = add(np.pad(A12, 1), None, width)
        A11, A12, A21, A22 = n11, n12, n21, n22
    return A11 + A22


def laurent_eval(coeffs: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Evaluate a centered Laurent coefficient array at w (vectorized).

    coeffs[k] is the coefficient of w^{k - p} with p = (len - 1)/2.
    """
    p = (len(coeffs) - 1) // 2
    w = np.asarray(w, dtype=complex)
    return np.polyval(coeffs[::-1], w) / w ** p


def floquet_radius(trace: np.ndarray) -> np.ndarray:
    """Spectral radius of a det-1 2x2 matrix from its (complex) trace."""
    t = np.asarray(trace, dtype=complex)
    disc = np.sqrt(t * t / 4.0 - 1.0)
    return np.maximum(np.abs(t / 2.0 + disc), np.abs(t / 2.0 - disc))


@dataclass(frozen=True)
class WSpectrumScan:
    wgrid_re: np.ndarray
    wgrid_im: np.ndarray
    indicator: np.ndarray
    band_count: int
    trace_coeffs: np.ndarray


def w_spectrum_scan(base, lam: float, grid: int = 300, extent: float = 2.0,
                    seed: Tuple[float, float] = (0.9, 2.1), E: complex = 0.0,
                    tol: float = 0.02) -> WSpectrumScan:
    """Indicator field of the w-spectrum {w : tr A^p_w in [-2, 2]} on a square grid.

    Practically: spectral radius of the Floquet matrix <= 1 + tol (the
    radius is exactly 1 on the spectrum since det = 1).  Band count is
    the number of connected components of the indicator.
    """
    from scipy import ndimage

    xs = periodic_orbit_angles(base, *seed)
    coeffs = trace_laurent(xs, lam, E=E)
    ax = np.linspace(-extent, extent, grid)
    WRe, WIm = np.meshgrid(ax, ax, indexing="ij")
    W = WRe + 1j * WIm
    W = np.where(np.abs(W) < 1e-9, 1e-9, W)
    tr = laurent_eval(coeffs, W.ravel()).reshape(W.shape)
    rho = floquet_radius(tr) ** (1.0 / len(xs))
    indicator = rho <= 1.0 + tol
    labels, count = ndimage.label(indicator)
    return WSpectrumScan(wgrid_re=WRe, wgrid_im=WIm, indicator=indicator,
                         band_count=int(count), trace_coeffs=coeffs)


def w_dos_atoms(base, lam: float, seeds: Sequence[Tuple[float, float]],
                n_theta: int = 64, E: complex = 0.0) -> Tuple[np.ndarray, np.ndarray]:
    """Atoms of the w-plane density of states of the periodic operator family.

    Per seed and Floquet angle theta, the roots of
    w^p (tr A^p_w - 2 cos theta) = 0; the full measure has total mass 2.
    """
    locs = []
    thetas = (np.arange(n_theta) + 0.5) / n_theta * TWO_PI
    for (x0, y0) in seeds:
        xs = periodic_orbit_angles(base, x0, y0)
        p = len(xs)
        coeffs = trace_laurent(xs, lam, E=E)
        for th in thetas:
            poly = coeffs.copy()
            poly[p] -= 2.0 * np.cos(th)
            try:
                r = np.roots(poly[::-1])
            except np.linalg.LinAlgError as e:
                raise RootFindFail(str(e))
            locs.append(r)
    locs = np.concatenate(locs)
    weights = np.full(locs.shape, 2.0 / locs.size)
    return locs, weights
