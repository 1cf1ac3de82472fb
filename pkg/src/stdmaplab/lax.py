"""Cube-exchange approximation of measure-preserving maps.

A cube exchange of resolution n permutes the n^2 square cells of side
2pi/n rigidly; every point is periodic with period equal to the cycle
length of its cell.  Approximants of a map T are built by matching each
cell to the target cell its image overlaps most (maximum-weight
assignment), then repaired to a single cycle by greedy 2-swaps between
geometrically adjacent cells.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .dynamics import BaseMap, TorusPoint, wrap
from .errors import DegenerateOverlap

TWO_PI = 2.0 * np.pi


def torus_dist(x1, y1, x2, y2):
    """Geodesic distance on the flat torus [0, 2pi)^2."""
    dx = np.abs(wrap(x1) - wrap(x2))
    dy = np.abs(wrap(y1) - wrap(y2))
    dx = np.minimum(dx, TWO_PI - dx)
    dy = np.minimum(dy, TWO_PI - dy)
    return np.hypot(dx, dy)


def _perm_cycles(perm: np.ndarray):
    seen = np.zeros(len(perm), dtype=bool)
    cycles = []
    for start in range(len(perm)):
        if seen[start]:
            continue
        cyc = [start]
        seen[start] = True
        j = perm[start]
        while j != start:
            cyc.append(j)
            seen[j] = True
            j = perm[j]
        cycles.append(cyc)
    return cycles


@dataclass(frozen=True)
class CubeExchange(BaseMap):
    """Rigid permutation of the n x n cell partition of the torus."""
    n: int
    perm: np.ndarray          # perm[i] = image cell of cell i; i = col*n + row
    cyclic: bool = False

    def __post_init__(self):
        p = np.asarray(self.perm, dtype=int)
        if sorted(p.tolist()) != list(range(self.n ** 2)):
            raise ValueError("perm must be a bijection of the cell indices")
        object.__setattr__(self, "perm", p)
        if self.cyclic and len(_perm_cycles(p)) != 1:
            raise ValueError("cyclic flag set but permutation is not a single cycle")

    # cell i has x-index i // n and y-index i % n
    def cell_of(self, x, y):
        h = TWO_PI / self.n
        ix = np.minimum((np.asarray(x) // h).astype(int), self.n - 1)
        iy = np.minimum((np.asarray(y) // h).astype(int), self.n - 1)
        return ix * self.n + iy

    def cell_center(self, i):
        h = TWO_PI / self.n
        i = np.asarray(i)
        return (i // self.n + 0.5) * h, (i % self.n + 0.5) * h

    def displacement(self, i):
        """Translation applied to cell i (image center minus center, lifted to [-pi, pi))."""
        cx, cy = self.cell_center(i)
        tx, ty = self.cell_center(self.perm[np.asarray(i)])
        dx = np.remainder(tx - cx + np.pi, TWO_PI) - np.pi
        dy = np.remainder(ty - cy + np.pi, TWO_PI) - np.pi
        return dx, dy

    def apply(self, x, y):
        i = self.cell_of(x, y)
        dx, dy = self.displacement(i)
        return wrap(np.asarray(x) + dx), wrap(np.asarray(y) + dy)

    def point_period(self, x, y) -> int:
        """Orbit period of any point in the cell containing (x, y)."""
        i = int(self.cell_of(x, y))
        j = self.perm[i]
        k = 1
        while j != i:
            j = self.perm[j]
            k += 1
        return k

    def to_json(self) -> dict:
        return {"n": self.n, "perm": self.perm.tolist(), "cyclic": bool(self.cyclic)}

    @classmethod
    def from_json(cls, d: dict) -> "CubeExchange":
        return cls(n=int(d["n"]), perm=np.asarray(d["perm"], dtype=int),
                   cyclic=bool(d["cyclic"]))


@dataclass(frozen=True)
class AnnulusPermutation(BaseMap):
    """Rigid exchange of the n vertical annuli: annulus j moves onto annulus pi(j).

    The action on a point with x in annulus j is x -> x + 2pi (pi(j) - j)/n.
    (The displacement form is what makes the map measure preserving for
    every permutation; a raw shift by 2pi pi(j)/n is not invertible in
    general.)
    """
    n: int
    pi: np.ndarray  # 0-based permutation of range(n)

    def __post_init__(self):
        p = np.asarray(self.pi, dtype=int)
        if sorted(p.tolist()) != list(range(self.n)):
            raise ValueError("pi must be a permutation of range(n)")
        object.__setattr__(self, "pi", p)

    def annulus_of(self, x):
        h = TWO_PI / self.n
        return np.minimum((np.asarray(x) // h).astype(int), self.n - 1)

    def apply(self, x, y):
        j = self.annulus_of(x)
        disp = (self.pi[j] - j) * (TWO_PI / self.n)
        return wrap(np.asarray(x) + disp), np.asarray(y, dtype=float) + 0.0

    def cycle_of(self, j: int):
        cyc = [j]
        k = self.pi[j]
        while k != j:
            cyc.append(k)
            k = self.pi[k]
        return cyc


def seed_with_period(ce: CubeExchange, want: int) -> Tuple[float, float]:
    """Center of a cell whose orbit period is closest to `want` (ties: smaller)."""
    cycles = _perm_cycles(ce.perm)
    best = min(cycles, key=lambda c: (abs(len(c) - want), len(c)))
    cx, cy = ce.cell_center(best[0])
    return float(cx), float(cy)


def rho_distance(T: BaseMap, S: BaseMap, samples: int = 4096) -> float:
    """sup-distance rho(T, S) estimated on a deterministic low-discrepancy sample.

    A lower bound on the true sup (it is a max over finitely many points).
    """
    if samples < 1000:
        raise ValueError("use at least 10^3 sample points")
    # 2d Kronecker (golden/silver) lattice
    i = np.arange(samples)
    x = wrap(TWO_PI * np.mod(i * 0.6180339887498949, 1.0))
    y = wrap(TWO_PI * np.mod(i * 0.4142135623730951, 1.0))
    tx, ty = T.apply(x, y)
    sx, sy = S.apply(x, y)
    return float(np.max(torus_dist(tx, ty, sx, sy)))


def _overlap_weights(T: BaseMap, n: int, sub: int = 4) -> np.ndarray:
    """w[i, j] = fraction of a sub x sub lattice in cell i landing in cell j under T.

    A distance tie-break far below the overlap quantum 1/sub^2 is
    subtracted so that cells with no overlap anywhere are assigned to
    cells near their center image instead of arbitrarily.
    """
    h = TWO_PI / n
    offs = (np.arange(sub) + 0.5) / sub * h
    W = np.zeros((n * n, n * n))
    cells = np.arange(n * n)
    cx = (cells // n) * h
    cy = (cells % n) * h
    for ox in offs:
        for oy in offs:
            x, y = T.apply(cx + ox, cy + oy)
            ix = np.minimum((x // h).astype(int), n - 1)
            iy = np.minimum((y // h).astype(int), n - 1)
            W[cells, ix * n + iy] += 1.0 / (sub * sub)
    tx, ty = T.apply(cx + h / 2.0, cy + h / 2.0)
    D = torus_dist(tx[:, None], ty[:, None], cx[None, :] + h / 2.0, cy[None, :] + h / 2.0)
    quantum = 1.0 / (sub * sub)
    W -= (0.1 * quantum / D.max()) * D
    return W


def _repair_to_cycle(perm: np.ndarray, n: int, T: Optional[BaseMap] = None) -> np.ndarray:
    """Merge permutation cycles into one by greedy successor 2-swaps.

    Swapping the successors of i and j merges their cycles.  Candidate
    pairs are cells that are grid-adjacent or whose targets are
    grid-adjacent; the greedy picks the pair minimizing the larger of
    the two new approximation errors |T(center_i) - center(new target)|
    (plain displacement when no map is supplied, e.g. for the identity).
    """
    perm = perm.copy()
    N = n * n
    h = TWO_PI / n

    def neighbors(i):
        ix, iy = divmod(i, n)
        return (((ix + 1) % n) * n + iy, ((ix - 1) % n) * n + iy,
                ix * n + (iy + 1) % n, ix * n + (iy - 1) % n)

    cx = (np.arange(N) // n + 0.5) * h
    cy = (np.arange(N) % n + 0.5) * h
    if T is None:
        ix, iy = cx, cy
    else:
        ix, iy = T.apply(cx, cy)

    def err(i, target):
        return float(torus_dist(ix[i], iy[i], cx[target], cy[target]))

    while True:
        cycles = _perm_cycles(perm)
        if len(cycles) == 1:
            return perm
        label = np.empty(N, dtype=int)
        for ci, cyc in enumerate(cycles):
            label[cyc] = ci
        inv = np.empty(N, dtype=int)
        inv[perm] = np.arange(N)
        best = None
        for i in range(N):
            cands = set(neighbors(i))
            cands.update(inv[t] for t in neighbors(perm[i]))
            for j in cands:
                if label[i] == label[j]:
                    continue
                cost = max(err(i, perm[j]), err(j, perm[i]))
                if best is None or cost < best[0]:
                    best = (cost, i, j)
        if best is None:  # unreachable on a connected grid
            raise RuntimeError("no cross-cycle candidate pair found")
        _, i, j = best
        perm[i], perm[j] = perm[j], perm[i]


def lax_approximate(T: BaseMap, n: int, sub: int = 4, cyclic: bool = True) -> CubeExchange:
    """Cube exchange of resolution n closest to T in overlap mass.

    Maximum-weight bipartite matching on subcell-estimated overlap
    weights (exact for maps sending cells onto cells), optionally
    followed by the cyclic repair.
    """
    W = _overlap_weights(T, n, sub=sub)
    if not np.any(W > 0):
        raise DegenerateOverlap("all overlap weights vanish")
    row, col = linear_sum_assignment(W, maximize=True)
    perm = np.empty(n * n, dtype=int)
    perm[row] = col
    if cyclic:
        perm = _repair_to_cycle(perm, n, T)
        return CubeExchange(n=n, perm=perm, cyclic=True)
    return CubeExchange(n=n, perm=perm, cyclic=(len(_perm_cycles(perm)) == 1))


# ---------------------------------------------------------------------------
# Exact Lyapunov exponents over periodic bases
# ---------------------------------------------------------------------------

def _spectral_radius_2x2(a, b, c, d):
    tr = a + d
    det = a * d - b * c
    disc = np.sqrt(np.asarray(tr * tr - 4.0 * det, dtype=complex))
    return np.maximum(np.abs((tr + disc) / 2.0), np.abs((tr - disc) / 2.0))


def _cycle_product_radius(cfg, xs, w=None):
    """Spectral radius of the one-step product along the angle sequence xs.

    xs has shape (p, m) for m parallel offsets; matrices are the A form
    of cfg (its own w unless overridden).  Renormalizes by max-abs to
    stay finite and restores the factor in the radius.
    """
    m11s = cfg.entry11(xs, w=w) if cfg.kind == "spectral" else cfg.entry11(xs)
    m11s = np.asarray(m11s, dtype=complex)
    p, m = m11s.shape
    a = np.ones(m, dtype=complex)
    b = np.zeros(m, dtype=complex)
    c = np.zeros(m, dtype=complex)
    d = np.ones(m, dtype=complex)
    acc = np.zeros(m)
    for k in range(p):
        t = m11s[k]
        a, c = t * a - c, a
        b, d = t * b - d, b
        s = np.maximum(np.maximum(np.abs(a), np.abs(b)),
                       np.maximum(np.abs(c), np.abs(d)))
        s = np.where(s == 0, 1.0, s)
        a, b, c, d = a / s, b / s, c / s, d / s
        acc += np.log(s)
    return np.log(_spectral_radius_2x2(a, b, c, d)) + acc


def periodic_lyapunov(base, cfg, offsets: int = 24, w=None) -> float:
    """Exact cocycle exponent over a periodic base.

    Averages (1/p) log(spectral radius of the p-step product) over a
    midpoint quadrature of the fundamental cell, cycle by cycle.
    cfg must be a spectral-kind Cocycle2 (its base field is ignored).
    """
    if isinstance(base, AnnulusPermutation):
        n = base.n
        h = TWO_PI / n
        t = (np.arange(offsets) + 0.5) / offsets * h
        seen = np.zeros(n, dtype=bool)
        total = 0.0
        for j in range(n):
            if seen[j]:
                continue
            cyc = base.cycle_of(j)
            for k in cyc:
                seen[k] = True
            p = len(cyc)
            # orbit visits annuli cyc with constant offset t
            xs = np.array([(k * h) for k in _annulus_orbit(base, j, p)])[:, None] + t[None, :]
            vals = _cycle_product_radius(cfg, xs, w=w) / p
            total += (p / n) * float(np.mean(vals))
        return total
    if isinstance(base, CubeExchange):
        # the potential depends only on x and offsets ride along rigidly,
        # so a 1d x-offset quadrature per cycle suffices
        n = base.n
        h = TWO_PI / n
        t1 = (np.arange(offsets) + 0.5) / offsets * h
        cycles = _perm_cycles(base.perm)
        total = 0.0
        for cyc in cycles:
            p = len(cyc)
            xs = np.array([(c // n) * h for c in cyc])[:, None] + t1[None, :]
            vals = _cycle_product_radius(cfg, xs, w=w) / p
            total += (p / n ** 2) * float(np.mean(vals))
        return total
    # identity or other period-1 base at a point
    if hasattr(base, "apply"):
        xs = (np.arange(offsets) + 0.5) / offsets * TWO_PI
        vals = _cycle_product_radius(cfg, xs[None, :], w=w)
        return float(np.mean(vals))
    raise TypeError("unsupported periodic base")


def _annulus_orbit(base: AnnulusPermutation, j: int, p: int):
    out = [j]
    for _ in range(p - 1):
        out.append(int(base.pi[out[-1]]))
    return out


def permutation_experiment(n: int, lam: float, sample: int, rng,
                           offsets: int = 24, exhaustive_limit: int = 5) -> np.ndarray:
    """Sorted exceedances mu(A_{T_pi, lam cos}) - log(lam/2) over cyclic annulus permutations.

    Exhaustive over all (n-1)! cyclic permutations for small n, sampled
    otherwise.  The cocycle is the E = 0, w = 1 spectral family.
    """
    from itertools import permutations

    from .cocycle import Cocycle2

    cfg = Cocycle2(E=0.0, lam=lam, kind="spectral")
    if n <= exhaustive_limit:
        perms = []
        for rest in permutations(range(1, n)):
            p = np.empty(n, dtype=int)
            cur = 0
            for nxt in rest:
                p[cur] = nxt
                cur = nxt
            p[cur] = 0
            perms.append(p)
    else:
        perms = []
        for _ in range(sample):
            order = np.concatenate([[0], rng.permutation(np.arange(1, n))])
            p = np.empty(n, dtype=int)
            p[order] = np.roll(order, -1)
            perms.append(p)
    vals = np.empty(len(perms))
    for i, p in enumerate(perms):
        base = AnnulusPermutation(n=n, pi=p)
        vals[i] = periodic_lyapunov(base, cfg, offsets=offsets) - np.log(lam / 2.0)
    return np.sort(vals)
