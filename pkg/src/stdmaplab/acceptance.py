"""Acceptance battery: every headline criterion with its pinned tolerance.

Each criterion function returns a CriterionResult with the measured
numbers; run_all executes the battery and reports one verdict line per
criterion.  The CLI `suite acceptance` and tests/test_acceptance.py both
run exactly these functions.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from . import bounds
from .cocycle import Cocycle2, grid_lyapunov, grid_seeds, herman_scan, mu_n_subharmonic
from .complexan import (Sector, annulus_jensen_closed_form, arg_change, arc_path,
                        harnack_harness, jensen_sector_residual)
from .diagnostics import (aubry_gap, lyapunov_cdf, mathieu_base, standard_base,
                          wiener_test)
from .dynamics import Identity
from .jacobi import (PeriodicJacobi, ProductOperator, spectrum_curves,
                     truncated_eigenvalues, verify_delta_identity, w_dos_atoms)
from .lax import AnnulusPermutation
from .potential import (EmpiricalMeasure, capacity_energy, product_formula_residual,
                        thouless_residual, thouless_w_residual)
from .rng import stream

TWO_PI = 2.0 * np.pi


@dataclass
class CriterionResult:
    name: str
    passed: bool
    details: Dict[str, float]
    runtime_s: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        detail = ", ".join(f"{k}={v:.6g}" for k, v in self.details.items())
        return f"[{status}] {self.name}: {detail} ({self.runtime_s:.1f}s)"


def _seven_cycle(seed: int = 11) -> AnnulusPermutation:
    """The period-7 cyclic annulus base used by the w-form criteria."""
    rng = stream(seed)
    order = np.concatenate([[0], rng.permutation(np.arange(1, 7))])
    pi = np.empty(7, dtype=int)
    pi[order] = np.roll(order, -1)
    return AnnulusPermutation(n=7, pi=pi)


def crit_constants() -> CriterionResult:
    """lambda0 value, zero of the entropy lower bound there, C(inf) limit."""
    l0 = bounds.lambda0()
    crossing = bounds.entropy_lower(l0)
    tail = bounds.C_lambda(1e6) - bounds.LOG_2_OVER_SQRT3
    ok = (abs(l0 - 3.15470) <= 1e-4
          and abs(crossing) <= 1e-10
          and abs(tail) <= 1e-6 + 5e-12)  # fp slack of the final subtraction
    return CriterionResult("constants", ok, {
        "lambda0": l0, "entropy_lower_at_lambda0": crossing, "C_tail_dev": tail})


def crit_lyapunov_floor(g: int = 40, n: int = 100000) -> CriterionResult:
    details = {}
    ok = True
    for lam in (4.0, 6.0, 10.0):
        cfg = Cocycle2(E=2.0, lam=lam, base=standard_base(lam), kind="jacobian")
        mean = grid_lyapunov(cfg, g, n).mean
        lo = np.log(lam / 2.0) - 0.02
        hi = np.log(lam / 2.0) + bounds.C_E(2.0, lam) + 0.05
        ok &= lo <= mean <= hi
        details[f"mean_{lam:g}"] = mean
        details[f"lo_{lam:g}"] = lo
        details[f"hi_{lam:g}"] = hi
    return CriterionResult("lyapunov_floor", bool(ok), details)


def crit_mu_n_anchor() -> CriterionResult:
    details = {}
    ok = True
    for lam in (3.0, 8.0):
        cfg = Cocycle2(lam=lam, base=standard_base(lam), kind="spectral")
        v = mu_n_subharmonic(cfg, w=0.0, n=50, g=16)
        dev = abs(v - np.log(lam / 2.0))
        ok &= dev <= 1e-10
        details[f"dev_{lam:g}"] = dev
    return CriterionResult("mu_n_anchor", bool(ok), details)


def crit_thouless() -> CriterionResult:
    details = {}
    # scalar, lam = 0 closed-form case at off-spectrum energies
    rep0 = thouless_residual(Identity(), 0.0, [3.0 + 0j, -2.5 + 0.5j, 4.0j],
                             N=400, m=16, n_steps=20000)
    details["scalar_free"] = rep0.sup_residual
    # Mathieu lam = 4, off-spectrum imaginary energy
    rep1 = thouless_residual(mathieu_base(), 4.0, [4.0j], N=400, m=50, n_steps=10000)
    details["scalar_mathieu"] = rep1.sup_residual
    # w-form over the period-7 base
    base = _seven_cycle()
    h = TWO_PI / 7
    seeds = [((k + 0.5) / 8 * h, 1.0) for k in range(8)]
    ws = np.concatenate([0.5 * np.exp(1j * np.arange(32) / 32 * TWO_PI),
                         1.5 * np.exp(1j * np.arange(32) / 32 * TWO_PI)])
    rep2 = thouless_w_residual(base, 4.0, ws, seeds, n_theta=128, offsets=12)
    details["w_form"] = rep2.sup_residual
    ok = (rep0.sup_residual < 2e-2 and rep1.sup_residual < 2e-2
          and rep2.sup_residual < 2e-2)
    return CriterionResult("thouless", bool(ok), details)


def crit_determinant_product() -> CriterionResult:
    v = 5.0
    resc = product_formula_residual(np.full(404, v), np.full(404, v), N=400)
    oracle = np.log((v + np.sqrt(v * v - 4.0)) / 2.0)
    rng = stream(5)
    V1 = np.tile(rng.normal(size=4) * 1.5, 101)
    V2 = np.tile(rng.normal(size=4) * 1.5, 101)
    resr = product_formula_residual(V1, V2, N=400)
    ok = (resc["residual"] < 1e-2
          and abs(resc["logdet_L1"] - oracle) < 1e-2
          and resr["residual"] < 1e-2)
    return CriterionResult("determinant_product", bool(ok), {
        "const_residual": resc["residual"],
        "const_oracle_dev": abs(resc["logdet_L1"] - oracle),
        "period4_residual": resr["residual"]})


def crit_jacobi_oracles() -> CriterionResult:
    rng = stream(7)
    worst = 0.0
    for _ in range(100):
        p = int(rng.integers(1, 9))
        J = PeriodicJacobi(a=rng.normal(size=p) + 1j * rng.normal(size=p),
                           b=rng.normal(size=p) + 1j * rng.normal(size=p),
                           c=rng.normal(size=p) + 1j * rng.normal(size=p))
        worst = max(worst, verify_delta_identity(J, rng, n_random=5))
    # selfadjoint instance: real symmetric coefficients, curves on the real line
    Jsa = PeriodicJacobi(a=[1.0, 1.0, 1.0], b=[0.4, -0.2, 0.9], c=[1.0, 1.0, 1.0])
    curves = spectrum_curves(Jsa, 128).curves
    max_imag = float(np.max(np.abs(curves.imag)))
    # free truncation closed form
    ev = np.sort(truncated_eigenvalues(np.zeros(100)).real)
    k = np.arange(1, 101)
    free_dev = float(np.max(np.abs(ev - np.sort(2.0 * np.cos(k * np.pi / 101.0)))))
    ok = worst < 1e-9 and max_imag < 1e-8 and free_dev < 1e-10
    return CriterionResult("jacobi_oracles", bool(ok), {
        "delta_identity_relerr": worst, "selfadjoint_max_imag": max_imag,
        "free_truncation_dev": free_dev})


def _cocycle_g(lam: float, xs: np.ndarray):
    """w -> [B^n(w)]_11 for the finite angle itinerary xs (entire in w)."""
    def g(w):
        w = np.asarray(w, dtype=complex)
        a = np.ones(w.shape, dtype=complex)
        b = np.zeros(w.shape, dtype=complex)
        c = np.zeros(w.shape, dtype=complex)
        d = np.ones(w.shape, dtype=complex)
        for x in xs:
            t = -0.5 * lam * (np.exp(1j * x) / w + w * np.exp(-1j * x))
            a, c = w * (t * a - c), w * a
            b, d = w * (t * b - d), w * b
        return a
    return g


def crit_jensen() -> CriterionResult:
    rng = stream(13)
    # polynomial with zeros inside the sector
    zeros = [0.9 * np.exp(1j * 0.8), 1.4 * np.exp(1j * 1.1)]
    gpoly = lambda z: (z - zeros[0]) * (z - zeros[1])
    sec = Sector(0.5, 2.0, 0.3, 1.9)
    r_poly = jensen_sector_residual(gpoly, sec, breaks=[abs(z) for z in zeros])
    # cocycle function over a period-7 Lax-type base, one sector of [0.8, 1.25]
    base = _seven_cycle()
    from .jacobi import periodic_orbit_angles
    xs = np.tile(periodic_orbit_angles(base, 0.31, 1.0), 1)[:6]
    g6 = _cocycle_g(4.0, xs)
    sec2 = Sector(0.8, 1.25, TWO_PI * 2 / 7, TWO_PI * 3 / 7)
    r_coc = jensen_sector_residual(g6, sec2, tol=1e-8)
    # full partition of the annulus vs classical annulus Jensen
    k = 6
    tsum = 0.0
    from scipy.integrate import quad
    gv = lambda z: (z - zeros[0]) * (z - zeros[1])
    for j in range(k):
        a0, b0 = j * TWO_PI / k, (j + 1) * TWO_PI / k
        f = lambda t: arg_change(gv, arc_path(t, a0, b0, 96)) / t
        val, _ = quad(f, 0.5, 2.0, epsabs=1e-9, epsrel=0.0, limit=200,
                      points=[abs(z) for z in zeros])
        tsum += val
    closed = annulus_jensen_closed_form(zeros, 0.5, 2.0)
    r_part = abs(tsum - closed)
    ok = r_poly < 1e-8 and r_coc < 1e-3 and r_part < 1e-6
    return CriterionResult("jensen_sector", bool(ok), {
        "polynomial": r_poly, "cocycle_g6": r_coc, "partition_vs_annulus": r_part})


def crit_wiener() -> CriterionResult:
    seeds1 = [((k + 0.5) / 8 * TWO_PI, 0.0) for k in range(8)]
    w1 = wiener_test(mathieu_base(), 1.0, 10000, 400, seeds1)
    w4 = wiener_test(mathieu_base(), 4.0, 10000, 400, seeds1)
    X, Y = grid_seeds(8)
    seeds2 = list(zip(X.ravel(), Y.ravel()))
    w6 = wiener_test(standard_base(6.0), 6.0, 10000, 400, seeds2)
    ok = (w1.point_mass_estimate < 0.02 and w4.point_mass_estimate > 0.1
          and w6.point_mass_estimate > 0.01)
    return CriterionResult("wiener_transition", bool(ok), {
        "mathieu_lam1": w1.point_mass_estimate,
        "mathieu_lam4": w4.point_mass_estimate,
        "stdmap_lam6": w6.point_mass_estimate})


def crit_aubry() -> CriterionResult:
    gm = aubry_gap(lambda l: mathieu_base(), 4.0, g=16, n=30000)
    gs = aubry_gap(lambda l: standard_base(l), 10.0, g=24, n=30000)
    ok = abs(gm) <= 2e-2 and abs(gs) < 0.05
    return CriterionResult("aubry_gap", bool(ok), {
        "mathieu": gm, "stdmap_lam10": gs})


def crit_kam_atom(g: int = 40, n: int = 100000) -> CriterionResult:
    a2 = lyapunov_cdf(2.0, g, n).atom_at_zero
    a10 = lyapunov_cdf(10.0, g, n).atom_at_zero
    ok = a2 > 0.1 and a10 < 0.05
    return CriterionResult("kam_atom", bool(ok), {"atom_lam2": a2, "atom_lam10": a10})


def crit_herman() -> CriterionResult:
    hs = herman_scan(10.0, np.array([-np.pi / 4, 0.0]), n=100000, n_seeds=8)
    dev = abs(hs.exponents[0] - 0.5 * np.log(2.0))
    ok = dev <= 1e-3 and bool(hs.uniform[0]) and not bool(hs.uniform[1])
    return CriterionResult("herman_spectrum", bool(ok), {
        "exp_dev": dev, "uniform_at_-pi/4": float(hs.uniform[0]),
        "uniform_at_0": float(hs.uniform[1])})


def crit_harnack() -> CriterionResult:
    ok = harnack_harness(stream(2), 1000, [2.0, 3.0, 5.0], variant="a")
    return CriterionResult("harnack_harness", bool(ok), {"violations": 0.0 if ok else 1.0})


def crit_capacity() -> CriterionResult:
    base = _seven_cycle()
    h = TWO_PI / 7
    locs, wts = w_dos_atoms(base, 8.0, [(0.25 * h, 1.0)], n_theta=192)
    cap = capacity_energy(EmpiricalMeasure(locs, wts))["capacity"]
    target = np.sqrt(2.0 / 8.0)
    rel = abs(cap - target) / target
    return CriterionResult("capacity", bool(rel <= 0.15), {
        "capacity": cap, "target": target, "rel_dev": rel})


ALL_CRITERIA: List[Callable[[], CriterionResult]] = [
    crit_constants, crit_lyapunov_floor, crit_mu_n_anchor, crit_thouless,
    crit_determinant_product, crit_jacobi_oracles, crit_jensen, crit_wiener,
    crit_aubry, crit_kam_atom, crit_herman, crit_harnack, crit_capacity,
]


def run_all(report=print) -> List[CriterionResult]:
    results = []
    for fn in ALL_CRITERIA:
        t0 = time.time()
        res = fn()
        res.runtime_s = time.time() - t0
        results.append(res)
        report(res.line())
    return results
