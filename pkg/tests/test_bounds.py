import numpy as np
import pytest

from stdmaplab import bounds
from stdmaplab.errors import DomainError


def test_lambda0_closed_form():
    l0 = bounds.lambda0()
    assert l0 == pytest.approx((8.0 / (6.0 - 3.0 * np.sqrt(3.0))) ** 0.5, abs=1e-14)
    assert l0 == pytest.approx(3.15470, abs=1e-4)
    # exact algebraic identity: lambda0^2 = (16 + 8 sqrt 3)/3
    assert l0 ** 2 == pytest.approx((16.0 + 8.0 * np.sqrt(3.0)) / 3.0, rel=1e-14)


def test_entropy_lower_crosses_zero_at_lambda0():
    l0 = bounds.lambda0()
    assert abs(bounds.entropy_lower(l0)) < 1e-12
    # equivalently log M(0, l0) = 2 log(l0/2)
    assert np.log(bounds.M(0.0, l0)) == pytest.approx(2 * np.log(l0 / 2), abs=1e-12)
    # sign change with 1e-9 slack around the crossing
    assert bounds.entropy_lower(l0 - 1e-6) < 1e-9
    assert bounds.entropy_lower(l0 + 1e-6) > -1e-9


def test_C_limit_and_monotonicity():
    assert bounds.C_lambda(1e6) - bounds.LOG_2_OVER_SQRT3 == pytest.approx(0.0, abs=1e-6 + 5e-12)
    lams = np.linspace(0.5, 50, 200)
    vals = [bounds.C_lambda(l) for l in lams]
    assert np.all(np.diff(vals) < 0)  # strictly decreasing


def test_M_special_values():
    # E = 0: M = (1 + sqrt(1 + lam^2))/sqrt(3)
    for lam in (0.5, 2.0, 7.0):
        assert bounds.M(0.0, lam) == pytest.approx(
            (1 + np.sqrt(1 + lam * lam)) / np.sqrt(3), rel=1e-14)
    # lam -> inf at E = 0: M/(lam/2) -> 2/sqrt(3)
    lam = 1e8
    assert bounds.M(0.0, lam) / (lam / 2) == pytest.approx(2 / np.sqrt(3), rel=1e-7)


def test_M_branch_continuity_along_real_E():
    lam = 3.0
    Es = np.linspace(-2 * lam, 2 * lam, 4001)
    vals = np.array([bounds.M(E, lam) for E in Es])
    step = np.max(np.abs(np.diff(vals)))
    assert step < 0.05  # no branch jumps


def test_hadamard_closed_form_oracle():
    # (1/2pi) int log sqrt(2 + lam^2 cos^2 x) dx = log((sqrt2 + sqrt(2 + lam^2))/2)
    for lam in (2.0, 10.0, 100.0):
        oracle = np.log((np.sqrt(2) + np.sqrt(2 + lam * lam)) / 2)
        assert bounds.hadamard_c(0.0, lam) == pytest.approx(oracle, abs=1e-9)


def test_hadamard_independent_quadrature_rule():
    # composite Gauss-Legendre oracle vs the adaptive rule
    lam, E = 2.0, 0.0
    nodes, weights = np.polynomial.legendre.leggauss(48)
    total = 0.0
    panels = 16
    h = 2 * np.pi / panels
    for k in range(panels):
        x = k * h + (nodes + 1) * h / 2
        total += np.sum(weights * 0.5 * np.log(2 + (E + lam * np.cos(x)) ** 2)) * h / 2
    assert bounds.hadamard_c(E, lam) == pytest.approx(total / (2 * np.pi), abs=1e-9)


def test_hadamard_tail_and_lower_bound():
    # c(0, lam) - log(lam/2) = log(sqrt2/lam + sqrt(2/lam^2 + 1)) ~ sqrt2/lam
    assert bounds.hadamard_c(0.0, 150.0) - np.log(75.0) < 0.01
    assert bounds.hadamard_c(0.0, 100.0) - np.log(50.0) == pytest.approx(
        np.sqrt(2) / 100, rel=0.01)
    for lam in (1.0, 4.0, 12.0):
        assert bounds.hadamard_c(0.0, lam) >= np.log(lam / 2)


def test_hadamard_half_interval_symmetry():
    # integrating [0, pi] and doubling is what the implementation does; cross-check
    lam, E = 5.0, 0.0
    from scipy.integrate import quad
    full, _ = quad(lambda x: 0.5 * np.log(2 + (E + lam * np.cos(x)) ** 2),
                   0, 2 * np.pi, epsabs=1e-12, limit=200)
    assert bounds.hadamard_c(E, lam) == pytest.approx(full / (2 * np.pi), abs=1e-12)


def test_C2_below_C_and_positive():
    for lam in (4.0, 6.0, 10.0):
        c2 = bounds.C2(lam)
        assert c2 <= bounds.C_lambda(lam) + 1e-9
    c2 = bounds.C2(10.0)
    assert 0.0 < c2 < bounds.C_lambda(10.0)


def test_C2_symmetry_in_x_and_y():
    # the tensor rule is symmetric in the two axes, so swapping the roles of
    # x and y in the integrand leaves the value unchanged to rounding
    lam = 4.0

    def value_swapped():
        from stdmaplab.bounds import _gl_panels, spectral_norm_2x2
        x, wx = _gl_panels(32)
        tx = -lam * np.cos(x)
        TX, TY = np.meshgrid(tx, tx, indexing="ij")
        nrm = spectral_norm_2x2(TX * TY - 1.0, -TX, TY, -np.ones_like(TX))
        W = wx[:, None] * wx[None, :]
        return 0.5 * np.sum(W * np.log(nrm)) / (2 * np.pi) ** 2

    def value_plain():
        from stdmaplab.bounds import _gl_panels, spectral_norm_2x2
        x, wx = _gl_panels(32)
        tx = -lam * np.cos(x)
        TX, TY = np.meshgrid(tx, tx, indexing="ij")
        nrm = spectral_norm_2x2(TY * TX - 1.0, -TY, TX, -np.ones_like(TX))
        W = wx[:, None] * wx[None, :]
        return 0.5 * np.sum(W * np.log(nrm)) / (2 * np.pi) ** 2

    assert value_plain() == pytest.approx(value_swapped(), abs=1e-12)


def test_pesin_bound_values():
    assert bounds.pesin_lower(5.42) > 0.5
    assert bounds.pesin_lower(bounds.lambda0() * 1.0001) < 0.01
    assert 1.0 - bounds.pesin_lower(1e6) < 0.05
    with pytest.raises(DomainError):
        bounds.pesin_lower(2.0)
    # hadamard-denominator variant exposed behind a flag
    assert 0 < bounds.pesin_lower(6.0, use_hadamard=True) <= 1.0


def test_entropy_bounds_order():
    for lam in (3.5, 6.0, 9.0):
        rep = bounds.bound_report(lam, with_c2=False)
        if lam > bounds.lambda0():
            assert rep.entropy_lower <= rep.entropy_upper
