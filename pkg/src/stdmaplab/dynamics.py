"""Standard-map family, measure-preserving base maps, orbits and Jacobians.

Angle convention: the torus is [0, 2pi)^2 and the kick is literally
f(x) = sum_k amp_k * sin(m_k x + phase_k).  Figure-style plots in units
of the full circle are a rescale done by the plotting layer, never here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence, Tuple

import numpy as np

TWO_PI = 2.0 * np.pi


def wrap(x):
    """Reduce an angle (or array of angles) into [0, 2pi).

    numpy's remainder already lands in [0, 2pi); the single correction
    branch catches the x % 2pi == 2pi rounding case so orbits are
    bit-reproducible on a given platform.
    """
    r = np.remainder(x, TWO_PI)
    return np.where(r >= TWO_PI, 0.0, r)


@dataclass(frozen=True)
class TorusPoint:
    x: float
    y: float

    def __post_init__(self):
        object.__setattr__(self, "x", float(wrap(self.x)))
        object.__setattr__(self, "y", float(wrap(self.y)))


@dataclass(frozen=True)
class LiftedPoint:
    """Unreduced phase-space point on the universal cover."""
    x: float
    y: float


@dataclass(frozen=True)
class KickFunction:
    """Finite Fourier sine series f(x) = sum amp*sin(m x + phase).

    Real-valued and 2pi-periodic by construction; the derivative is
    available in closed form.
    """
    harmonics: Tuple[Tuple[int, float, float], ...] = ((1, 1.0, 0.0),)

    def __post_init__(self):
        for m, _, _ in self.harmonics:
            if int(m) < 1:
                raise ValueError("harmonic order must be >= 1")

    def __call__(self, x):
        out = 0.0
        for m, amp, ph in self.harmonics:
            out = out + amp * np.sin(m * np.asarray(x) + ph)
        return out

    def derivative(self, x):
        out = 0.0
        for m, amp, ph in self.harmonics:
            out = out + amp * m * np.cos(m * np.asarray(x) + ph)
        return out


SIN = KickFunction()


class Form(Enum):
    TWIST = "twist"
    HAMILTONIAN = "hamiltonian"


@dataclass(frozen=True)
class MapSpec:
    """Standard-map family parameters.

    TwistForm: (x, y) -> (E x - y + lam f(x), x); the classical map is E = 2.
    HamiltonianForm: (x, y) -> (x + y + lam f(x), y + lam f(x)), the
    discrete-Legendre relative used for diffusion runs.
    """
    E: int = 2
    lam: float = 0.0
    f: KickFunction = SIN
    form: Form = Form.TWIST

    def __post_init__(self):
        if not np.isfinite(self.lam):
            raise ValueError("coupling must be finite")


class BaseMap:
    """A Lebesgue-measure-preserving transformation of the 2-torus."""

    def apply(self, x, y):
        """Map arrays of angles; returns reduced (x', y')."""
        raise NotImplementedError

    def orbit_x(self, x0, y0, n):
        """x-coordinates of the length-n orbit (vectorized over seeds)."""
        x = np.array(x0, dtype=float, copy=True)
        y = np.array(y0, dtype=float, copy=True)
        out = np.empty((n,) + x.shape)
        for i in range(n):
            out[i] = x
            x, y = self.apply(x, y)
        return out


@dataclass(frozen=True)
class StandardMap(BaseMap):
    spec: MapSpec

    def apply(self, x, y):
        s = self.spec
        kick = s.lam * s.f(x)
        if s.form is Form.TWIST:
            xn = wrap(s.E * x - y + kick)
            yn = wrap(x)
        else:
            yn_raw = y + kick
            xn = wrap(x + yn_raw)
            yn = wrap(yn_raw)
        return xn, yn

    def apply_lifted(self, x, y):
        """One Hamiltonian-form step without mod reduction (universal cover)."""
        s = self.spec
        if s.form is not Form.HAMILTONIAN:
            raise ValueError("lifted stepping requires HamiltonianForm")
        kick = s.lam * s.f(x)
        return x + y + kick, y + kick


@dataclass(frozen=True)
class Rotation(BaseMap):
    """Rigid rotation acting on x only: (x, y) -> (x + alpha, y)."""
    alpha: float

    def apply(self, x, y):
        return wrap(x + self.alpha), np.asarray(y, dtype=float) + 0.0


@dataclass(frozen=True)
class Identity(BaseMap):
    def apply(self, x, y):
        return np.asarray(x, dtype=float) + 0.0, np.asarray(y, dtype=float) + 0.0


@dataclass(frozen=True)
class Composition(BaseMap):
    """Composition([A, B]) acts as A(B(p))."""
    maps: Tuple[BaseMap, ...]

    def apply(self, x, y):
        for m in reversed(self.maps):
            x, y = m.apply(x, y)
        return x, y


def step(p: TorusPoint, m: BaseMap) -> TorusPoint:
    x, y = m.apply(np.asarray(p.x), np.asarray(p.y))
    return TorusPoint(float(x), float(y))


def orbit(p0: TorusPoint, m: BaseMap, n: int) -> np.ndarray:
    """Length-(n+1) torus orbit as an (n+1, 2) array including the seed."""
    out = np.empty((n + 1, 2))
    x, y = np.asarray(p0.x, dtype=float), np.asarray(p0.y, dtype=float)
    for i in range(n + 1):
        out[i] = x, y
        x, y = m.apply(x, y)
    return out


def lifted_orbit(p0: TorusPoint, m: StandardMap, n: int) -> np.ndarray:
    """Universal-cover orbit of the Hamiltonian form, (n+1, 2), unreduced y."""
    if not isinstance(m, StandardMap) or m.spec.form is not Form.HAMILTONIAN:
        raise ValueError("lifted_orbit requires a StandardMap in HamiltonianForm")
    out = np.empty((n + 1, 2))
    x, y = float(p0.x), float(p0.y)
    for i in range(n + 1):
        out[i] = x, y
        x, y = m.apply_lifted(x, y)
    return out


def lifted_ensemble_y(m: StandardMap, x0: np.ndarray, y0: np.ndarray, n: int,
                      keep_every: int = 1) -> np.ndarray:
    """y-coordinates of a lifted ensemble, shape (n//keep_every + 1, len(x0))."""
    if m.spec.form is not Form.HAMILTONIAN:
        raise ValueError("requires HamiltonianForm")
    x = np.array(x0, dtype=float, copy=True)
    y = np.array(y0, dtype=float, copy=True)
    rows = [y.copy()]
    for i in range(1, n + 1):
        x, y = m.apply_lifted(x, y)
        # keep only the angle of x reduced: the dynamics of y depends on x mod 2pi
        x = wrap(x)
        if i % keep_every == 0:
            rows.append(y.copy())
    return np.array(rows)


def jacobian(p: TorusPoint, spec: MapSpec) -> np.ndarray:
    """Jacobian of the twist form at p: [[E + lam f'(x), -1], [1, 0]]."""
    if spec.form is not Form.TWIST:
        raise ValueError("jacobian is defined for the twist form")
    d = spec.E + spec.lam * spec.f.derivative(p.x)
    return np.array([[d, -1.0], [1.0, 0.0]])
