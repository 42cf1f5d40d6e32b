"""Phase-space points, observables with analytic gradients, and Poisson brackets.

Observables evaluate to a :class:`Jet`: value, gradient with respect to
``(a, y, p_a, p_y)``, and two magnitude trackers (the sum of absolute values of
everything that was added up). The magnitudes give a cancellation-aware scale
for relative tolerances: a bracket that should vanish is compared with the
size of the products it is built from, not with its own (tiny) value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "PhasePoint",
    "Jet",
    "Observable",
    "coordinate",
    "constant",
    "poisson_bracket",
    "bracket_with_scale",
    "finite_difference_grad",
]

COORDS = ("a", "y", "p_a", "p_y")


@dataclass(frozen=True)
class PhasePoint:
    a: float
    y: float
    p_a: float
    p_y: float

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.y, self.p_a, self.p_y], dtype=float)

    @classmethod
    def from_array(cls, v) -> "PhasePoint":
        return cls(float(v[0]), float(v[1]), float(v[2]), float(v[3]))


@dataclass(frozen=True)
class Jet:
    val: float
    grad: np.ndarray
    vmag: float
    gmag: np.ndarray

    @classmethod
    def const(cls, c: float) -> "Jet":
        return cls(float(c), np.zeros(4), abs(float(c)), np.zeros(4))

    @classmethod
    def var(cls, idx: int, value: float) -> "Jet":
        g = np.zeros(4)
        g[idx] = 1.0
        return cls(float(value), g, abs(float(value)), g.copy())

    @classmethod
    def of_a(cls, value: float, deriv: float) -> "Jet":
        """A function of ``a`` alone, given its value and a-derivative."""
        g = np.array([deriv, 0.0, 0.0, 0.0])
        return cls(float(value), g, abs(float(value)), np.abs(g))

    def __add__(self, other):
        other = _lift(other)
        return Jet(self.val + other.val, self.grad + other.grad,
                   self.vmag + other.vmag, self.gmag + other.gmag)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.val, -self.grad, self.vmag, self.gmag)

    def __sub__(self, other):
        return self + (-_lift(other))

    def __rsub__(self, other):
        return _lift(other) - self

    def __mul__(self, other):
        other = _lift(other)
        return Jet(
            self.val * other.val,
            self.val * other.grad + other.val * self.grad,
            self.vmag * other.vmag,
            self.vmag * other.gmag + other.vmag * self.gmag,
        )

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise ValueError("only nonnegative integer powers are supported")
        if k == 0:
            return Jet.const(1.0)
        return Jet(
            self.val**k,
            k * self.val ** (k - 1) * self.grad,
            self.vmag**k,
            k * self.vmag ** (k - 1) * self.gmag,
        )

    def reciprocal(self):
        inv = 1.0 / self.val
        return Jet(inv, -inv * inv * self.grad, abs(inv), inv * inv * self.gmag)

    def __truediv__(self, other):
        return self * _lift(other).reciprocal()


def _lift(x) -> Jet:
    return x if isinstance(x, Jet) else Jet.const(x)


class Observable:
    """A phase-space function with analytic gradient; supports ``+ - *`` and scalar factors."""

    def __init__(self, fn: Callable[[PhasePoint], Jet], name: str = "obs"):
        self._fn = fn
        self.name = name

    def jet(self, point: PhasePoint) -> Jet:
        return self._fn(point)

    def __call__(self, point: PhasePoint) -> float:
        return self._fn(point).val

    def value_and_grad(self, point: PhasePoint):
        j = self._fn(point)
        return j.val, j.grad

    def _combine(self, other, op, sym):
        if isinstance(other, Observable):
            return Observable(lambda p: op(self._fn(p), other._fn(p)), f"({self.name}{sym}{other.name})")
        return Observable(lambda p: op(self._fn(p), other), f"({self.name}{sym}{other})")

    def __add__(self, other):
        return self._combine(other, lambda u, v: u + v, "+")

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, lambda u, v: u - v, "-")

    def __mul__(self, other):
        return self._combine(other, lambda u, v: u * v, "*")

    __rmul__ = __mul__

    def __neg__(self):
        return Observable(lambda p: -self._fn(p), f"-{self.name}")

    def __repr__(self):
        return f"Observable({self.name})"


def coordinate(name: str) -> Observable:
    idx = COORDS.index(name)
    return Observable(lambda p: Jet.var(idx, getattr(p, name)), name)


def constant(c: float) -> Observable:
    return Observable(lambda p: Jet.const(c), repr(c))


def bracket_with_scale(f: Observable, g: Observable, point: PhasePoint):
    """``({f,g}, scale)`` where scale sums the magnitudes of the four products."""
    jf, jg = f.jet(point), g.jet(point)
    fa, fy, fpa, fpy = jf.grad
    ga, gy, gpa, gpy = jg.grad
    val = fa * gpa - fpa * ga + fy * gpy - fpy * gy
    ma, my, mpa, mpy = jf.gmag
    na, ny, npa, npy = jg.gmag
    scale = ma * npa + mpa * na + my * npy + mpy * ny
    return float(val), float(scale)


def poisson_bracket(f: Observable, g: Observable, point: PhasePoint) -> float:
    return bracket_with_scale(f, g, point)[0]


def finite_difference_grad(f: Observable, point: PhasePoint, h: float = 1e-7,
                           scheme: str = "forward", scales=None) -> np.ndarray:
    """Difference-quotient gradient; a test oracle only.

    ``scheme`` is ``forward``, ``central`` or ``five`` (the fourth-order five-point
    stencil). The step in coordinate i is ``h * scales[i]``; without ``scales`` it is
    ``h * max(1, |z_i|)``.
    """
    stencils = {
        "forward": ((0, -1.0), (1, 1.0), 1.0),
        "central": ((-1, -1.0), (1, 1.0), 2.0),
        "five": ((-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0), 12.0),
    }
    if scheme not in stencils:
        raise ValueError(f"unknown difference scheme {scheme!r}")
    *taps, denom = stencils[scheme]
    base = point.as_array()
    if scales is None:
        scales = np.maximum(1.0, np.abs(base))
    f0 = f(point)
    out = np.zeros(4)
    for i in range(4):
        step = h * float(scales[i])
        acc = 0.0
        for m, w in taps:
            if m == 0:
                acc += w * f0
                continue
            z = base.copy()
            z[i] += m * step
            acc += w * f(PhasePoint.from_array(z))
        out[i] = acc / (denom * step)
    return out
