"""Model problem -eps*u'' - b*u' + c*u = f with Dirichlet data.

Also holds the three worked examples (convection-diffusion, reaction-diffusion
and the Green function of -eps^2 u'' + u) together with their closed-form
solutions, evaluated without overflow down to eps = 1e-10.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Union

import numpy as np
from numpy.polynomial import Polynomial as _NpPoly

from .exceptions import DomainError, InvalidParameterError

KINDS = ("cde", "rde", "green")


@dataclass(frozen=True)
class Polynomial:
    """Polynomial right-hand side, coefficients listed constant term first."""

    coefficients: tuple[float, ...]

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coefficients)
        if not coeffs:
            raise InvalidParameterError("polynomial coefficient list is empty")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), self.coefficients)


@dataclass(frozen=True)
class PointMass:
    """Unit Dirac mass at ``location``."""

    location: float

    def __post_init__(self):
        object.__setattr__(self, "location", float(self.location))


@dataclass(frozen=True)
class Generic:
    """Arbitrary pointwise right-hand side.

    ``mirror`` is set by :func:`reflect`; when present the function is
    evaluated at ``mirror - x``.
    """

    func: Callable
    mirror: float | None = None

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.mirror is not None:
            x = self.mirror - x
        return np.asarray(np.vectorize(self.func, otypes=[float])(x), dtype=float)


Rhs = Union[Polynomial, PointMass, Generic]


@dataclass(frozen=True)
class Problem:
    """Two-point BVP ``-epsilon u'' - b u' + c u = rhs`` on ``domain``.

    A problem with ``b > 0`` can be built (so that it can be handed to
    :func:`reflect`) but assembly refuses it; the layer is assumed to sit at
    the right endpoint.
    """

    epsilon: float
    b: float
    c: float
    rhs: Rhs
    left_value: float = 0.0
    right_value: float = 0.0
    domain: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        eps, b, c = float(self.epsilon), float(self.b), float(self.c)
        if not (math.isfinite(eps) and eps > 0.0):
            raise InvalidParameterError(f"epsilon must be positive, got {self.epsilon!r}")
        if not (math.isfinite(b) and math.isfinite(c)):
            raise InvalidParameterError("coefficients must be finite")
        if c < 0.0:
            raise InvalidParameterError(f"reaction coefficient must be >= 0, got {c}")
        if b == 0.0 and c == 0.0:
            raise InvalidParameterError("b and c must not both vanish")
        lo, hi = (float(v) for v in self.domain)
        if not lo < hi:
            raise InvalidParameterError(f"domain endpoints must be ordered, got {self.domain}")
        if isinstance(self.rhs, PointMass) and not lo < self.rhs.location < hi:
            raise InvalidParameterError(
                f"point mass at {self.rhs.location} is not inside ({lo}, {hi})"
            )
        if not isinstance(self.rhs, (Polynomial, PointMass, Generic)):
            raise InvalidParameterError(f"unsupported right-hand side {type(self.rhs).__name__}")
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "left_value", float(self.left_value))
        object.__setattr__(self, "right_value", float(self.right_value))
        object.__setattr__(self, "domain", (lo, hi))


def _check_eps(epsilon):
    if not (isinstance(epsilon, (int, float)) and math.isfinite(epsilon) and epsilon > 0):
        raise InvalidParameterError(f"epsilon must be positive, got {epsilon!r}")


def make_cde(epsilon: float) -> Problem:
    """Convection-diffusion example ``-eps u'' + u' = x``, zero boundary data."""
    _check_eps(epsilon)
    return Problem(epsilon=epsilon, b=-1.0, c=0.0, rhs=Polynomial((0.0, 1.0)))


def make_rde(epsilon: float) -> Problem:
    """Reaction-diffusion example ``-eps u'' + u = x``, zero boundary data."""
    _check_eps(epsilon)
    return Problem(epsilon=epsilon, b=0.0, c=1.0, rhs=Polynomial((0.0, 1.0)))


def make_green(epsilon: float, alpha: float) -> Problem:
    """Green function problem ``-eps^2 u'' + u = delta_alpha``.

    The returned problem carries ``epsilon**2`` as its diffusion coefficient.
    """
    _check_eps(epsilon)
    if not 0.0 < alpha < 1.0:
        raise InvalidParameterError(f"alpha must lie in (0, 1), got {alpha!r}")
    return Problem(epsilon=epsilon * epsilon, b=0.0, c=1.0, rhs=PointMass(alpha))


def reflect(p: Problem) -> Problem:
    """Apply the substitution ``w(x) = u(lo + hi - x)``."""
    lo, hi = p.domain
    s = lo + hi
    rhs = p.rhs
    if isinstance(rhs, Polynomial):
        composed = _NpPoly(rhs.coefficients)(_NpPoly([s, -1.0]))
        coeffs = list(composed.coef) + [0.0] * (len(rhs.coefficients) - len(composed.coef))
        new_rhs: Rhs = Polynomial(tuple(coeffs[: len(rhs.coefficients)]))
    elif isinstance(rhs, PointMass):
        new_rhs = PointMass(s - rhs.location)
    else:
        new_rhs = Generic(rhs.func, None if rhs.mirror == s else s)
    return replace(
        p,
        b=-p.b,
        rhs=new_rhs,
        left_value=p.right_value,
        right_value=p.left_value,
    )


# -- exact solutions ---------------------------------------------------------


def _sinh_ratio(a, b):
    """sinh(a)/sinh(b) for 0 <= a <= b without forming either sinh."""
    a = np.asarray(a, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.exp(a - b) * np.expm1(-2.0 * a) / np.expm1(-2.0 * b)
    return np.where(a == 0.0, 0.0, out)


@dataclass(frozen=True)
class ExactSolution:
    """Closed-form solution of one of the worked examples on [0, 1].

    For ``kind == "green"``, ``epsilon`` is the unsquared parameter of
    ``-eps^2 u'' + u = delta_alpha``.
    """

    kind: str
    epsilon: float
    alpha: float | None = None
    peak: float = field(init=False, repr=False, compare=False, default=float("nan"))

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameterError(f"unknown example kind {self.kind!r}")
        _check_eps(self.epsilon)
        if self.kind == "green":
            if self.alpha is None or not 0.0 < self.alpha < 1.0:
                raise InvalidParameterError("green solution needs alpha in (0, 1)")
            e, a = self.epsilon, self.alpha
            # flux jump eps^2 (u'(a-) - u'(a+)) = 1 with u(a) = K
            k = 1.0 / (e * (1.0 / math.tanh(a / e) + 1.0 / math.tanh((1.0 - a) / e)))
            object.__setattr__(self, "peak", k)

    @property
    def k_alpha(self) -> float:
        """Value at the point mass (green only)."""
        return self.peak

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        e = self.epsilon
        if self.kind == "cde":
            with np.errstate(under="ignore"):
                layer = (np.exp((x - 1.0) / e) - math.exp(-1.0 / e)) / -math.expm1(-1.0 / e)
            return x * (x / 2.0 + e) - (0.5 + e) * layer
        if self.kind == "rde":
            s = math.sqrt(e)
            with np.errstate(under="ignore"):
                layer = (np.exp((x - 1.0) / s) - np.exp(-(x + 1.0) / s)) / -math.expm1(-2.0 / s)
            return x - layer
        a = self.alpha
        with np.errstate(under="ignore"):
            left = _sinh_ratio(np.minimum(x, a) / e, a / e)
            right = _sinh_ratio(np.clip(1.0 - x, 0.0, 1.0 - a) / e, (1.0 - a) / e)
        return self.peak * np.where(x <= a, left, right)


def exact_eval(sol: ExactSolution, x):
    """Evaluate ``sol`` at ``x`` (scalar or array), which must lie in [0, 1]."""
    xa = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(xa)) or np.any(xa < 0.0) or np.any(xa > 1.0):
        raise DomainError(f"evaluation point outside [0, 1]: {x!r}")
    out = sol(xa)
    return float(out) if np.ndim(out) == 0 else out


def example(kind: str, epsilon: float, alpha: float | None = None) -> tuple[Problem, ExactSolution]:
    """Return the problem and exact solution for a named example."""
    if kind == "cde":
        return make_cde(epsilon), ExactSolution("cde", epsilon)
    if kind == "rde":
        return make_rde(epsilon), ExactSolution("rde", epsilon)
    if kind == "green":
        if alpha is None:
            raise InvalidParameterError("green example needs alpha")
        return make_green(epsilon, alpha), ExactSolution("green", epsilon, alpha)
    raise InvalidParameterError(f"unknown example kind {kind!r}")
