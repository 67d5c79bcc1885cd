"""Stiffness system ``A U = F`` for linear elements on a 1D mesh."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import IO

import numpy as np

from .exceptions import InvalidParameterError
from .mesh import Mesh
from .problem import Generic, PointMass, Polynomial, Problem, Rhs


@dataclass(frozen=True, eq=False)
class TridiagonalSystem:
    """Interior rows of the Galerkin system after Dirichlet lifting.

    ``sub[k]`` is a_{k+2,k+1} and ``sup[k]`` is a_{k+1,k+2} (1-based rows);
    ``left_coupling`` = a_{1,0} and ``right_coupling`` = a_{n,n+1} are the
    entries that multiply the boundary values.
    """

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    load: np.ndarray
    left_coupling: float = 0.0
    right_coupling: float = 0.0

    def __post_init__(self):
        n = len(self.diag)
        if n < 1 or len(self.sub) != n - 1 or len(self.sup) != n - 1 or len(self.load) != n:
            raise InvalidParameterError("inconsistent tridiagonal system lengths")

    @property
    def n(self) -> int:
        return len(self.diag)

    def matvec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = self.diag * x
        y[1:] += self.sub * x[:-1]
        y[:-1] += self.sup * x[1:]
        return y

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.sub, -1) + np.diag(self.sup, 1)

    def with_load(self, load) -> "TridiagonalSystem":
        return TridiagonalSystem(self.sub, self.diag, self.sup, np.asarray(load, dtype=float),
                                 self.left_coupling, self.right_coupling)


def stiffness_row(h_i: float, h_next: float, epsilon: float, b: float, c: float,
                  left_width_reaction: bool = False) -> tuple[float, float, float]:
    """Entries (a_{i,i-1}, a_{i,i}, a_{i,i+1}) of one row.

    With ``left_width_reaction`` the reaction part of a_{i,i+1} uses ``h_i`` instead
    of ``h_{i+1}``; that variant is kept only for comparison runs and breaks
    symmetry on non-uniform meshes.
    """
    if not (h_i > 0 and h_next > 0):
        raise InvalidParameterError("element widths must be positive")
    sub = -epsilon / h_i + b / 2.0 + c * h_i / 6.0
    diag = epsilon * (1.0 / h_i + 1.0 / h_next) + c * (h_i + h_next) / 3.0
    sup = -epsilon / h_next - b / 2.0 + c * (h_i if left_width_reaction else h_next) / 6.0
    return sub, diag, sup


def _gauss01(k: int):
    t, w = np.polynomial.legendre.leggauss(k)
    return (t + 1.0) / 2.0, w / 2.0


def _hat_moments(mesh: Mesh, idx: np.ndarray, rhs: Rhs) -> np.ndarray:
    """(f, phi_i) for the node indices ``idx`` (1-based interior indices)."""
    x = mesh.nodes
    if isinstance(rhs, PointMass):
        a = rhs.location
        xl, xi, xr = x[idx - 1], x[idx], x[idx + 1]
        rising = (a >= xl) & (a <= xi)
        falling = (a > xi) & (a <= xr)
        out = np.zeros(idx.shape)
        out[rising] = (a - xl[rising]) / (xi[rising] - xl[rising])
        out[falling] = (xr[falling] - a) / (xr[falling] - xi[falling])
        return out
    if isinstance(rhs, Polynomial):
        # exact for the degree + 1 integrand
        t, w = _gauss01((rhs.degree + 3) // 2)
    elif isinstance(rhs, Generic):
        t, w = _gauss01(3)
    else:
        raise InvalidParameterError(f"unsupported right-hand side {type(rhs).__name__}")
    xi = x[idx][:, None]
    hl = mesh.widths[idx - 1][:, None]
    hr = mesh.widths[idx][:, None]
    left = hl[:, 0] * ((rhs(xi - hl + hl * t) * t) @ w)
    right = hr[:, 0] * ((rhs(xi + hr * t) * (1.0 - t)) @ w)
    return left + right


def load_entry(mesh: Mesh, i: int, rhs: Rhs) -> float:
    """(f, phi_i) for interior node ``i`` (1 <= i <= n)."""
    if not 1 <= i <= mesh.interior_count:
        raise IndexError(f"node index {i} outside 1..{mesh.interior_count}")
    return float(_hat_moments(mesh, np.array([i]), rhs)[0])


def load_vector(mesh: Mesh, rhs: Rhs) -> np.ndarray:
    return _hat_moments(mesh, np.arange(1, mesh.interior_count + 1), rhs)


def check_compatible(p: Problem, m: Mesh) -> None:
    if p.b > 0:
        raise InvalidParameterError("b > 0: pass the problem through reflect() first")
    lo, hi = p.domain
    tol = 1e-14 * (hi - lo)
    if abs(m.nodes[0] - lo) > tol or abs(m.nodes[-1] - hi) > tol:
        raise InvalidParameterError(f"mesh spans {m.domain}, problem domain is {p.domain}")


def assemble(p: Problem, m: Mesh, left_width_reaction: bool = False) -> TridiagonalSystem:
    """Galerkin system on ``m`` with boundary values moved to the load."""
    check_compatible(p, m)
    eps, b, c = p.epsilon, p.b, p.c
    hl, hr = m.widths[:-1], m.widths[1:]
    lower = -eps / hl + b / 2.0 + c * hl / 6.0
    diag = eps * (1.0 / hl + 1.0 / hr) + c * (hl + hr) / 3.0
    upper = -eps / hr - b / 2.0 + c * (hl if left_width_reaction else hr) / 6.0
    load = load_vector(m, p.rhs)
    if p.left_value:
        load[0] -= lower[0] * p.left_value
    if p.right_value:
        load[-1] -= upper[-1] * p.right_value
    return TridiagonalSystem(lower[1:].copy(), diag, upper[:-1].copy(), load,
                             float(lower[0]), float(upper[-1]))


def write_csv(sys: TridiagonalSystem, fh: IO[str]) -> None:
    """Columns ``i, sub, diag, super, load``; row 1 ``sub`` and row n ``super``
    are the boundary couplings."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["i", "sub", "diag", "super", "load"])
    sub = np.concatenate([[sys.left_coupling], sys.sub])
    sup = np.concatenate([sys.sup, [sys.right_coupling]])
    for k in range(sys.n):
        w.writerow([k + 1, f"{sub[k]:.17g}", f"{sys.diag[k]:.17g}", f"{sup[k]:.17g}",
                    f"{sys.load[k]:.17g}"])
