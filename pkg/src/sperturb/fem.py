"""End-to-end solve, piecewise linear evaluation and nodal error norms."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import IO

import numpy as np

from .assembly import TridiagonalSystem, assemble
from .exceptions import DomainError, InvalidParameterError, SingularMatrixError
from .linalg import residual_ok, solve_tridiagonal
from .mesh import Mesh
from .problem import ExactSolution, Problem


@dataclass(frozen=True, eq=False)
class FemSolution:
    """Nodal values on every node of ``mesh``, boundary values included."""

    mesh: Mesh
    values: np.ndarray
    system: TridiagonalSystem | None = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != self.mesh.nodes.shape:
            raise InvalidParameterError("need one value per mesh node")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def interior(self) -> np.ndarray:
        return self.values[1:-1]

    def __call__(self, x):
        return np.interp(x, self.mesh.nodes, self.values)


def solve(p: Problem, m: Mesh, left_width_reaction: bool = False) -> FemSolution:
    sys = assemble(p, m, left_width_reaction=left_width_reaction)
    u = solve_tridiagonal(sys)
    if not residual_ok(sys, u):
        raise SingularMatrixError("residual check failed; system is too ill-conditioned")
    values = np.concatenate([[p.left_value], u, [p.right_value]])
    return FemSolution(m, values, sys)


def evaluate(s: FemSolution, x):
    xa = np.asarray(x, dtype=float)
    lo, hi = s.mesh.domain
    if np.any(~np.isfinite(xa)) or np.any(xa < lo) or np.any(xa > hi):
        raise DomainError(f"evaluation point outside [{lo}, {hi}]: {x!r}")
    out = s(xa)
    return float(out) if np.ndim(out) == 0 else out


def interpolant(sol: ExactSolution, m: Mesh) -> FemSolution:
    """Piecewise linear interpolant of ``sol`` on ``m``."""
    return FemSolution(m, sol(m.nodes))


def max_node_error(a: FemSolution, b: FemSolution, upto: int | None = None) -> float:
    """``max |a_i - b_i|`` over nodes ``x_1 .. x_upto`` (default ``x_n``).

    Both arguments are piecewise linear on the same mesh, so this equals the
    sup-norm of ``a - b`` on ``[x_0, x_upto]`` once boundary data agree.
    """
    if a.mesh is not b.mesh and a.mesh != b.mesh:
        raise InvalidParameterError("solutions live on different meshes")
    upto = a.mesh.interior_count if upto is None else upto
    if not 1 <= upto <= a.mesh.interior_count + 1:
        raise InvalidParameterError(f"upto={upto} outside 1..{a.mesh.interior_count + 1}")
    return float(np.max(np.abs(a.values[1: upto + 1] - b.values[1: upto + 1])))


def write_csv(s: FemSolution, fh: IO[str], exact: ExactSolution | None = None) -> None:
    """Columns ``x, value`` (plus ``exact, error`` when a solution is given)."""
    w = csv.writer(fh, lineterminator="\n")
    if exact is None:
        w.writerow(["x", "value"])
        for x, v in zip(s.mesh.nodes, s.values):
            w.writerow([f"{x:.17g}", f"{v:.17g}"])
        return
    ue = exact(s.mesh.nodes)
    w.writerow(["x", "value", "exact", "error"])
    for x, v, e in zip(s.mesh.nodes, s.values, ue):
        w.writerow([f"{x:.17g}", f"{v:.17g}", f"{e:.17g}", f"{abs(v - e):.17g}"])
