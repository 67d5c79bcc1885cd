"""Fixed crossing points Q_i of FEM solutions on nested meshes.

Two routes compute the same points:

* :func:`geometric_intersections` intersects the two piecewise linear graphs
  interval by interval;
* :func:`predicted_intersections` needs only the coarse system: the nodal
  difference of the two solutions is a multiple of a column of ``A^{-1}``,
  so its sign pattern and the ratios r_i = |g_{i-1} / g_i| fix every Q_i
  without solving on the refined mesh.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import IO, Iterable

import numpy as np

from .assembly import TridiagonalSystem
from .exceptions import InvalidParameterError
from .fem import FemSolution
from .exceptions import SperturbError
from .linalg import RATIO_FLOOR, solve_correction, unit_response
from .problem import ExactSolution

# Nodal differences below this multiple of their rounding level are noise.
NOISE_FACTOR = 64.0
# Stored refined values must match the correction route this closely to use it.
CONSISTENCY_TOL = 1e-8

STATUSES = ("crossing", "no-crossing", "coincident", "augmented", "unresolved", "degenerate")


@dataclass(frozen=True)
class Intersection:
    """Crossing in the coarse interval ``(x_{i-1}, x_i)``.

    ``status`` is ``"crossing"`` exactly when ``exists``.  The other values
    say why there is no point: no sign change, identical segments, the
    interval holds added nodes, the difference is lost in rounding, or a
    Green column entry vanished.

    ``uncertainty`` bounds how far rounding in the nodal values can move
    ``x``; it is zero for predicted points, whose ratios come from one
    solve and carry no cancellation.
    """

    interval_index: int
    exists: bool
    x: float = float("nan")
    y: float = float("nan")
    ratio: float = float("nan")
    status: str = "crossing"
    uncertainty: float = 0.0


def _none(i, status, ratio=float("nan")):
    return Intersection(i, False, ratio=float(ratio), status=status)


def _crossing(i, t, x0, x1, u0, u1, ratio, uncertainty=0.0):
    return Intersection(i, True, float(x0 + t * (x1 - x0)), float(u0 + t * (u1 - u0)),
                        float(ratio), "crossing", float(uncertainty))


def _node_map(coarse: np.ndarray, fine: np.ndarray) -> np.ndarray:
    tol = 1e-14 * (coarse[-1] - coarse[0])
    idx = np.clip(np.searchsorted(fine, coarse), 0, fine.size - 1)
    lower = np.clip(idx - 1, 0, fine.size - 1)
    idx = np.where(np.abs(fine[lower] - coarse) < np.abs(fine[idx] - coarse), lower, idx)
    if np.any(np.abs(fine[idx] - coarse) > tol):
        raise InvalidParameterError("meshes are not nested: a coarse node is missing")
    return idx


def augmented_intervals(coarse: FemSolution, fine: FemSolution) -> list[int]:
    """1-based indices k of coarse intervals ``(x_{k-1}, x_k)`` holding added nodes."""
    idx = _node_map(coarse.mesh.nodes, fine.mesh.nodes)
    return [k + 1 for k in np.flatnonzero(np.diff(idx) > 1)]


def _correction(s: FemSolution, v: np.ndarray):
    """Interior ``u - v`` for the exact solution ``u`` of the attached system.

    Returns ``(w, bound)`` or None when ``s`` has no usable system or its
    stored values are not a solution of it.
    """
    sys = s.system
    if sys is None or sys.n != s.mesh.interior_count:
        return None
    try:
        w, last = solve_correction(sys, v)
    except SperturbError:
        return None
    if not np.max(np.abs(v + w - s.interior)) <= CONSISTENCY_TOL * max(np.max(np.abs(s.values)), 1.0):
        return None
    return w, np.finfo(float).eps * float(np.max(np.abs(w))) + last


def _differences(a: FemSolution, b: FemSolution, idx: np.ndarray) -> tuple[np.ndarray, float]:
    """``a - b`` at the coarse nodes and the level below which it is noise.

    When both solutions carry their systems, the difference is taken
    between the exact solutions of those systems: ``b`` by one correction
    solve against ``a`` interpolated onto the refined mesh, ``a`` by the
    correction to its own rounded values.  This avoids subtracting two
    rounded solutions that agree to many digits.  Otherwise the stored
    values are subtracted.
    """
    plain = a.values - b.values[idx]
    floor = NOISE_FACTOR * np.finfo(float).eps * max(np.max(np.abs(a.values)), np.max(np.abs(b.values)))
    if not (a.values[0] == b.values[0] and a.values[-1] == b.values[-1]):
        return plain, floor
    v = a(b.mesh.nodes)
    v[idx] = a.values
    cb = _correction(b, v[1:-1])
    ca = _correction(a, a.interior) if cb is not None else None
    if ca is None:
        return plain, floor
    wa = np.concatenate([[0.0], ca[0], [0.0]])
    wb = np.concatenate([[0.0], cb[0], [0.0]])
    return wa - wb[idx], NOISE_FACTOR * (ca[1] + cb[1])


def geometric_intersections(a: FemSolution, b: FemSolution) -> list[Intersection]:
    """Crossings of ``a`` (coarse mesh) and ``b`` (refined mesh) for i = 2..n."""
    if not (np.isclose(a.mesh.nodes[0], b.mesh.nodes[0]) and np.isclose(a.mesh.nodes[-1], b.mesh.nodes[-1])):
        raise InvalidParameterError("meshes do not span the same interval")
    idx = _node_map(a.mesh.nodes, b.mesh.nodes)
    bumped = np.diff(idx) > 1
    d, floor = _differences(a, b, idx)
    x, u = a.mesh.nodes, a.values
    out = []
    for i in range(2, a.mesh.interior_count + 1):
        d0, d1 = d[i - 1], d[i]
        if bumped[i - 1]:
            out.append(_none(i, "augmented"))
        elif d0 == 0.0 and d1 == 0.0:
            out.append(_none(i, "coincident"))
        elif min(abs(d0), abs(d1)) <= floor:
            out.append(_none(i, "unresolved"))
        else:
            ratio = abs(d0 / d1)
            if (d0 > 0) == (d1 > 0):
                out.append(_none(i, "no-crossing", ratio))
            else:
                t = abs(d0) / (abs(d0) + abs(d1))
                spread = (x[i] - x[i - 1]) * floor / (abs(d0) + abs(d1))
                out.append(_crossing(i, t, x[i - 1], x[i], u[i - 1], u[i], ratio, spread))
    return out


def predicted_intersections(sys: TridiagonalSystem, solution: FemSolution,
                            augmented_interval: int | None = None) -> list[Intersection]:
    """Crossings predicted from the coarse system alone.

    ``augmented_interval`` is the 1-based index k of the coarse interval
    ``(x_{k-1}, x_k)`` that receives the extra nodes; the default k = n + 1
    is the last interval.  Intervals left of k use column ``k-1`` of
    ``A^{-1}``, intervals right of it use column ``k``.
    """
    n = sys.n
    if solution.mesh.interior_count != n:
        raise InvalidParameterError("solution and system sizes differ")
    k = n + 1 if augmented_interval is None else int(augmented_interval)
    if not 1 <= k <= n + 1:
        raise InvalidParameterError(f"augmented interval {k} outside 1..{n + 1}")
    g_left = unit_response(sys, k - 1) if k >= 2 else None
    g_right = unit_response(sys, k) if k <= n else None
    x, u = solution.mesh.nodes, solution.values
    out = []
    for i in range(2, n + 1):
        if i == k:
            out.append(_none(i, "augmented"))
            continue
        g = g_left if i < k else g_right
        g0, g1 = g[i - 2], g[i - 1]
        if abs(g0) <= RATIO_FLOOR or abs(g1) <= RATIO_FLOOR:
            out.append(_none(i, "degenerate"))
            continue
        ratio = abs(g0 / g1)
        if (g0 > 0) == (g1 > 0):
            out.append(_none(i, "no-crossing", ratio))
        else:
            out.append(_crossing(i, ratio / (ratio + 1.0), x[i - 1], x[i], u[i - 1], u[i], ratio))
    return out


def write_csv(items: Iterable[Intersection], fh: IO[str], exact: ExactSolution | None = None) -> None:
    """Columns ``i, exists, x, y, r, err_vs_exact`` (empty fields when undefined)."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["i", "exists", "x", "y", "r", "err_vs_exact"])

    def fmt(v):
        return "" if not np.isfinite(v) else f"{v:.17g}"

    for q in items:
        err = abs(q.y - float(exact(q.x))) if (exact is not None and q.exists) else float("nan")
        w.writerow([q.interval_index, int(q.exists), fmt(q.x), fmt(q.y), fmt(q.ratio), fmt(err)])
