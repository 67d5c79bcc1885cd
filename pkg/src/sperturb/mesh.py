"""Grids: uniform, augmented, Shishkin, and the single-node layer isolation grid.

A :class:`Mesh` stores its node coordinates *and* its element widths.  Widths
are normally ``np.diff(nodes)``, but constructors that know a width exactly
(the isolation offset, Shishkin layer spacing) keep that value instead of the
rounded node difference.  Near x = 1 doubles are spaced 2.2e-16 apart, so an
offset of 2e-10 recovered from node coordinates is only good to ~1e-6
relative, which is enough to spoil the vanishing coupling entry the
isolation node exists for.
"""
from __future__ import annotations

import csv
import math
from typing import IO, Iterable

import numpy as np

from .exceptions import InvalidParameterError, LayerTooWideError

DUPLICATE_TOL = 1e-14


class Mesh:
    """Strictly increasing nodes ``x_0 < ... < x_{n+1}`` with n >= 2."""

    __slots__ = ("nodes", "widths")

    def __init__(self, nodes, widths=None):
        nodes = np.array(nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 4:
            raise InvalidParameterError("a mesh needs at least two interior nodes")
        if not np.all(np.isfinite(nodes)):
            raise InvalidParameterError("mesh nodes must be finite")
        diffs = np.diff(nodes)
        if np.any(diffs <= 0.0):
            raise InvalidParameterError("mesh nodes must be strictly increasing")
        if widths is None:
            widths = diffs
        else:
            widths = np.array(widths, dtype=float)
            if widths.shape != diffs.shape:
                raise InvalidParameterError("need exactly one width per element")
            if np.any(widths <= 0.0):
                raise InvalidParameterError("element widths must be positive")
            span = nodes[-1] - nodes[0]
            if np.any(np.abs(widths - diffs) > 64 * np.finfo(float).eps * max(span, 1.0)):
                raise InvalidParameterError("widths disagree with node spacing")
        nodes.flags.writeable = False
        widths.flags.writeable = False
        self.nodes = nodes
        self.widths = widths

    @classmethod
    def from_nodes(cls, nodes) -> "Mesh":
        return cls(np.sort(np.asarray(nodes, dtype=float)))

    @property
    def interior_count(self) -> int:
        return self.nodes.size - 2

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.nodes[0]), float(self.nodes[-1])

    def __len__(self):
        return self.nodes.size

    def __eq__(self, other):
        if not isinstance(other, Mesh):
            return NotImplemented
        return np.array_equal(self.nodes, other.nodes) and np.array_equal(self.widths, other.widths)

    __hash__ = None

    def __repr__(self):
        return f"Mesh(n={self.interior_count}, domain={self.domain})"

    def truncated(self, last: int) -> "Mesh":
        """Sub-mesh made of nodes ``x_0 .. x_last``."""
        return Mesh(self.nodes[: last + 1], self.widths[:last])

    def locate(self, x) -> np.ndarray:
        """Index k of the element ``[x_k, x_{k+1}]`` containing each point."""
        k = np.searchsorted(self.nodes, np.asarray(x, dtype=float), side="right") - 1
        return np.clip(k, 0, self.nodes.size - 2)


def uniform(n: int, domain: tuple[float, float] = (0.0, 1.0)) -> Mesh:
    """``n`` interior nodes equally spaced, i.e. ``n + 1`` elements."""
    if int(n) != n or n < 2:
        raise InvalidParameterError(f"need n >= 2 interior nodes, got {n!r}")
    n = int(n)
    lo, hi = domain
    h = (hi - lo) / (n + 1)
    nodes = lo + (hi - lo) * np.arange(n + 2) / (n + 1)
    nodes[-1] = hi
    return Mesh(nodes, np.full(n + 1, h))


def add_points(m: Mesh, points: Iterable[float]) -> Mesh:
    """Insert ``points`` into ``m``.  Elements left intact keep their widths."""
    pts = np.sort(np.asarray(list(points), dtype=float))
    if pts.size == 0:
        return m
    lo, hi = m.domain
    tol = DUPLICATE_TOL * (hi - lo)
    if np.any(pts <= lo) or np.any(pts >= hi):
        raise InvalidParameterError("added points must lie strictly inside the domain")
    k = m.locate(pts)
    near = np.minimum(np.abs(pts - m.nodes[k]), np.abs(m.nodes[k + 1] - pts))
    if np.any(near <= tol) or np.any(np.diff(pts) <= tol):
        raise InvalidParameterError("added point duplicates an existing node")

    nodes = np.concatenate([m.nodes, pts])
    original = np.concatenate([np.arange(m.nodes.size), np.full(pts.size, -1)])
    order = np.argsort(nodes, kind="stable")
    nodes, original = nodes[order], original[order]
    widths = np.diff(nodes)
    left, right = original[:-1], original[1:]
    kept = (left >= 0) & (right == left + 1)
    widths[kept] = m.widths[left[kept]]
    return Mesh(nodes, widths)


def shishkin(n: int, theta: float, domain: tuple[float, float] = (0.0, 1.0)) -> Mesh:
    """Piecewise uniform mesh: ``n`` elements on each side of ``hi - theta``."""
    if int(n) != n or n < 2:
        raise InvalidParameterError(f"need n >= 2, got {n!r}")
    n = int(n)
    lo, hi = domain
    if not 0.0 < theta < hi - lo:
        raise InvalidParameterError(f"theta must lie in (0, {hi - lo}), got {theta!r}")
    tau = hi - theta
    coarse = lo + (tau - lo) * np.arange(n + 1) / n
    fine = tau + theta * np.arange(1, n + 1) / n
    coarse[-1] = tau
    fine[-1] = hi
    widths = np.concatenate([np.full(n, (tau - lo) / n), np.full(n, theta / n)])
    return Mesh(np.concatenate([coarse, fine]), widths)


def shishkin_theta(kind: str, epsilon: float, n: int, *, b: float | None = None,
                   c: float | None = None) -> float:
    """Transition parameter of the Shishkin mesh for an example kind.

    ``epsilon`` is the problem's diffusion coefficient (eps^2 for the Green
    example).  Convection: ``min(1/2, 2 eps ln(2n) / |b|)``; reaction:
    ``min(1/2, sqrt(eps) ln(2n) / sqrt(c))``.
    """
    if int(n) != n or n < 2:
        raise InvalidParameterError(f"need n >= 2, got {n!r}")
    if not epsilon > 0:
        raise InvalidParameterError(f"epsilon must be positive, got {epsilon!r}")
    if kind == "cde":
        b = -1.0 if b is None else b
        if b == 0:
            raise InvalidParameterError("convection Shishkin parameter needs b != 0")
        return min(0.5, 2.0 * epsilon * math.log(2 * n) / abs(b))
    if kind in ("rde", "green"):
        c = 1.0 if c is None else c
        if not c > 0:
            raise InvalidParameterError("reaction Shishkin parameter needs c > 0")
        return min(0.5, math.sqrt(epsilon) * math.log(2 * n) / math.sqrt(c))
    raise InvalidParameterError(f"unknown example kind {kind!r}")


def eps_uniform_offset(epsilon: float, b: float, c: float) -> float:
    """Width h > 0 of ``[x_n, s_hat]`` that zeroes the coupling a_{n,s_hat}.

    Positive root of ``c h^2 - 3 b h - 6 eps = 0``, written with the conjugate
    so that no cancellation occurs for b <= 0.  Reduces to ``-2 eps / b`` at
    c = 0.
    """
    if not epsilon > 0:
        raise InvalidParameterError(f"epsilon must be positive, got {epsilon!r}")
    if b > 0 or c < 0:
        raise InvalidParameterError("expected b <= 0 and c >= 0")
    if b == 0 and c == 0:
        raise InvalidParameterError("b and c must not both vanish")
    denom = math.sqrt(9.0 * b * b + 24.0 * epsilon * c) - 3.0 * b
    h = 12.0 * epsilon / denom if denom > 0.0 else math.inf
    if not math.isfinite(h):
        raise InvalidParameterError("offset is not representable; b and c are too close to zero")
    return h


def eps_uniform_mesh(base: Mesh, epsilon: float, b: float, c: float) -> Mesh:
    """``base`` plus the isolation node ``x_n + eps_uniform_offset(...)``."""
    h = eps_uniform_offset(epsilon, b, c)
    n = base.interior_count
    last = base.widths[-1]
    if not h < last:
        raise LayerTooWideError(
            f"isolation offset {h:.6g} does not fit in the last element (width {last:.6g})"
        )
    s_hat = base.nodes[n] + h
    if not s_hat < base.nodes[-1]:
        raise LayerTooWideError("isolation node coincides with the right endpoint")
    nodes = np.concatenate([base.nodes[: n + 1], [s_hat], base.nodes[n + 1:]])
    widths = np.concatenate([base.widths[:-1], [h, last - h]])
    return Mesh(nodes, widths)


def write_csv(m: Mesh, fh: IO[str]) -> None:
    """Single column ``x`` of node coordinates."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["x"])
    for x in m.nodes:
        w.writerow([f"{x:.17g}"])
