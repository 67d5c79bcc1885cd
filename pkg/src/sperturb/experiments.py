"""Verification runs and table reproduction.

Every public function returns plain numbers or an :class:`ExperimentReport`
whose rows can be written as CSV.  Randomised runs draw from a Philox
generator keyed by a 64-bit seed, so a run is reproduced bit for bit by its
seed.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import IO, Sequence

import numpy as np

from . import fem
from .exceptions import InvalidParameterError, LayerTooWideError
from .intersect import geometric_intersections, predicted_intersections
from .mesh import Mesh, add_points, eps_uniform_mesh, shishkin, shishkin_theta, uniform
from .problem import ExactSolution, PointMass, Polynomial, Problem, example

TABLE_N = (4, 8, 16, 32, 64, 128, 256, 512)
TABLE_EPS = (1e-5, 1e-10)
BELOW_PRECISION = 1e-13
MAX_ADDED = 10


@dataclass
class ExperimentReport:
    """Rows of one table plus run metadata (the timestamp never reaches CSV)."""

    name: str
    columns: tuple[str, ...]
    rows: list[tuple]
    metadata: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.rows:
            raise InvalidParameterError(f"report {self.name!r} has no rows")
        self.metadata.setdefault("timestamp", datetime.now(timezone.utc).isoformat())

    def column(self, name: str) -> list:
        k = self.columns.index(name)
        return [r[k] for r in self.rows]

    def write_csv(self, fh: IO[str], footer: Sequence | None = None) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([format_value(v) for v in r])
        if footer is not None:
            w.writerow([format_value(v) for v in footer])


def format_value(v) -> str:
    """17 significant digits for floats, empty field for NaN."""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "" if math.isnan(v) else f"{float(v):.17g}"
    return str(v)


@dataclass(frozen=True)
class Augmentation:
    """Points added to coarse interval ``(x_{k-1}, x_k)`` at fractional positions.

    ``interval=None`` means the last interval, k = n + 1.
    """

    interval: int | None = None
    positions: tuple[float, ...] = (0.5,)

    def __post_init__(self):
        if not self.positions or any(not 0.0 < t < 1.0 for t in self.positions):
            raise InvalidParameterError("positions must lie strictly inside (0, 1)")

    def index(self, m: Mesh) -> int:
        n = m.interior_count
        k = n + 1 if self.interval is None else self.interval
        if not 1 <= k <= n + 1:
            raise InvalidParameterError(f"interval {k} outside 1..{n + 1}")
        return k

    def points(self, m: Mesh) -> list[float]:
        k = self.index(m)
        lo, hi = m.nodes[k - 1], m.nodes[k]
        return [float(lo + t * (hi - lo)) for t in self.positions]


def _setup(kind: str, epsilon: float, n: int, alpha: float | None, k: int | None = None):
    """Problem, exact solution and uniform coarse mesh.

    For the Green example without ``alpha`` the mass goes to the middle of the
    interval ``k`` (default: the last one).
    """
    m = uniform(n)
    if kind == "green" and alpha is None:
        k = n + 1 if k is None else k
        alpha = float((m.nodes[k - 1] + m.nodes[k]) / 2.0)
    p, ex = example(kind, epsilon, alpha)
    return p, ex, m


def eps_uniform_solution(kind: str, epsilon: float, n: int, alpha: float | None = None):
    """FEM solution on the uniform mesh plus the isolation node, and the exact solution."""
    p, ex, m = _setup(kind, epsilon, n, alpha)
    hat = eps_uniform_mesh(m, p.epsilon, p.b, p.c)
    return fem.solve(p, hat), ex


def eps_uniform_error(kind: str, epsilon: float, n: int, alpha: float | None = None) -> float:
    """``max_{1<=i<=n} |u(x_i) - u_hat_i|``, the error on ``[0, x_n]``."""
    s, ex = eps_uniform_solution(kind, epsilon, n, alpha)
    return fem.max_node_error(s, fem.interpolant(ex, s.mesh), upto=n)


def shishkin_error(kind: str, epsilon: float, n: int, alpha: float | None = None,
                   at: str = "coarse") -> float:
    """Error of the Shishkin-mesh solution over ``[0, x_n]``.

    ``at="coarse"`` evaluates the piecewise linear solution at the nodes
    ``x_i = i / (n + 1)``, i = 1..n, of the uniform mesh used by the isolated
    solution.  ``at="own"`` uses the first n interior Shishkin nodes instead
    (those up to ``1 - theta``).
    """
    p, ex, base = _setup(kind, epsilon, n, alpha)
    m = shishkin(n, shishkin_theta(kind, p.epsilon, n, b=p.b, c=p.c))
    s = fem.solve(p, m)
    if at == "own":
        return fem.max_node_error(s, fem.interpolant(ex, m), upto=n)
    if at != "coarse":
        raise InvalidParameterError(f"unknown evaluation set {at!r}")
    x = base.nodes[1:-1]
    return float(np.max(np.abs(s(x) - ex(x))))


def isolation_coupling(kind: str, epsilon: float, n: int, alpha: float | None = None) -> float:
    """``|a_{n, s_hat}|`` relative to the largest entry of row n."""
    s, _ = eps_uniform_solution(kind, epsilon, n, alpha)
    sys = s.system
    row = (abs(sys.sub[n - 2]), abs(sys.diag[n - 1]), abs(sys.sup[n - 1]))
    return row[2] / max(row)


def verify_isolation(kind: str, epsilon: float, n: int, alpha: float | None = None) -> float:
    """Compare the isolated solution with the solve cut off at ``s_hat``.

    The second solve uses the mesh ``x_0 .. x_n, s_hat`` and the exact value
    ``u(s_hat)`` as right boundary datum.  Returns ``max_{1<=i<=n} |u_hat_i - w_i|``.
    """
    p, ex, m = _setup(kind, epsilon, n, alpha)
    hat = eps_uniform_mesh(m, p.epsilon, p.b, p.c)
    u_hat = fem.solve(p, hat)
    s_hat = float(hat.nodes[n + 1])
    rhs = p.rhs
    if isinstance(rhs, PointMass) and rhs.location >= s_hat:
        rhs = Polynomial((0.0,))
    aux = Problem(p.epsilon, p.b, p.c, rhs, left_value=p.left_value,
                  right_value=float(ex(s_hat)), domain=(p.domain[0], s_hat))
    w = fem.solve(aux, hat.truncated(n + 1))
    return float(np.max(np.abs(u_hat.values[1: n + 1] - w.values[1: n + 1])))


@dataclass(frozen=True)
class InvarianceResult:
    """Largest spread of the Q_i over all trials, with the intervals it covers.

    x spreads are relative to the domain length, y spreads to ``max |u^n|``.
    """

    deviation: float
    compared: tuple[int, ...]
    excluded: tuple[int, ...]
    trials: int


def random_augmentation(rng: np.random.Generator, m: Mesh, k: int) -> Mesh:
    """``m`` with 1..10 uniform random points inside interval k."""
    lo, hi = m.nodes[k - 1], m.nodes[k]
    count = int(rng.integers(1, MAX_ADDED + 1))
    while True:
        pts = rng.uniform(lo, hi, count)
        try:
            return add_points(m, pts)
        except InvalidParameterError:
            continue  # a draw landed on a node; redraw


def verify_invariance(kind: str, epsilon: float, n: int, trials: int = 20, seed: int = 0,
                      augmented_interval: int | None = None, alpha: float | None = None,
                      resolution: float = 1e-9) -> InvarianceResult:
    """Spread of the Q_i over ``trials`` random augmentations of one interval.

    An interval is compared when every trial finds a crossing there whose
    rounding uncertainty is at most ``resolution``.  Where the two solutions
    differ only at roundoff level (the reaction example away from its layer)
    the crossing position is noise and is excluded.  The augmented interval
    itself is never compared.
    """
    if int(trials) != trials or trials < 2:
        raise InvalidParameterError("need at least two trials to compare")
    k = n + 1 if augmented_interval is None else int(augmented_interval)
    if not 1 <= k <= n + 1:
        raise InvalidParameterError(f"interval {k} outside 1..{n + 1}")
    p, _, m = _setup(kind, epsilon, n, alpha, k)
    coarse = fem.solve(p, m)
    rng = np.random.Generator(np.random.Philox(int(seed) & 0xFFFFFFFFFFFFFFFF))
    runs = []
    for _ in range(int(trials)):
        fine = fem.solve(p, random_augmentation(rng, m, k))
        runs.append(geometric_intersections(coarse, fine))
    indices = [q.interval_index for q in runs[0]]
    ok = [all(run[j].exists and run[j].uncertainty <= resolution for run in runs)
          for j in range(len(indices))]
    y_scale = float(np.max(np.abs(coarse.values))) or 1.0
    x_scale = m.domain[1] - m.domain[0]
    dev = 0.0
    for j, good in enumerate(ok):
        if good:
            xs = np.array([run[j].x for run in runs])
            ys = np.array([run[j].y for run in runs])
            dev = max(dev, np.ptp(xs) / x_scale, np.ptp(ys) / y_scale)
    return InvarianceResult(
        float(dev),
        tuple(i for i, good in zip(indices, ok) if good),
        tuple(i for i, good in zip(indices, ok) if not good),
        int(trials),
    )


def table_shishkin_comparison(kind: str, epsilon: float, n_list: Sequence[int],
                              alpha: float | None = None) -> ExperimentReport:
    """Rows ``(eps, n, err_eps_uniform, err_shishkin)``.

    When the isolation offset does not fit in the last element the
    ``err_eps_uniform`` entry is NaN and a note records it.
    """
    if not len(n_list):
        raise InvalidParameterError("n_list is empty")
    rows, notes = [], []
    for n in n_list:
        try:
            e_hat = eps_uniform_error(kind, epsilon, n, alpha)
        except LayerTooWideError as exc:
            e_hat = float("nan")
            notes.append(f"eps={epsilon:g} n={n}: {exc}")
        rows.append((epsilon, int(n), e_hat, shishkin_error(kind, epsilon, n, alpha)))
    return ExperimentReport(f"shishkin-{kind}", ("eps", "n", "err_eps_uniform", "err_shishkin"),
                            rows, {"kind": kind, "eps": epsilon, "alpha": alpha}, notes)


def table_qi_accuracy(kind: str, epsilon: float, n: int,
                      augmentation: Augmentation = Augmentation(),
                      alpha: float | None = None) -> ExperimentReport:
    """Rows ``(i, x_q, err_vs_exact, err_vs_interp)`` for i = 2..n.

    Intervals without a crossing keep their row with NaN entries.  The
    largest disagreement between the geometric and the predicted points is
    stored as ``metadata["predicted_gap"]``.
    """
    p, ex, m = _setup(kind, epsilon, n, alpha, augmentation.index(uniform(n)))
    coarse = fem.solve(p, m)
    fine = fem.solve(p, add_points(m, augmentation.points(m)))
    geo = geometric_intersections(coarse, fine)
    pred = predicted_intersections(coarse.system, coarse, augmentation.index(m))
    u_i = fem.interpolant(ex, m)
    rows, gap = [], 0.0
    for q, r in zip(geo, pred):
        if q.exists != r.exists:
            gap = math.inf
        elif q.exists:
            gap = max(gap, abs(q.x - r.x))
        if q.exists:
            rows.append((q.interval_index, q.x, abs(q.y - float(ex(q.x))), abs(q.y - float(u_i(q.x)))))
        else:
            rows.append((q.interval_index, float("nan"), float("nan"), float("nan")))
    meta = {"kind": kind, "eps": epsilon, "n": n, "alpha": p.rhs.location if kind == "green" else None,
            "augmented_interval": augmentation.index(m), "predicted_gap": gap}
    return ExperimentReport(f"qi-{kind}", ("i", "x_q", "err_vs_exact", "err_vs_interp"), rows, meta)


def fit_slope(n_list: Sequence[int], errors: Sequence[float]) -> float:
    """Least-squares slope of ``log(error)`` against ``log(n)``."""
    return float(np.polyfit(np.log(np.asarray(n_list, float)), np.log(np.asarray(errors, float)), 1)[0])


def convergence_study(kind: str, epsilon: float, n_list: Sequence[int],
                      alpha: float | None = None) -> ExperimentReport:
    """Errors of the isolated solution on ``[0, x_n]`` and their log-log slope.

    ``metadata["slope"]`` is NaN and ``metadata["below_precision"]`` is True
    when every error is under 1e-13, where a fit would only see rounding.
    """
    ns = [int(n) for n in n_list]
    if len(ns) < 4 or max(ns) < 4 * min(ns):
        raise InvalidParameterError("need at least 4 sizes spanning two octaves")
    errors = [eps_uniform_error(kind, epsilon, n, alpha) for n in ns]
    below = all(e < BELOW_PRECISION for e in errors)
    slope = float("nan") if below else fit_slope(ns, errors)
    return ExperimentReport(f"convergence-{kind}", ("n", "error", "fitted_slope"),
                            [(n, e, float("nan")) for n, e in zip(ns, errors)],
                            {"kind": kind, "eps": epsilon, "slope": slope, "below_precision": below})


def _stack(name: str, reports: list[ExperimentReport]) -> ExperimentReport:
    rows = [r for rep in reports for r in rep.rows]
    notes = [s for rep in reports for s in rep.notes]
    return ExperimentReport(name, reports[0].columns, rows, {"eps": [rep.metadata["eps"] for rep in reports]}, notes)


def table1(eps_list: Sequence[float] = TABLE_EPS, n_list: Sequence[int] = TABLE_N) -> ExperimentReport:
    """Convection-diffusion: isolated mesh against Shishkin mesh."""
    return _stack("table1", [table_shishkin_comparison("cde", e, n_list) for e in eps_list])


def table2(epsilon: float = 1e-10) -> ExperimentReport:
    """Convection-diffusion Q_i: 8 uniform intervals, one point in the middle of the last."""
    rep = table_qi_accuracy("cde", epsilon, 7)
    rep.name = "table2"
    return rep


def table3(eps_list: Sequence[float] = TABLE_EPS, n_list: Sequence[int] = TABLE_N) -> ExperimentReport:
    """Reaction-diffusion: isolated mesh against Shishkin mesh."""
    return _stack("table3", [table_shishkin_comparison("rde", e, n_list) for e in eps_list])


def table4(epsilon: float = 1e-5) -> ExperimentReport:
    """Green function Q_i on 7 intervals for two placements of the mass.

    Case ``last``: mass and added point in the middle of the last interval.
    Case ``interior``: both in the middle of ``(x_3, x_4)``.
    """
    n = 6
    reports = {
        "last": table_qi_accuracy("green", epsilon, n, Augmentation(None, (0.5,))),
        "interior": table_qi_accuracy("green", epsilon, n, Augmentation(4, (0.5,))),
    }
    rows = [(case,) + r for case, rep in reports.items() for r in rep.rows]
    meta = {"eps": epsilon, "alpha": {c: r.metadata["alpha"] for c, r in reports.items()},
            "predicted_gap": max(r.metadata["predicted_gap"] for r in reports.values())}
    return ExperimentReport("table4", ("case", "i", "x_q", "err_vs_exact", "err_vs_interp"), rows, meta)


def exact_for(kind: str, epsilon: float, alpha: float | None = None) -> ExactSolution:
    return example(kind, epsilon, alpha)[1]
