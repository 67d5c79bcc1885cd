"""Acceptance criteria, one test per criterion, each recorded as PASS/FAIL.

The REPORTED_* dictionaries hold the reference table values digit for digit.
"""
import math
import time

import numpy as np
import pytest

from sperturb import (
    Mesh,
    Polynomial,
    Problem,
    eps_uniform_mesh,
    green_column,
    predicted_intersections,
    shishkin,
    shishkin_theta,
    solve,
    uniform,
)
from sperturb.exceptions import LayerTooWideError
from sperturb.experiments import (
    TABLE_EPS,
    TABLE_N,
    _setup,
    isolation_coupling,
    table1,
    table2,
    table3,
    table4,
    verify_invariance,
    verify_isolation,
)
from test_linalg import cramer_last_column, random_system

# n -> (eps-uniform, Shishkin) per eps
REPORTED_TABLE1 = {
    1e-5: {4: (6.663e-3, 1.117e-2), 8: (2.054e-3, 1.567e-3), 16: (5.734e-4, 3.480e-4),
           32: (1.498e-4, 8.384e-5), 64: (3.637e-5, 1.948e-5), 128: (7.569e-6, 3.928e-6),
           256: (1.340e-6, 1.340e-6), 512: (3.102e-7, 6.738e-7)},
    1e-10: {4: (6.667e-3, 1.117e-2), 8: (2.058e-3, 1.569e-3), 16: (5.767e-4, 3.500e-4),
            32: (1.530e-4, 8.569e-5), 64: (3.941e-5, 2.115e-5), 128: (9.974e-6, 5.221e-6),
            256: (2.482e-6, 1.292e-6), 512: (5.919e-7, 3.208e-7)},
}
REPORTED_TABLE3 = {
    1e-5: {4: (1.665e-16, 1.517e-4), 8: (1.110e-16, 5.415e-5), 16: (2.220e-16, 2.161e-5),
           32: (2.220e-16, 7.391e-6), 64: (3.331e-16, 1.300e-6), 128: (4.441e-16, 1.159e-9),
           256: (2.459e-13, 2.948e-7), 512: (5.440e-15, 2.865e-7)},
    1e-10: {4: (1.110e-16, 4.980e-7), 8: (2.220e-16, 1.868e-7), 16: (3.331e-16, 8.451e-8),
            32: (3.331e-16, 4.054e-8), 64: (5.551e-16, 1.984e-8), 128: (5.551e-16, 5.551e-16),
            256: (6.661e-16, 9.795e-9), 512: (7.772e-16, 4.847e-9)},
}
# i -> (x, |y - u|, |y - u_I|)
REPORTED_TABLE2 = {
    2: (0.2499999996000000, 7.499999579718697e-11, 4.999999719812465e-11),
    3: (0.2500000004000000, 2.500008533523612e-11, 8.326672684688674e-17),
    4: (0.4999999992000000, 3.500000012035542e-10, 2.999999970665357e-10),
    5: (0.5000000008000000, 5.000011515932101e-11, 1.110223024625157e-16),
    6: (0.7499999988000000, 6.625580639685325e-09, 6.700580590379701e-09),
    7: (0.7500000012000000, 7.500006171667906e-11, 1.110223024625157e-16),
}
# case -> i -> (x, |y - u|); None where no Q_i is reported
REPORTED_TABLE4 = {
    "last": {2: (0.1714, 1.7347e-18), 3: (0.3158, 6.9389e-18), 4: (0.4588, 2.7756e-17),
             5: (0.6016, 0.0), 6: (0.7445, 0.0)},
    "interior": {2: (0.1714, 2.7756e-17), 3: (0.3158, 1.1102e-16), 4: None,
                 5: (0.6842, 1.7764e-15), 6: (0.8286, 4.4409e-16)},
}

# errors below this are rounding; order-of-magnitude comparison floors both sides here
ROUNDOFF_FLOOR = 1e-15
RUNTIME_LIMIT = 10.0


def within_factor(got, ref, factor):
    return ref / factor <= got <= ref * factor


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def by_eps_n(rep):
    return {(r[0], r[1]): (r[2], r[3]) for r in rep.rows}


def test_1a_table1_eps_uniform_column(criterion):
    rep, elapsed = timed(table1)
    got = by_eps_n(rep)
    worst = max(max(got[e, n][0] / ref[0], ref[0] / got[e, n][0])
                for e, rows in REPORTED_TABLE1.items() for n, ref in rows.items())
    ok = worst <= 1.5 and elapsed < RUNTIME_LIMIT
    criterion("1a table 1 eps-uniform column within 1.5x", ok, f"worst ratio {worst:.3f}, {elapsed:.2f}s")
    assert ok


def test_1b_table1_shishkin_column(criterion):
    got = by_eps_n(table1())
    ratios = {(e, n): got[e, n][1] / ref[1] for e, rows in REPORTED_TABLE1.items() for n, ref in rows.items()}
    bad = {k: round(r, 2) for k, r in ratios.items() if not 0.5 <= r <= 2.0}
    criterion("1b table 1 Shishkin column within 2x", not bad, f"outside: {bad}" if bad else "")
    assert not bad


def test_2a_table3_eps_uniform_column(criterion):
    rep, elapsed = timed(table3)
    got = by_eps_n(rep)
    bad = {k: v[0] for k, v in got.items() if not v[0] <= 1e-12}
    ok = not bad and elapsed < RUNTIME_LIMIT
    detail = f"{len(bad)} of {len(got)} above 1e-12 or missing; worst at {max(bad, key=lambda k: np.nan_to_num(bad[k], nan=np.inf))}" if bad else ""
    criterion("2a table 3 eps-uniform errors <= 1e-12", ok, f"{detail} {elapsed:.2f}s".strip())
    assert ok


def test_2b_table3_shishkin_column(criterion):
    got = by_eps_n(table3())
    ratios = {(e, n): got[e, n][1] / ref[1] for e, rows in REPORTED_TABLE3.items() for n, ref in rows.items()}
    bad = {k: r for k, r in ratios.items() if not 0.5 <= r <= 2.0}
    detail = f"{len(bad)} of {len(ratios)} outside" if bad else ""
    criterion("2b table 3 Shishkin column within 2x", not bad, detail)
    assert not bad


def test_3_table2(criterion):
    rep = table2()
    failures = []
    for i, x, e_exact, e_interp in rep.rows:
        ref = REPORTED_TABLE2[i]
        if not abs(x - ref[0]) <= 1e-8:
            failures.append(f"x(Q{i})")
        for got, want, name in ((e_exact, ref[1], "exact"), (e_interp, ref[2], "interp")):
            if not within_factor(max(got, ROUNDOFF_FLOOR), max(want, ROUNDOFF_FLOOR), 10.0):
                failures.append(f"{name}(Q{i})={got:.3g}")
    ok = not failures and [r[0] for r in rep.rows] == sorted(REPORTED_TABLE2)
    criterion("3 table 2 x to 1e-8, errors within 10x", ok, ", ".join(failures))
    assert ok


def test_4_table4(criterion):
    rep = table4()
    failures = []
    for case, i, x, e_exact, _ in rep.rows:
        ref = REPORTED_TABLE4[case][i]
        if ref is None:
            if not math.isnan(x):
                failures.append(f"{case} Q{i} should not exist")
            continue
        if not abs(x - ref[0]) <= 5e-5:
            failures.append(f"{case} x(Q{i})={x:.6f}")
        if not e_exact <= 1e-12:
            failures.append(f"{case} err(Q{i})={e_exact:.3g}")
    criterion("4 table 4 x to 4 decimals, errors <= 1e-12, no interior Q4", not failures, ", ".join(failures))
    assert not failures


@pytest.mark.parametrize("eps", TABLE_EPS)
def test_5_convergence_slope(criterion, eps):
    from sperturb.experiments import convergence_study

    slope = convergence_study("cde", eps, TABLE_N).metadata["slope"]
    ok = -2.3 <= slope <= -1.7
    criterion(f"5 convergence slope eps={eps:g}", ok, f"slope {slope:.3f}")
    assert ok


def _augmented_intervals(n):
    return {"last": n + 1, "first": 1, "interior": (n + 1) // 2 + 1}


def test_6_invariance(criterion):
    worst, compared = 0.0, {}
    for kind in ("cde", "rde", "green"):
        for eps in TABLE_EPS:
            for n in TABLE_N:
                for where, k in _augmented_intervals(n).items():
                    res = verify_invariance(kind, eps, n, trials=20, seed=n, augmented_interval=k)
                    worst = max(worst, res.deviation)
                    assert k not in res.compared
                    compared.setdefault((kind, where), []).append((eps, n, k, len(res.compared)))
    # a family that never compares anything must be one with no crossings at all
    vacuous = []
    for (kind, where), runs in compared.items():
        if sum(c for *_, c in runs) == 0:
            for eps, n, k, _ in runs:
                p, _, m = _setup(kind, eps, n, None, k)
                coarse = solve(p, m)
                if any(q.exists for q in predicted_intersections(coarse.system, coarse, k)):
                    vacuous.append((kind, where, eps, n))
    ok = worst <= 1e-9 and not vacuous
    total = sum(c for runs in compared.values() for *_, c in runs)
    criterion("6 intersection invariance <= 1e-9", ok, f"worst {worst:.2e} over {total} compared Q_i")
    assert ok


def test_7_isolation(criterion):
    worst_dev = worst_coupling = 0.0
    fitted = skipped = 0
    for kind in ("cde", "rde", "green"):
        for eps in TABLE_EPS:
            for n in TABLE_N:
                try:
                    dev = verify_isolation(kind, eps, n)
                except LayerTooWideError:
                    skipped += 1
                    continue
                fitted += 1
                worst_dev = max(worst_dev, dev)
                worst_coupling = max(worst_coupling, isolation_coupling(kind, eps, n))
    ok = worst_dev <= 1e-12 and worst_coupling <= 1e-13 and fitted > 0
    criterion("7 isolation <= 1e-12, coupling <= 1e-13", ok,
              f"deviation {worst_dev:.2e}, coupling {worst_coupling:.2e}, {fitted} fitted, {skipped} offset too wide")
    assert ok


def test_8_cramer_oracle(criterion):
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(100):
        sys = random_system(rng, int(rng.integers(2, 7)))
        ref = cramer_last_column(sys.to_dense())
        worst = max(worst, np.max(np.abs(green_column(sys) - ref)) / np.max(np.abs(ref)))
    ok = worst <= 1e-10
    criterion("8 Green column vs cofactor Cramer <= 1e-10", ok, f"worst {worst:.2e}")
    assert ok


def _affine_configurations():
    """Every (mesh, eps) pair the tables solve on, plus random meshes.

    Random meshes stop at eps = 1e-5: below that a central convection
    matrix on an arbitrary mesh can be numerically singular, and rounding
    of the data alone moves the solution by far more than 1e-12.
    """
    for eps in TABLE_EPS:
        for n in TABLE_N:
            yield f"uniform({n}) eps={eps:g}", uniform(n), eps
            yield f"shishkin({n}) eps={eps:g}", shishkin(n, shishkin_theta("cde", eps, n)), eps
            yield f"eps-uniform({n}) eps={eps:g}", eps_uniform_mesh(uniform(n), eps, -1.0, 0.0), eps
    rng = np.random.default_rng(9)
    for k in range(30):
        w = rng.uniform(0.2, 1.0, int(rng.integers(3, 200)))
        nodes = np.concatenate([[0.0], np.cumsum(w)])
        eps = (1.0, 1e-3, 1e-5)[k % 3]
        yield f"random({w.size}) eps={eps:g}", Mesh(nodes / nodes[-1]), eps


def test_9_affine_exactness(criterion):
    worst, where = 0.0, ""
    for name, m, eps in _affine_configurations():
        for b in (-1.0, -2.5):
            p = Problem(eps, b, 0.0, Polynomial((0.7 * b,)), left_value=0.4, right_value=0.4 - 0.7)
            err = float(np.max(np.abs(solve(p, m).values - (0.4 - 0.7 * m.nodes))))
            if err > worst:
                worst, where = err, name
    ok = worst <= 1e-12
    criterion("9 affine solutions reproduced <= 1e-12 (c = 0)", ok, f"worst {worst:.2e} on {where}")
    assert ok
