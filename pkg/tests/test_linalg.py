import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sperturb import (
    DegenerateRatioError,
    SingularMatrixError,
    TridiagonalSystem,
    assemble,
    det_ratio,
    green_column,
    make_cde,
    make_rde,
    solve_banded3,
    solve_tridiagonal,
    uniform,
    unit_response,
)
from sperturb.linalg import residual_ok


def cofactor_det(a):
    """Laplace expansion along the first row."""
    n = len(a)
    if n == 1:
        return a[0][0]
    total = 0.0
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in a[1:]]
        total += (-1) ** j * a[0][j] * cofactor_det(minor)
    return total


def cramer_last_column(dense):
    """A^{-1} e_n by Cramer's rule: replace column i with e_n."""
    a = dense.tolist()
    n = len(a)
    det = cofactor_det(a)
    out = []
    for i in range(n):
        m = [row[:] for row in a]
        for r in range(n):
            m[r][i] = 1.0 if r == n - 1 else 0.0
        out.append(cofactor_det(m) / det)
    return np.array(out)


def random_system(rng, n):
    while True:
        sub, diag, sup = rng.uniform(-2, 2, n - 1), rng.uniform(-2, 2, n), rng.uniform(-2, 2, n - 1)
        sys = TridiagonalSystem(sub, diag, sup, np.zeros(n))
        if np.linalg.cond(sys.to_dense()) < 1e6:
            return sys


def test_hand_two_by_two():
    x = solve_banded3([-1.0], [2.0, 2.0], [-1.0], [1.0, 1.0])
    assert np.allclose(x, [1.0, 1.0], rtol=0, atol=1e-15)


def test_identity_and_zero_load():
    v = np.array([1.0, -2.0, 3.0])
    assert np.array_equal(solve_banded3(np.zeros(2), np.ones(3), np.zeros(2), v), v)
    sys = assemble(make_rde(1e-3), uniform(5))
    assert np.all(solve_tridiagonal(sys.with_load(np.zeros(5))) == 0.0)


def test_singular_system_raises():
    with pytest.raises(SingularMatrixError):
        solve_banded3([1.0], [1.0, 1.0], [1.0], [1.0, 2.0])
    with pytest.raises(SingularMatrixError):
        solve_banded3([], [0.0], [], [1.0])


def test_zero_pivot_falls_back_to_pivoting():
    # first pivot is zero; the matrix itself is fine
    x = solve_banded3([1.0, 1.0], [0.0, 1.0, 2.0], [1.0, 3.0], [1.0, 2.0, 3.0])
    dense = np.array([[0.0, 1.0, 0.0], [1.0, 1.0, 3.0], [0.0, 1.0, 2.0]])
    assert np.allclose(dense @ x, [1.0, 2.0, 3.0], atol=1e-14)


def test_green_column_of_diagonal_system():
    d = np.array([2.0, 4.0, 5.0])
    g = green_column(TridiagonalSystem(np.zeros(2), d, np.zeros(2), np.zeros(3)))
    assert np.array_equal(g, [0.0, 0.0, 0.2])


def test_green_column_matches_cramer_on_random_systems():
    rng = np.random.default_rng(20240601)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 7))
        sys = random_system(rng, n)
        g = green_column(sys)
        ref = cramer_last_column(sys.to_dense())
        worst = max(worst, np.max(np.abs(g - ref)) / np.max(np.abs(ref)))
    assert worst <= 1e-10


def test_det_ratio_matches_determinants():
    rng = np.random.default_rng(7)
    for _ in range(20):
        n = int(rng.integers(3, 7))
        sys = random_system(rng, n)
        g = green_column(sys)
        a = sys.to_dense().tolist()
        dets = []
        for i in range(n):
            m = [row[:] for row in a]
            for r in range(n):
                m[r][i] = 1.0 if r == n - 1 else 0.0
            dets.append(cofactor_det(m))
        for i in range(2, n + 1):
            if abs(dets[i - 1]) > 1e-8:
                assert det_ratio(g, i) == pytest.approx(abs(dets[i - 2] / dets[i - 1]), rel=1e-12)


def test_det_ratio_examples():
    assert det_ratio([3.0, 1.0, -1.0], 3) == 1.0
    assert det_ratio([2.0, 1.0], 2) == 2.0
    with pytest.raises(DegenerateRatioError):
        det_ratio([1.0, 0.0], 2)
    with pytest.raises(IndexError):
        det_ratio([1.0, 2.0], 1)


@settings(max_examples=100, deadline=None)
@given(g=st.lists(st.floats(1e-100, 1e100), min_size=2, max_size=8), signs=st.integers(0, 255))
def test_det_ratio_inverse_identity(g, signs):
    g = np.array([v if (signs >> k) & 1 else -v for k, v in enumerate(g)])
    for i in range(2, len(g) + 1):
        assert det_ratio(g, i) * abs(g[i - 1] / g[i - 2]) == pytest.approx(1.0, abs=1e-14)


def test_rde_green_column_alternates():
    g = green_column(assemble(make_rde(1e-10), uniform(4)))
    assert np.all(g[:-1] * g[1:] < 0)


def test_unit_response_is_a_column_of_the_inverse():
    sys = assemble(make_cde(1e-3), uniform(9))
    inv = np.linalg.inv(sys.to_dense())
    for j in (1, 5, 9):
        assert np.allclose(unit_response(sys, j), inv[:, j - 1], rtol=1e-12, atol=1e-14)
    with pytest.raises(IndexError):
        unit_response(sys, 10)


@pytest.mark.parametrize("eps", [1e-3, 1e-5, 1e-10])
@pytest.mark.parametrize("n", [4, 7, 8, 64, 513])
def test_residual_bound_on_example_systems(eps, n):
    for make in (make_cde, make_rde):
        sys = assemble(make(eps), uniform(n))
        assert residual_ok(sys, solve_tridiagonal(sys))


def rational_solve(sys, rhs):
    """Exact Thomas elimination in rationals on the stored float data."""
    from fractions import Fraction as F

    sub, diag, sup, b = ([F(float(v)) for v in a] for a in (sys.sub, sys.diag, sys.sup, rhs))
    n = len(diag)
    c, d = [F(0)] * n, [F(0)] * n
    c[0], d[0] = (sup[0] / diag[0] if n > 1 else F(0)), b[0] / diag[0]
    for i in range(1, n):
        den = diag[i] - sub[i - 1] * c[i - 1]
        if i < n - 1:
            c[i] = sup[i] / den
        d[i] = (b[i] - sub[i - 1] * d[i - 1]) / den
    x = [F(0)] * n
    x[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


@pytest.mark.parametrize("make,eps,n", [(make_cde, 1e-10, 9), (make_rde, 1e-5, 8), (make_cde, 1e-3, 16)])
def test_solve_correction_is_exact_relative_to_itself(make, eps, n):
    from sperturb.linalg import solve_correction

    sys = assemble(make(eps), uniform(n))
    exact = rational_solve(sys, sys.load)
    # a guess that already agrees with the solution to about twelve digits
    v = np.array([float(x) for x in exact]) * (1 + 1e-12 * np.linspace(-1, 1, n))
    w, bound = solve_correction(sys, v)
    ref = np.array([float(x - type(x)(float(vi))) for x, vi in zip(exact, v)])
    assert np.max(np.abs(w - ref)) <= 4 * np.finfo(float).eps * np.max(np.abs(ref)) + bound
    assert bound <= 1e-8 * np.max(np.abs(ref))


def test_solve_correction_checks_size():
    from sperturb import InvalidParameterError
    from sperturb.linalg import solve_correction

    with pytest.raises(InvalidParameterError):
        solve_correction(assemble(make_rde(1e-3), uniform(4)), np.zeros(3))
