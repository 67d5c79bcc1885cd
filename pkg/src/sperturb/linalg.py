"""Tridiagonal solves, the discrete Green column, and determinant ratios.

Determinants of the stiffness matrix are never formed: at eps = 1e-10 they
under- or overflow, while the ratios det A_i / det A are just the entries of
``A^{-1} e_n`` (Cramer's rule).
"""
from __future__ import annotations

import numpy as np
import scipy.linalg

from .assembly import TridiagonalSystem
from .exceptions import DegenerateRatioError, InvalidParameterError, SingularMatrixError

PIVOT_TOL = 1e-14
RESIDUAL_TOL = 1e-10
RATIO_FLOOR = 1e-300
BACKWARD_TOL = 64 * np.finfo(float).eps
REFINE_STEPS = 2


def _thomas(sub, diag, sup, rhs):
    """Elimination without row exchanges; returns None on a tiny pivot."""
    n = diag.size
    rowmax = np.abs(diag).copy()
    rowmax[1:] = np.maximum(rowmax[1:], np.abs(sub))
    rowmax[:-1] = np.maximum(rowmax[:-1], np.abs(sup))
    piv = np.empty(n)
    y = np.empty(n)
    piv[0] = diag[0]
    y[0] = rhs[0]
    if not abs(piv[0]) > PIVOT_TOL * rowmax[0]:
        return None
    for k in range(1, n):
        m = sub[k - 1] / piv[k - 1]
        piv[k] = diag[k] - m * sup[k - 1]
        if not abs(piv[k]) > PIVOT_TOL * rowmax[k]:
            return None
        y[k] = rhs[k] - m * y[k - 1]
    x = np.empty(n)
    x[-1] = y[-1] / piv[-1]
    for k in range(n - 2, -1, -1):
        x[k] = (y[k] - sup[k] * x[k + 1]) / piv[k]
    return x


def _banded_pivoting(sub, diag, sup, rhs):
    ab = np.zeros((3, diag.size))
    ab[0, 1:] = sup
    ab[1] = diag
    ab[2, :-1] = sub
    try:
        return scipy.linalg.solve_banded((1, 1), ab, rhs, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(str(exc)) from exc


def _backward_stable(sub, diag, sup, rhs, x) -> bool:
    # element growth without pivoting shows up as a residual far above roundoff
    r = diag * x - rhs
    r[1:] += sub * x[:-1]
    r[:-1] += sup * x[1:]
    a_norm = np.abs(diag).copy()
    a_norm[1:] += np.abs(sub)
    a_norm[:-1] += np.abs(sup)
    scale = a_norm.max() * np.max(np.abs(x)) + np.max(np.abs(rhs))
    return bool(np.max(np.abs(r)) <= BACKWARD_TOL * scale)


def _solve_once(sub, diag, sup, rhs):
    x = _thomas(sub, diag, sup, rhs)
    if x is None or not np.all(np.isfinite(x)) or not _backward_stable(sub, diag, sup, rhs, x):
        x = _banded_pivoting(sub, diag, sup, rhs)
    if not np.all(np.isfinite(x)):
        raise SingularMatrixError("solution is not finite; matrix is numerically singular")
    return x


_SPLITTER = 134217729.0  # 2**27 + 1


def _two_sum(a, b):
    s = a + b
    t = s - a
    return s, (a - (s - t)) + (b - t)


def _two_prod(a, b):
    """``a * b = p + e`` exactly (Dekker's product with Veltkamp splitting)."""
    p = a * b
    ca, cb = _SPLITTER * a, _SPLITTER * b
    ah, bh = ca - (ca - a), cb - (cb - b)
    al, bl = a - ah, b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _residual_pair(sub, diag, sup, rhs, x, rhs_lo=None):
    """``rhs (+ rhs_lo) - A x`` as an unevaluated sum ``hi + lo``.

    Every product is split into its rounded value and exact error, and the
    terms of each row are summed with compensation, so the result carries
    about twice the working precision.
    """
    terms = [rhs] if rhs_lo is None else [rhs, rhs_lo]
    for coef, xs, rows in ((diag, x, slice(None)), (sub, x[:-1], slice(1, None)),
                           (sup, x[1:], slice(None, -1))):
        p, e = _two_prod(coef, xs)
        for t in (p, e):
            full = np.zeros_like(rhs)
            full[rows] = -t
            terms.append(full)
    s, c = terms[0].copy(), np.zeros_like(rhs)
    for t in terms[1:]:
        s, e = _two_sum(s, t)
        c += e
    hi = s + c
    return hi, c - (hi - s)


def _residual_ext(sub, diag, sup, rhs, x):
    """``rhs - A x`` in doubled precision, then rounded.

    The correction solve then sees the residual of the stored data, not
    rounding noise of size ``eps |A| |x|``.
    """
    r = _residual_pair(sub, diag, sup, rhs, x)[0]
    if not np.all(np.isfinite(r)):
        # splitting overflows near the top of the range; fall back to long double
        ld = np.longdouble
        xl = x.astype(ld)
        rl = rhs.astype(ld) - diag.astype(ld) * xl
        rl[1:] -= sub.astype(ld) * xl[:-1]
        rl[:-1] -= sup.astype(ld) * xl[1:]
        r = np.asarray(rl, dtype=float)
    return r


def solve_banded3(sub, diag, sup, rhs) -> np.ndarray:
    """Solve the tridiagonal system given by its three diagonals.

    Thomas elimination first.  If a pivot drops below ``1e-14`` of its row's
    largest entry, or the residual shows element growth, the system is
    re-solved by LU with partial pivoting.  Iterative refinement with a
    doubled-precision residual follows; the near-singular convection systems
    at eps = 1e-10 lose several digits without it.
    """
    sub, diag, sup = (np.asarray(a, dtype=float) for a in (sub, diag, sup))
    rhs = np.asarray(rhs, dtype=float)
    if diag.size == 0 or sub.size != diag.size - 1 or sup.size != diag.size - 1:
        raise InvalidParameterError("inconsistent diagonal lengths")
    if rhs.shape != diag.shape:
        raise InvalidParameterError("right-hand side length does not match the system")
    if not (np.all(np.isfinite(diag)) and np.all(np.isfinite(sub)) and np.all(np.isfinite(sup))):
        raise SingularMatrixError("matrix has non-finite entries")
    if diag.size == 1:
        if diag[0] == 0.0:
            raise SingularMatrixError("zero 1x1 system")
        return rhs / diag
    x = _solve_once(sub, diag, sup, rhs)
    for _ in range(REFINE_STEPS):
        x = x + _solve_once(sub, diag, sup, _residual_ext(sub, diag, sup, rhs, x))
    if not np.all(np.isfinite(x)):
        raise SingularMatrixError("solution is not finite; matrix is numerically singular")
    return x


def residual_ok(sys: TridiagonalSystem, x, load=None) -> bool:
    """Check ``|A x - F|_inf <= 1e-10 (|A|_inf |x|_inf + |F|_inf)``."""
    load = sys.load if load is None else load
    r = np.max(np.abs(sys.matvec(x) - load))
    a_norm = np.abs(sys.diag).copy()
    a_norm[1:] += np.abs(sys.sub)
    a_norm[:-1] += np.abs(sys.sup)
    bound = RESIDUAL_TOL * (a_norm.max() * np.max(np.abs(x)) + np.max(np.abs(load)))
    return bool(r <= bound)


def solve_tridiagonal(sys: TridiagonalSystem) -> np.ndarray:
    return solve_banded3(sys.sub, sys.diag, sys.sup, sys.load)


def solve_correction(sys: TridiagonalSystem, v, steps: int = 3) -> tuple[np.ndarray, float]:
    """Solve ``A w = F - A v`` for the correction ``w`` that takes ``v`` to the solution.

    The right-hand side is formed in doubled precision, so ``w`` is accurate
    relative to itself even when ``v`` already agrees with the solution to
    many digits; subtracting two rounded solutions would lose those digits.
    Returns ``w`` and the size of the last refinement step, a bound on the
    error left in ``w`` beyond its own rounding.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != sys.load.shape:
        raise InvalidParameterError("v does not match the system size")
    r_hi, r_lo = _residual_pair(sys.sub, sys.diag, sys.sup, sys.load, v)
    if not (np.all(np.isfinite(r_hi)) and np.all(np.isfinite(r_lo))):
        raise SingularMatrixError("correction right-hand side is not finite")
    w = _solve_once(sys.sub, sys.diag, sys.sup, r_hi)
    last = float(np.max(np.abs(w)))
    for _ in range(steps):
        rr = _residual_pair(sys.sub, sys.diag, sys.sup, r_hi, w, r_lo)[0]
        c = _solve_once(sys.sub, sys.diag, sys.sup, rr)
        w = w + c
        last = float(np.max(np.abs(c)))
    return w, last


def unit_response(sys: TridiagonalSystem, j: int) -> np.ndarray:
    """Column ``j`` (1-based) of ``A^{-1}``."""
    if not 1 <= j <= sys.n:
        raise IndexError(f"column {j} outside 1..{sys.n}")
    e = np.zeros(sys.n)
    e[j - 1] = 1.0
    return solve_banded3(sys.sub, sys.diag, sys.sup, e)


def green_column(sys: TridiagonalSystem) -> np.ndarray:
    """``A^{-1} e_n``: the discrete response to a unit load at the last node."""
    return unit_response(sys, sys.n)


def det_ratio(g, i: int) -> float:
    """``r_i = |g_{i-1} / g_i|`` (equal to ``|det A_{i-1} / det A_i|``), 1-based."""
    g = np.asarray(g, dtype=float)
    if not 2 <= i <= g.size:
        raise IndexError(f"ratio index {i} outside 2..{g.size}")
    if abs(g[i - 1]) <= RATIO_FLOOR:
        raise DegenerateRatioError(f"g_{i} vanishes; intersection coordinate undefined")
    return abs(g[i - 2] / g[i - 1])
