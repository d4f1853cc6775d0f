"""Hot loops for the piecewise ODE: Dormand-Prince 5(4) with switching events.

Compiled with numba when available.  Set PWMELNIKOV_NO_NUMBA=1 to run the
same code as plain Python (useful for debugging and for the benchmark).
"""
import os

import numpy as np

_DISABLED = os.environ.get("PWMELNIKOV_NO_NUMBA", "").strip() not in ("", "0", "false", "False")

try:
    if _DISABLED:
        raise ImportError("numba disabled by PWMELNIKOV_NO_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        # bare @njit or @njit(cache=True); keep .py_func so callers can treat both alike
        def wrap(f):
            f.py_func = f
            return f

        if len(args) == 1 and callable(args[0]) and not kwargs:
            return wrap(args[0])
        return wrap


# status codes
OK = 0
RETURNED = 1
GRAZING = 2
STEP_COLLAPSE = 3
TIMEOUT = 4
BUFFER_FULL = 5

# Dormand-Prince tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.array([
    [0, 0, 0, 0, 0, 0],
    [1 / 5, 0, 0, 0, 0, 0],
    [3 / 40, 9 / 40, 0, 0, 0, 0],
    [44 / 45, -56 / 15, 32 / 9, 0, 0, 0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0, 0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
])
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


@njit(cache=True)
def poly2(c, x, y):
    """sum c[i, j] x^i y^j for a square coefficient table."""
    n = c.shape[0]
    total = 0.0
    xi = 1.0
    for i in range(n):
        yj = 1.0
        for j in range(n - i):
            total += c[i, j] * xi * yj
            yj *= y
        xi *= x
    return total


@njit(cache=True)
def rhs(x, y, zone, coef, eps):
    # zone +1: above the curve (p+, q+); -1: below (p-, q-)
    side = 0 if zone > 0 else 1
    dx = y + eps * poly2(coef[side, 0], x, y)
    dy = -x + eps * poly2(coef[side, 1], x, y)
    return dx, dy


@njit(cache=True)
def gfun(x, y, m):
    return y - x ** m


@njit(cache=True)
def dp_step(x, y, h, zone, coef, eps, A, B5, E):
    """One Dormand-Prince step with the field of `zone`; returns (x, y, err)."""
    kx = np.empty(7)
    ky = np.empty(7)
    for s in range(7):
        xs = x
        ys = y
        for r in range(s):
            xs += h * A[s, r] * kx[r]
            ys += h * A[s, r] * ky[r]
        kx[s], ky[s] = rhs(xs, ys, zone, coef, eps)
    nx = x
    ny = y
    ex = 0.0
    ey = 0.0
    for s in range(7):
        nx += h * B5[s] * kx[s]
        ny += h * B5[s] * ky[s]
        ex += h * E[s] * kx[s]
        ey += h * E[s] * ky[s]
    return nx, ny, ex, ey


@njit(cache=True)
def integrate(x0, y0, zone0, t0, coef, eps, m, rtol, atol, gtol, graze_tol, max_time,
              stop_on_return, out, A, B5, E):
    """Integrate the switched system from (x0, y0) in zone0.

    Rows of `out` receive (t, x, y, zone) at every accepted step and event.
    With stop_on_return the run ends at the first crossing of the curve with
    x > 0 from above to below.  Returns (status, rows_written, x, y, t, zone).
    """
    x = x0
    y = y0
    t = t0
    zone = zone0
    h = 1e-2
    nrows = 0
    cap = out.shape[0]
    if cap > 0:
        out[0, 0] = t
        out[0, 1] = x
        out[0, 2] = y
        out[0, 3] = zone
        nrows = 1
    n_fail = 0
    while t < max_time:
        if h > max_time - t:
            h = max_time - t
        nx, ny, ex, ey = dp_step(x, y, h, zone, coef, eps, A, B5, E)
        sx = atol + rtol * max(abs(x), abs(nx))
        sy = atol + rtol * max(abs(y), abs(ny))
        err = np.sqrt(0.5 * ((ex / sx) ** 2 + (ey / sy) ** 2))
        if err > 1.0:
            h *= max(0.2, 0.9 * err ** (-0.2))
            n_fail += 1
            if h < 1e-14 or n_fail > 200:
                return STEP_COLLAPSE, nrows, x, y, t, zone
            continue
        n_fail = 0
        g_new = gfun(nx, ny, m)
        crossed = (zone > 0 and g_new < 0.0) or (zone < 0 and g_new > 0.0)
        if crossed:
            # bisect the step length until the new-side point sits on the curve
            lo = 0.0
            hi = h
            bx = nx
            by = ny
            for _ in range(200):
                if abs(gfun(bx, by, m)) < gtol:
                    break
                mid = 0.5 * (lo + hi)
                mx, my, _a, _b = dp_step(x, y, mid, zone, coef, eps, A, B5, E)
                gm = gfun(mx, my, m)
                if (zone > 0 and gm < 0.0) or (zone < 0 and gm > 0.0):
                    hi = mid
                    bx = mx
                    by = my
                else:
                    lo = mid
            # transversality: g' = y' - m x^(m-1) x' must not vanish on either side
            d1x, d1y = rhs(bx, by, zone, coef, eps)
            d2x, d2y = rhs(bx, by, -zone, coef, eps)
            gd1 = d1y - m * bx ** (m - 1) * d1x
            gd2 = d2y - m * bx ** (m - 1) * d2x
            x = bx
            y = by
            t = t + hi
            if abs(gd1) < graze_tol or abs(gd2) < graze_tol or gd1 * gd2 < 0.0:
                return GRAZING, nrows, x, y, t, zone
            zone = -zone
            if nrows < cap:
                out[nrows, 0] = t
                out[nrows, 1] = x
                out[nrows, 2] = y
                out[nrows, 3] = zone
                nrows += 1
            if stop_on_return and zone < 0 and x > 0.0:
                return RETURNED, nrows, x, y, t, zone
            continue
        x = nx
        y = ny
        t += h
        if nrows < cap:
            out[nrows, 0] = t
            out[nrows, 1] = x
            out[nrows, 2] = y
            out[nrows, 3] = zone
            nrows += 1
        fac = 5.0 if err == 0.0 else min(5.0, 0.9 * err ** (-0.2))
        h *= fac
        if h > 0.1:
            h = 0.1
    return TIMEOUT, nrows, x, y, t, zone


def tableau():
    return _A, _B5, _E
