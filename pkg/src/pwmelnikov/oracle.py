"""Independent numeric ground truth by adaptive quadrature in the polar angle.

Nothing here uses the recursions in `abelian`; integrals are taken directly
along the circle x = r cos t, y = r sin t with the arc endpoints found from
the intersection points with the switching curve.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import integrate

from .model import DomainError, PerturbationSpec, as_m, intersection_points

ABS_TOL = 1e-12
MAX_EVALS = 2 ** 20
# above this ratio int|f| / |int f| double precision cannot deliver 1e-10 relative
ILL_CONDITIONED = 1e6


class OracleError(RuntimeError):
    pass


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    errorEstimate: float
    evaluations: int
    converged: bool = True
    method: str = "quadpack"


def arc_angles(u: float, m):
    """(theta_B, theta_A) with theta_B < theta_A, both chosen so that the upper
    arc is the angle interval [theta_B, theta_A] and the lower arc is
    [theta_A - 2 pi, theta_B]."""
    m = as_m(m)
    (ax, ay), (bx, by) = intersection_points(u, m)
    tb = math.atan2(by, bx)  # in (0, pi/2)
    ta = math.atan2(ay, ax) % (2 * math.pi)  # in (pi/2, 3 pi/2)
    return tb, ta


def _breaks(a: float, b: float):
    # split at quadrant boundaries to keep each panel smooth and short
    pts = [k * math.pi / 2 for k in range(-8, 9) if a < k * math.pi / 2 < b]
    return pts


def _scipy_quad(f, a, b, epsabs, limit=400):
    pts = _breaks(a, b)
    val, err, info = integrate.quad(f, a, b, epsabs=epsabs, epsrel=1e-13, limit=limit,
                                    points=pts or None, full_output=1)[:3]
    return val, err, int(info["neval"])


def integral_quadrature(i: int, j: int, u: float, m, side: str = "plus") -> QuadratureResult:
    """J_ij (side='plus') or I_ij (side='minus') by quadrature over the angle."""
    m = as_m(m)
    if not (u > 0):
        raise DomainError(f"u must be positive, got {u!r}")
    if side not in ("plus", "minus"):
        raise DomainError(f"side must be 'plus' or 'minus', got {side!r}")
    r = math.sqrt(u * u + u ** (2 * m))
    tb, ta = arc_angles(u, m)
    lo, hi = (tb, ta) if side == "plus" else (ta - 2 * math.pi, tb)
    scale = r ** (i + j + 1)
    # x^i y^j dx with dx = -r sin t dt, run clockwise (decreasing t)
    f = lambda t: scale * math.cos(t) ** i * math.sin(t) ** (j + 1)
    val, err, nev = _scipy_quad(f, lo, hi, ABS_TOL * max(scale, 1e-300))
    mag, _, _ = _scipy_quad(lambda t: abs(f(t)), lo, hi, ABS_TOL * max(scale, 1e-300))
    if mag > 0 and abs(val) < mag / ILL_CONDITIONED:
        # cancellation: redo in extended precision, endpoints recomputed there too
        digits = 30 + int(math.log10(mag / max(abs(val), 1e-300 * mag)) if val else 40)
        digits = min(digits, 120)
        with mpmath.workdps(digits):
            uu = mpmath.mpf(u)
            rr = mpmath.sqrt(uu ** 2 + uu ** (2 * m))
            tbm = mpmath.atan2(uu ** m, uu)
            tam = mpmath.atan2((-uu) ** m, -uu)
            if tam < 0:
                tam += 2 * mpmath.pi
            a, b = (tbm, tam) if side == "plus" else (tam - 2 * mpmath.pi, tbm)
            rk = rr ** (i + j + 1)

            def g(t):
                c, s = mpmath.cos_sin(t)
                return rk * c ** i * s ** (j + 1)

            pts = [a] + [mpmath.mpf(p) for p in _breaks(float(a), float(b))] + [b]
            v, e = mpmath.quad(g, pts, error=True, method="gauss-legendre", maxdegree=8)
            return QuadratureResult(float(v), float(e), nev, bool(e < ABS_TOL * scale), "mpmath")
    return QuadratureResult(val, err, nev, bool(err <= max(ABS_TOL * scale, 1e-13 * abs(val)) and nev < MAX_EVALS))


def relative_error(value: float, reference: float, scale: float) -> float:
    """|value - reference| relative to the reference, or to ABS_TOL * scale
    when the reference itself is that small (integrals that vanish exactly)."""
    return abs(value - reference) / max(abs(reference), ABS_TOL * scale)


def circle_integral(i: int, j: int, r: float) -> float:
    """Clockwise full-circle integral of x^i y^j dx (classical Beta-function value)."""
    if i % 2 or (j + 1) % 2:
        return 0.0
    return 2 * math.gamma((i + 1) / 2) * math.gamma((j + 2) / 2) / math.gamma((i + j + 3) / 2) * r ** (i + j + 1)


def _grad_H(x, y):
    return 2.0 * x, 2.0 * y


def switching_ratio(u: float, m, grad_plus=_grad_H, grad_minus=_grad_H) -> float:
    """(H+_x + H+_y phi') / (H-_x + H-_y phi') at A for the curve phi(x) = x^m."""
    m = as_m(m)
    (ax, ay), _ = intersection_points(u, m)
    dphi = m * ax ** (m - 1)
    gp, gm = grad_plus(ax, ay), grad_minus(ax, ay)
    num = gp[0] + gp[1] * dphi
    den = gm[0] + gm[1] * dphi
    if den == 0:
        raise OracleError("orbit tangent to the switching curve at A")
    return num / den


def _poly(coeffs, x, y):
    return sum(float(c) * x ** i * y ** j for (i, j), c in coeffs.items())


def melnikov_quadrature(spec: PerturbationSpec, u: float) -> QuadratureResult:
    """int_{L+} q+ dx - p+ dy  +  ratio * int_{L-} q- dx - p- dy, by quadrature."""
    if not (u > 0):
        raise DomainError(f"u must be positive, got {u!r}")
    m = spec.m
    ratio = switching_ratio(u, m)
    if abs(ratio - 1.0) > 1e-12:
        raise OracleError(f"switching ratio {ratio!r} differs from 1; geometry is inconsistent")
    r = math.sqrt(u * u + u ** (2 * m))
    tb, ta = arc_angles(u, m)

    def form(p, q):
        def f(t):
            c, s = math.cos(t), math.sin(t)
            x, y = r * c, r * s
            # clockwise: d/dt(-t) -> dx = r sin t, dy = -r cos t per unit of decreasing angle
            return _poly(q, x, y) * (r * s) - _poly(p, x, y) * (-r * c)
        return f

    total, err, nev = 0.0, 0.0, 0
    scale = max(1.0, r) ** (spec.n + 1) * r
    for (lo, hi), p, q, w in (((tb, ta), spec.a_plus, spec.b_plus, 1.0),
                              ((ta - 2 * math.pi, tb), spec.a_minus, spec.b_minus, ratio)):
        if not p and not q:
            continue
        v, e, k = _scipy_quad(form(p, q), lo, hi, ABS_TOL * scale)
        total += w * v
        err += abs(w) * e
        nev += k
    return QuadratureResult(total, err, nev, bool(err <= ABS_TOL * scale * 10 + 1e-12 * abs(total)))


def melnikov_values(spec: PerturbationSpec, us) -> np.ndarray:
    return np.array([melnikov_quadrature(spec, float(u)).value for u in us])
