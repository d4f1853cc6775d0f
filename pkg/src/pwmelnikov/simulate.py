"""Direct integration of the switched system and its return map on the curve.

The section is the switching curve itself, {(u, u^m): u > 0}.  A run starts
at B(u0) heading into the lower zone, goes once around and stops when it
crosses back from the upper zone into the lower one with x > 0.  The
abscissa of that hit is the return coordinate.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import _kernels as K
from .model import DomainError, PerturbationSpec, h_of_u

MAX_EPSILON = 0.05
RTOL = 1e-12
ATOL = 1e-14
EVENT_TOL = 1e-12
GRAZE_TOL = 1e-8
RESIDUAL_TOL = 1e-10
ROOT_XTOL = 1e-9
RETURN_TIME = 20.0


class SimulationError(RuntimeError):
    def __init__(self, msg, state=None):
        super().__init__(msg)
        self.state = state


class GrazingError(SimulationError):
    """Trajectory meets the switching curve (nearly) tangentially."""


class IntegrationError(SimulationError):
    """Step size collapsed below machine resolution."""


class EscapeError(SimulationError):
    """No return to the section within the time budget."""


@dataclass(frozen=True)
class PiecewiseState:
    x: float
    y: float
    zone: str = "below"  # "above" when y >= x^m
    t: float = 0.0

    def __post_init__(self):
        if self.zone not in ("above", "below"):
            raise DomainError(f"zone must be 'above' or 'below', got {self.zone!r}")

    @classmethod
    def on_curve(cls, u: float, m: int, zone: str = "below") -> "PiecewiseState":
        return cls(float(u), float(u) ** m, zone, 0.0)

    @property
    def sign(self) -> int:
        return 1 if self.zone == "above" else -1


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    zone: np.ndarray  # +1 above, -1 below
    status: str
    final: PiecewiseState

    def rows(self):
        for k in range(len(self.t)):
            yield (float(self.t[k]), float(self.x[k]), float(self.y[k]),
                   "above" if self.zone[k] > 0 else "below")


@dataclass(frozen=True)
class CycleFinding:
    uStar: float
    hStar: float
    stability: str  # attracting | repelling | undetermined
    residual: float

    def to_json_obj(self):
        return {"uStar": self.uStar, "hStar": self.hStar,
                "stability": self.stability, "residual": self.residual}


def coefficient_array(spec: PerturbationSpec) -> np.ndarray:
    """Dense float table coef[side, (p|q), i, j]; side 0 is above the curve."""
    n = spec.n + 1
    coef = np.zeros((2, 2, n, n))
    for side, (pa, qb) in enumerate(((spec.a_plus, spec.b_plus), (spec.a_minus, spec.b_minus))):
        for k, fam in enumerate((pa, qb)):
            for (i, j), c in fam.items():
                coef[side, k, i, j] = float(c)
    return coef


def _check_eps(epsilon):
    epsilon = float(epsilon)
    if not math.isfinite(epsilon) or abs(epsilon) > MAX_EPSILON:
        raise DomainError(f"|epsilon| must be at most {MAX_EPSILON}, got {epsilon!r}")
    return epsilon


_STATUS = {K.RETURNED: "returned", K.GRAZING: "grazing", K.STEP_COLLAPSE: "step-collapse",
           K.TIMEOUT: "max-time"}


def _run(coef, eps, m, state: PiecewiseState, max_time, stop_on_return, capacity, rtol=RTOL):
    A, B5, E = K.tableau()
    out = np.zeros((capacity, 4))
    status, rows, x, y, t, zone = K.integrate(
        float(state.x), float(state.y), float(state.sign), float(state.t), coef, eps, int(m),
        rtol, ATOL, EVENT_TOL, GRAZE_TOL, float(max_time), bool(stop_on_return), out, A, B5, E)
    final = PiecewiseState(float(x), float(y), "above" if zone > 0 else "below", float(t))
    if status == K.GRAZING:
        raise GrazingError(f"tangential contact with the switching curve at ({x:.6g}, {y:.6g})", final)
    if status == K.STEP_COLLAPSE:
        raise IntegrationError(f"step size collapsed at t={t:.6g}", final)
    return status, out[:rows], final


def flow(spec: PerturbationSpec, epsilon: float, start: PiecewiseState, maxTime: float,
         rtol: float = RTOL) -> Trajectory:
    """Integrate from `start` for `maxTime` time units, switching fields at the curve."""
    eps = _check_eps(epsilon)
    if not (maxTime > 0):
        raise DomainError(f"maxTime must be positive, got {maxTime!r}")
    coef = coefficient_array(spec)
    capacity = int(2000 * maxTime) + 64
    while True:
        status, rows, final = _run(coef, eps, spec.m, start, start.t + maxTime, False, capacity, rtol)
        if len(rows) < capacity:
            break
        capacity *= 2
    return Trajectory(rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3].astype(int),
                      _STATUS.get(status, str(status)), final)


def return_point(spec: PerturbationSpec, epsilon: float, u0: float,
                 maxTime: float = RETURN_TIME, coef=None) -> Tuple[float, float]:
    """(u_return, time of flight) for one revolution starting at B(u0)."""
    eps = _check_eps(epsilon)
    if not (u0 > 0) or not math.isfinite(u0):
        raise DomainError(f"u0 must be positive, got {u0!r}")
    if coef is None:
        coef = coefficient_array(spec)
    m = spec.m
    start = PiecewiseState.on_curve(u0, m, "below")
    # the lower field must push the orbit off the curve downward at B
    dx, dy = K.rhs(start.x, start.y, -1.0, coef, eps)
    gdot = dy - m * start.x ** (m - 1) * dx
    if gdot > -GRAZE_TOL:
        raise GrazingError(f"orbit through B({u0:g}) does not enter the lower zone", start)
    status, _, final = _run(coef, eps, m, start, maxTime, True, 0)
    if status != K.RETURNED:
        raise EscapeError(f"no return to the section within t={maxTime:g}", final)
    return float(final.x), float(final.t)


def displacement_map(spec: PerturbationSpec, epsilon: float, u0: float,
                     maxTime: float = RETURN_TIME, coef=None) -> float:
    """u_return - u0 after one revolution from B(u0)."""
    u1, _ = return_point(spec, epsilon, u0, maxTime, coef)
    return u1 - float(u0)


def melnikov_scale(u: float, m: int) -> float:
    """c(u) in Delta(u, eps) ~ eps * c(u) * M(u) for the u-parameterized section."""
    return 1.0 / (u + m * u ** (2 * m - 1))


def _delta_worker(args):
    spec_json, eps, u = args
    return displacement_map(PerturbationSpec.from_json(spec_json), eps, u)


def displacement_grid(spec, epsilon, us: Sequence[float], jobs: int = 1) -> np.ndarray:
    us = [float(u) for u in us]
    if jobs and jobs > 1:
        payload = [(spec.to_json(), epsilon, u) for u in us]
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return np.array(list(ex.map(_delta_worker, payload)))
    coef = coefficient_array(spec)
    return np.array([displacement_map(spec, epsilon, u, coef=coef) for u in us])


def _refine(f, lo, flo, hi, fhi, tol, xtol=ROOT_XTOL):
    # plain bisection on a sign change; stop once |Delta| < tol and the bracket is tight
    best_u, best_f = (lo, flo) if abs(flo) < abs(fhi) else (hi, fhi)
    for _ in range(200):
        if abs(best_f) < tol and hi - lo < xtol:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if abs(fm) < abs(best_f):
            best_u, best_f = mid, fm
        if fm == 0.0:
            break
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    return best_u, best_f


def find_limit_cycles(spec: PerturbationSpec, epsilon: float, uRange: Tuple[float, float],
                      samples: int = 200, tol: float = RESIDUAL_TOL, jobs: int = 1,
                      grid_out: Optional[list] = None) -> List[CycleFinding]:
    """Fixed points of the return map in u, located from sign changes of Delta."""
    eps = _check_eps(epsilon)
    if eps == 0:
        raise DomainError("epsilon must be nonzero")
    lo, hi = float(uRange[0]), float(uRange[1])
    if not (0 < lo < hi):
        raise DomainError(f"uRange must satisfy 0 < lo < hi, got {uRange!r}")
    if samples < 2:
        raise DomainError("need at least two samples")
    us = np.linspace(lo, hi, int(samples))
    ds = displacement_grid(spec, eps, us, jobs)
    if grid_out is not None:
        grid_out.extend(zip(us.tolist(), ds.tolist()))
    coef = coefficient_array(spec)
    f = lambda u: displacement_map(spec, eps, u, coef=coef)
    found = []
    for k in range(len(us) - 1):
        a, b, fa, fb = us[k], us[k + 1], ds[k], ds[k + 1]
        if fa == 0.0:
            if k > 0 and ds[k - 1] * fb < 0:
                found.append((a, 0.0, ds[k - 1], fb))
            continue
        if fa * fb < 0:
            u, r = _refine(f, a, fa, b, fb, tol)
            found.append((u, r, fa, fb))
    out = []
    for u, r, fa, fb in found:
        if abs(r) >= tol:
            stab = "undetermined"
        elif fa > 0 > fb:
            stab = "attracting"
        else:
            stab = "repelling"
        out.append(CycleFinding(float(u), float(h_of_u(u, spec.m)), stab, float(abs(r))))
    out.sort(key=lambda c: c.uStar)
    return out
