"""First-order Melnikov function M(u) in closed form.

M = sum rho+_ij J_ij + sum rho-_ij I_ij + Phi(u), where
rho+-_ij = b+-_ij + (i+1)/j a+-_{i+1,j-1} and Phi collects the chord terms
sum (a+_ij - a-_ij) ((-1)^(i+mj+m) - 1)/(j+1) u^(i+mj+m).

The result lives in the span of u^e (odd e), pi*h^(l+1) and h^(l+1)*T(u)
with h = u^2 + u^(2m); coefficients are exact rationals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import mpmath
import numpy as np

from . import abelian
from .model import DomainError, PerturbationSpec, as_m, fraction_str, index_set

Key = Tuple[str, int]  # ("u", e) | ("pi", l) | ("T", l)


class Finding(Exception):
    """A computed result that contradicts a closed formula it was checked against."""


@dataclass(frozen=True)
class QPi:
    """a + b*pi with rational a, b."""

    a: Fraction = Fraction(0)
    b: Fraction = Fraction(0)

    def __add__(self, o: "QPi") -> "QPi":
        return QPi(self.a + o.a, self.b + o.b)

    def scale(self, c) -> "QPi":
        return QPi(self.a * c, self.b * c)

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __float__(self):
        return float(self.a) + float(self.b) * math.pi

    def to_json_obj(self):
        if not self.b:
            return fraction_str(self.a)
        if not self.a:
            return {"pi": fraction_str(self.b)}
        return {"rational": fraction_str(self.a), "pi": fraction_str(self.b)}


# ---------------------------------------------------------------- coefficients

@dataclass(frozen=True)
class ReducedCoefficients:
    parity: str
    rho: Dict[Tuple[int, int], Fraction]
    gamma: Dict[Tuple[int, int], Fraction]
    zeta: Dict[Tuple[int, int], Fraction]
    m: int = 0
    n: int = 0

    def coordinate(self, name: str, ij) -> Fraction:
        return getattr(self, name).get(tuple(ij), Fraction(0))


def _rho_side(a, b, n):
    out = {}
    for i, j in index_set(n):
        v = b.get((i, j), Fraction(0))
        if j >= 1:
            v += Fraction(i + 1, j) * a.get((i + 1, j - 1), Fraction(0))
        if v:
            out[(i, j)] = v
    return out


def _nz(d):
    return {k: v for k, v in d.items() if v}


def reduce_coefficients(spec: PerturbationSpec) -> ReducedCoefficients:
    """rho = rho+ - rho-, gamma = a+ - a-, and zeta = rho+ + rho- (odd m) or rho- (even m)."""
    n = spec.n
    rp = _rho_side(spec.a_plus, spec.b_plus, n)
    rm = _rho_side(spec.a_minus, spec.b_minus, n)
    keys = list(index_set(n))
    rho = _nz({k: rp.get(k, 0) - rm.get(k, 0) for k in keys})
    gamma = _nz({k: spec.a_plus.get(k, 0) - spec.a_minus.get(k, 0) for k in keys})
    if spec.m % 2:
        zeta = _nz({k: rp.get(k, 0) + rm.get(k, 0) for k in keys})
        parity = "odd"
    else:
        zeta = dict(rm)
        parity = "even"
    return ReducedCoefficients(parity, rho, {k: Fraction(v) for k, v in gamma.items()}, zeta, spec.m, n)


def pullback(rc: ReducedCoefficients, m: int, n: int) -> PerturbationSpec:
    """A raw spec whose reduced coefficients are rc (inverse of the unimodular map).

    The minus side is chosen with a- = 0, and b- = 0 (odd m) or b- = zeta (even m).
    """
    m = as_m(m)
    odd = m % 2 == 1
    a_plus = dict(rc.gamma)
    b_minus = {} if odd else dict(rc.zeta)
    b_plus = {}
    for i, j in index_set(n):
        if odd:
            # rho+ - rho- = rho and rho+ + rho- = zeta with rho- = 0 on the chosen side;
            # only one of rho / zeta is live for each (i, j)
            target = rc.rho.get((i, j), Fraction(0)) if (i + j) % 2 == 0 else rc.zeta.get((i, j), Fraction(0))
        else:
            target = rc.rho.get((i, j), Fraction(0)) + rc.zeta.get((i, j), Fraction(0))
        if j >= 1:
            target -= Fraction(i + 1, j) * a_plus.get((i + 1, j - 1), Fraction(0))
        if target:
            b_plus[(i, j)] = target
    return PerturbationSpec(m, n, a_plus=a_plus, a_minus={}, b_plus=b_plus, b_minus=b_minus)


# ------------------------------------------------------------------- expansion

@dataclass(frozen=True)
class MelnikovExpansion:
    """M(u) = sum mono[e] u^e + pi * sum ring[l] h^(l+1) + T(u) * sum arc[l] h^(l+1)."""

    m: int
    n: int
    mono: Dict[int, Fraction] = field(default_factory=dict)
    ring: Dict[int, Fraction] = field(default_factory=dict)
    arc: Dict[int, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("mono", "ring", "arc"):
            object.__setattr__(self, name, {int(k): Fraction(v) for k, v in getattr(self, name).items() if v})

    @property
    def support(self) -> List[Key]:
        return sorted([("u", e) for e in self.mono] + [("pi", l) for l in self.ring] + [("T", l) for l in self.arc])

    def coefficient(self, key: Key) -> Fraction:
        kind, idx = key
        return {"u": self.mono, "pi": self.ring, "T": self.arc}[kind].get(idx, Fraction(0))

    def is_zero(self) -> bool:
        return not (self.mono or self.ring or self.arc)

    def __add__(self, o: "MelnikovExpansion") -> "MelnikovExpansion":
        def add(x, y):
            d = dict(x)
            for k, v in y.items():
                d[k] = d.get(k, Fraction(0)) + v
            return d
        return MelnikovExpansion(self.m, max(self.n, o.n), add(self.mono, o.mono), add(self.ring, o.ring), add(self.arc, o.arc))

    def scale(self, c) -> "MelnikovExpansion":
        c = Fraction(c)
        return MelnikovExpansion(self.m, self.n, {k: c * v for k, v in self.mono.items()},
                                 {k: c * v for k, v in self.ring.items()}, {k: c * v for k, v in self.arc.items()})

    def __eq__(self, o):
        return isinstance(o, MelnikovExpansion) and self.m == o.m and (self.mono, self.ring, self.arc) == (o.mono, o.ring, o.arc)

    def __hash__(self):
        return hash((self.m, tuple(sorted(self.mono.items())), tuple(sorted(self.ring.items())), tuple(sorted(self.arc.items()))))

    # parts as polynomials in u: M = P(u) + pi R(u) + T(u) S(u)
    def poly_parts(self) -> Tuple[Dict[int, Fraction], Dict[int, Fraction], Dict[int, Fraction]]:
        P = dict(self.mono)
        R: Dict[int, Fraction] = {}
        S: Dict[int, Fraction] = {}
        for src, dst in ((self.ring, R), (self.arc, S)):
            for l, c in src.items():
                for e, b in _h_power(l + 1, self.m):
                    dst[e] = dst.get(e, Fraction(0)) + c * b
        clean = lambda d: {k: v for k, v in d.items() if v}
        return clean(P), clean(R), clean(S)

    def evaluate(self, u, dps: int = 50) -> float:
        with mpmath.workdps(dps):
            return float(self.evaluate_mp(u, dps))

    def evaluate_mp(self, u, dps: int = 50):
        with mpmath.workdps(dps):
            uu = mpmath.mpf(u)
            h = uu ** 2 + uu ** (2 * self.m)
            q = lambda c: mpmath.mpf(c.numerator) / c.denominator
            tot = mpmath.fsum(q(c) * uu ** e for e, c in self.mono.items())
            if self.ring:
                tot += mpmath.pi * mpmath.fsum(q(c) * h ** (l + 1) for l, c in self.ring.items())
            if self.arc:
                tot += abelian.arc_T(uu, self.m, dps) * mpmath.fsum(q(c) * h ** (l + 1) for l, c in self.arc.items())
            return +tot

    def evaluate_array(self, us) -> np.ndarray:
        """Plain float64 evaluation (fast, may lose digits to cancellation)."""
        us = np.asarray(us, dtype=float)
        h = us ** 2 + us ** (2 * self.m)
        out = np.zeros_like(us)
        for e, c in self.mono.items():
            out += float(c) * us ** e
        for l, c in self.ring.items():
            out += math.pi * float(c) * h ** (l + 1)
        if self.arc:
            v = us ** (self.m - 1)
            T = 0.5 * (v / (1 + v * v) + np.arctan2(1.0, v))
            s = np.zeros_like(us)
            for l, c in self.arc.items():
                s += float(c) * h ** (l + 1)
            out += T * s
        return out

    def to_json_obj(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "mono": [[e, fraction_str(c)] for e, c in sorted(self.mono.items())],
            "ring": [[l, {"pi": fraction_str(c)}] for l, c in sorted(self.ring.items())],
            "arc": [[l, fraction_str(c)] for l, c in sorted(self.arc.items())],
        }

    @staticmethod
    def from_json_obj(obj) -> "MelnikovExpansion":
        ring = {}
        for l, c in obj.get("ring", []):
            ring[int(l)] = Fraction(c["pi"] if isinstance(c, dict) else c)
        return MelnikovExpansion(int(obj["m"]), int(obj.get("n", 0)),
                                 {int(e): Fraction(c) for e, c in obj.get("mono", [])}, ring,
                                 {int(l): Fraction(c) for l, c in obj.get("arc", [])})


@lru_cache(maxsize=None)
def _h_power(k: int, m: int):
    return tuple((2 * (k - r) + 2 * m * r, math.comb(k, r)) for r in range(k + 1))


def _accumulate(expr: abelian.IntegralExpr, coef: Fraction, m: int, mono, ring, arc):
    for c, hp, up, g in abelian.resolve(expr, m).terms:
        c = c * coef
        if g == "Unit":
            for e, b in _h_power(hp, m):
                mono[up + e] = mono.get(up + e, Fraction(0)) + c * b
        elif g == "Pi":
            assert up == 0 and hp >= 1
            ring[hp - 1] = ring.get(hp - 1, Fraction(0)) + c
        elif g == "ArcT":
            assert up == 0 and hp >= 1
            arc[hp - 1] = arc.get(hp - 1, Fraction(0)) + c
        else:
            raise AssertionError(g)


def phi_coefficient(i: int, j: int, m: int) -> Tuple[Fraction, int]:
    """Chord term of gamma_ij: coefficient and exponent of u."""
    e = i + m * j + m
    return Fraction((-1) ** e - 1, j + 1), e


def assemble(spec: PerturbationSpec) -> MelnikovExpansion:
    """Exact expansion of M(u) straight from the raw perturbation coefficients."""
    m, n = spec.m, spec.n
    mono: Dict[int, Fraction] = {}
    ring: Dict[int, Fraction] = {}
    arc: Dict[int, Fraction] = {}
    for (a, b), reducer in (((spec.a_plus, spec.b_plus), abelian.reduce_J), ((spec.a_minus, spec.b_minus), abelian.reduce_I)):
        for (i, j), r in _rho_side(a, b, n).items():
            _accumulate(reducer(i, j, m), r, m, mono, ring, arc)
    for (i, j) in index_set(n):
        g = spec.a_plus.get((i, j), Fraction(0)) - spec.a_minus.get((i, j), Fraction(0))
        if g:
            c, e = phi_coefficient(i, j, m)
            if c:
                mono[e] = mono.get(e, Fraction(0)) + g * c
    return MelnikovExpansion(m, n, mono, ring, arc)


# --------------------------------------------------------- reduced coordinates

def coordinates(m, n: int) -> List[Tuple[str, Tuple[int, int]]]:
    """Reduced coordinates that can influence M, in the order used for pivoting:
    rho_{i,0}, gamma, zeta_{i,1}, then the remaining rho and zeta."""
    m = as_m(m)
    odd = m % 2 == 1
    idx = list(index_set(n))
    rho = [("rho", ij) for ij in idx if not odd or sum(ij) % 2 == 0]
    zeta = [("zeta", ij) for ij in idx if not odd or sum(ij) % 2 == 1]
    gamma = [("gamma", ij) for ij in idx if phi_coefficient(ij[0], ij[1], m)[0]]
    first = [c for c in rho if c[1][1] == 0] + gamma + [c for c in zeta if c[1][1] == 1]
    rest = [c for c in rho + zeta if c not in first]
    return first + rest


@lru_cache(maxsize=None)
def _unit_expansion(m: int, n: int, name: str, ij: Tuple[int, int]) -> MelnikovExpansion:
    i, j = ij
    mono: Dict[int, Fraction] = {}
    ring: Dict[int, Fraction] = {}
    arc: Dict[int, Fraction] = {}
    if name == "gamma":
        c, e = phi_coefficient(i, j, m)
        if c:
            mono[e] = c
    elif name == "rho":
        _accumulate(abelian.reduce_J(i, j, m), Fraction(1), m, mono, ring, arc)
    elif name == "zeta":
        if m % 2:
            _accumulate(abelian.reduce_J(i, j, m), Fraction(1), m, mono, ring, arc)
        else:
            # J + I: the full clockwise circle integral
            _accumulate(abelian.reduce_J(i, j, m), Fraction(1), m, mono, ring, arc)
            _accumulate(abelian.reduce_I(i, j, m), Fraction(1), m, mono, ring, arc)
    else:
        raise ValueError(name)
    return MelnikovExpansion(m, n, mono, ring, arc)


def assemble_reduced(rc: ReducedCoefficients, m, n: int) -> MelnikovExpansion:
    """M from reduced coordinates using the parity-specific grouping.

    odd m:  sum_{i+j even} rho J + sum_{i+j odd} zeta J + chord terms
    even m: sum rho J + sum zeta (J + I) + chord terms
    """
    m = as_m(m)
    total = MelnikovExpansion(m, n)
    for name, ij in coordinates(m, n):
        c = rc.coordinate(name, ij)
        if c:
            total = total + _unit_expansion(m, n, name, ij).scale(c)
    return total


# ------------------------------------------------------------ basis / jacobian

def classify_region(m, n: int) -> str:
    m = as_m(m)
    if n < 0:
        raise DomainError("degree must be non-negative")
    if m % 2:
        if n < m - 1:
            return "D1"
        return "D2" if n < 2 * m - 1 else "D3"
    if n < m:
        return "D4"
    return "D5" if n < 2 * m - 2 else "D6"


@dataclass(frozen=True)
class BasisInfo:
    m: int
    n: int
    region: str
    descriptors: Tuple[Key, ...]
    dimension: int
    degenerate: bool = False


def _describe(key: Key, m: int) -> str:
    kind, i = key
    if kind == "u":
        return f"u^{i}"
    if kind == "pi":
        return f"pi*(u^2+u^{2 * m})^{i + 1}"
    return f"(u^2+u^{2 * m})^{i + 1}*T(u)"


@lru_cache(maxsize=None)
def _coefficient_matrix(m: int, n: int):
    cols = coordinates(m, n)
    exps = [_unit_expansion(m, n, name, ij) for name, ij in cols]
    keys = sorted(set().union(*[set(e.support) for e in exps])) if exps else []
    mat = [[e.coefficient(k) for e in exps] for k in keys]
    return cols, tuple(keys), mat


def generating_basis(m, n: int) -> BasisInfo:
    """Functions spanned by M over all perturbations of degree n, and their count."""
    m = as_m(m)
    region = classify_region(m, n)
    _, keys, _ = _coefficient_matrix(m, n)
    return BasisInfo(m, n, region, keys, len(keys), m == 1)


def describe_basis(info: BasisInfo) -> List[str]:
    return [_describe(k, info.m) for k in info.descriptors]


def closed_form_dimension(m, n: int) -> Optional[Fraction]:
    """Closed-form count of independent basis functions (odd m)."""
    m = as_m(m)
    if m % 2 == 0:
        return None
    f = lambda x: math.floor(x)
    if classify_region(m, n) == "D1":
        return Fraction(f((n - 1) / 2) + f(n / 2) ** 2 + 3 * f(n / 2) + 3)
    return Fraction(f((n - 1) / 2) + f(n / 2) * m) - Fraction(m * m, 4) + Fraction(3 * m, 2) + Fraction(3, 4)


def _rank_select(mat, ncols):
    """Greedy column selection by exact elimination; returns pivot column list."""
    pivots = []
    # each kept column is stored reduced against the earlier ones
    reduced_cols: List[Tuple[int, List[Fraction]]] = []
    for c in range(ncols):
        v = [row[c] for row in mat]
        for p, pv in reduced_cols:
            if v[p]:
                f = v[p] / pv[p]
                v = [a - f * b for a, b in zip(v, pv)]
        nz = next((r for r in range(len(v)) if v[r]), None)
        if nz is not None:
            reduced_cols.append((nz, v))
            pivots.append(c)
    return pivots


def det_fraction(mat) -> Fraction:
    a = [list(map(Fraction, r)) for r in mat]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c]), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            if a[r][c]:
                f = a[r][c] / a[c][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return det


@dataclass(frozen=True)
class JacobianInfo:
    rows: Tuple[Key, ...]
    columns: Tuple[Tuple[str, Tuple[int, int]], ...]
    matrix: Tuple[Tuple[Fraction, ...], ...]
    determinant: Fraction
    findings: Tuple[str, ...] = ()


def independence_jacobian(m, n: int) -> JacobianInfo:
    """Jacobian of the basis coefficients of M with respect to a maximal
    independent set of reduced coordinates, and its determinant.

    A determinant of zero means the basis coefficients are not independent and is
    reported as a finding rather than raised.
    """
    m = as_m(m)
    cols, keys, mat = _coefficient_matrix(m, n)
    pivots = _rank_select(mat, len(cols))
    sub = tuple(tuple(r[c] for c in pivots) for r in mat)
    findings = []
    if len(pivots) < len(keys):
        findings.append(f"rank {len(pivots)} < {len(keys)} basis functions for (m,n)=({m},{n})")
        det = Fraction(0)
    else:
        det = det_fraction(sub)
        if det == 0:
            findings.append(f"singular Jacobian for (m,n)=({m},{n})")
    return JacobianInfo(keys, tuple(cols[c] for c in pivots), sub, det, tuple(findings))


def pullback_basis(m, n: int, target: Dict[Key, Fraction]) -> PerturbationSpec:
    """A perturbation whose Melnikov expansion has exactly the given basis coefficients."""
    m = as_m(m)
    jac = independence_jacobian(m, n)
    if jac.findings:
        raise Finding("; ".join(jac.findings))
    stray = [k for k in target if k not in jac.rows and target[k]]
    if stray:
        raise DomainError(f"coefficients outside the generating basis: {stray}")
    rhs = [Fraction(target.get(k, 0)) for k in jac.rows]
    x = solve_fraction([list(r) for r in jac.matrix], rhs)
    rho, gamma, zeta = {}, {}, {}
    for (name, ij), v in zip(jac.columns, x):
        if v:
            {"rho": rho, "gamma": gamma, "zeta": zeta}[name][ij] = v
    rc = ReducedCoefficients("odd" if m % 2 else "even", rho, gamma, zeta, m, n)
    return pullback(rc, m, n)


def solve_fraction(a, b) -> List[Fraction]:
    n = len(a)
    aug = [list(map(Fraction, r)) + [Fraction(v)] for r, v in zip(a, b)]
    for c in range(n):
        p = next((r for r in range(c, n) if aug[r][c]), None)
        if p is None:
            raise Finding("singular system in exact solve")
        aug[c], aug[p] = aug[p], aug[c]
        piv = aug[c][c]
        aug[c] = [x / piv for x in aug[c]]
        for r in range(n):
            if r != c and aug[r][c]:
                f = aug[r][c]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[c])]
    return [aug[r][n] for r in range(n)]


# ------------------------------------------------------------------ arc series

@dataclass(frozen=True)
class ArcFunction:
    """T(u) for even m; decreasing from pi/4 at u = 0 towards 0."""

    m: int

    def __post_init__(self):
        if as_m(self.m) % 2:
            raise DomainError("the arc function is only used for even m")

    def __call__(self, u, dps: Optional[int] = None):
        return abelian.arc_T(u, self.m, dps)

    def derivative(self, u: float) -> float:
        # T' = -(m-1) u^(3m-4) / (1 + u^(2m-2))^2
        m = self.m
        return -(m - 1) * u ** (3 * m - 4) / (1 + u ** (2 * m - 2)) ** 2

    def series(self, order: int) -> List[Tuple[int, QPi]]:
        """Taylor coefficients at u = 0 up to u^order (pi/4 is the constant)."""
        out = [(0, QPi(Fraction(0), Fraction(1, 4)))]
        k = 1
        while (2 * k + 1) * (self.m - 1) <= order:
            out.append(((2 * k + 1) * (self.m - 1), QPi(Fraction((-1) ** k * k, 2 * k + 1))))
            k += 1
        return out


def expand_series(expansion: MelnikovExpansion, order: int) -> List[Tuple[int, QPi]]:
    """Expansion of M(u) at u = 0+ up to u^order; coefficients in Q + Q*pi."""
    if order < 1:
        raise DomainError("order must be at least 1")
    P, R, S = expansion.poly_parts()
    acc: Dict[int, QPi] = {}

    def put(e, q):
        if e <= order:
            acc[e] = acc.get(e, QPi()) + q

    for e, c in P.items():
        put(e, QPi(c))
    for e, c in R.items():
        put(e, QPi(Fraction(0), c))
    if S:
        for te, tq in ArcFunction(expansion.m).series(order):
            for e, c in S.items():
                put(e + te, tq.scale(c))
    return sorted((e, q) for e, q in acc.items() if q)


def series_value(terms: List[Tuple[int, QPi]], u: float) -> float:
    return sum(float(q) * u ** e for e, q in terms)
