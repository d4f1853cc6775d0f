"""Closed forms of the arc integrals J_ij (upper arc) and I_ij (lower arc).

J_ij = int x^i y^j dx along the circle x^2+y^2 = h from A = (-u, (-u)^m) to
B = (u, u^m) over the top (clockwise); I_ij runs from B back to A over the
bottom.  Both are reduced by two exact recursions

    lower j:  (i+j+1) J_ij = j h J_{i,j-2} - s(i+mj+1) u^(i+mj+1)
    lower i:  (i+j+1) J_ij = (i-1) h J_{i-2,j} + s(i+mj+2m-1) u^(i+mj+2m-1)

with s(e) = (-1)^e - 1, down to the generators J00, J01, J11 (and I01 for
even m).  The lower arc uses the same recursions with the boundary terms
negated, because the chord it closes against is traversed the other way.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Tuple

import mpmath

from .model import as_m, fraction_str

GENERATORS = ("Unit", "J00", "J01", "J11", "I01", "ArcT", "Pi")
# Unit/Pi/ArcT form the resolved basis: u-powers, pi*u-powers, T(u)*u-powers
RESOLVED = ("Unit", "Pi", "ArcT")

Term = Tuple[Fraction, int, int, str]


def _sgn(e: int) -> int:
    # (-1)^e - 1
    return 0 if e % 2 == 0 else -2


@dataclass(frozen=True)
class IntegralExpr:
    """sum of c * h^hp * u^up * gen, normalized (one term per (hp, up, gen))."""

    terms: Tuple[Term, ...] = ()

    @staticmethod
    def build(terms: Iterable[Term]) -> "IntegralExpr":
        acc: Dict[Tuple[int, int, str], Fraction] = {}
        for c, hp, up, g in terms:
            if g not in GENERATORS:
                raise ValueError(f"unknown generator {g!r}")
            if c:
                key = (hp, up, g)
                acc[key] = acc.get(key, Fraction(0)) + Fraction(c)
        items = sorted((k, v) for k, v in acc.items() if v)
        return IntegralExpr(tuple((v, hp, up, g) for (hp, up, g), v in items))

    def __add__(self, other: "IntegralExpr") -> "IntegralExpr":
        return IntegralExpr.build(self.terms + other.terms)

    def __neg__(self) -> "IntegralExpr":
        return self.scale(-1)

    def __sub__(self, other: "IntegralExpr") -> "IntegralExpr":
        return self + (-other)

    def scale(self, c) -> "IntegralExpr":
        c = Fraction(c)
        return IntegralExpr.build((c * t[0], t[1], t[2], t[3]) for t in self.terms)

    def times_h(self, k: int = 1) -> "IntegralExpr":
        return IntegralExpr.build((c, hp + k, up, g) for c, hp, up, g in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def generators(self) -> set:
        return {t[3] for t in self.terms}

    def to_json_obj(self) -> dict:
        return {"terms": [{"c": fraction_str(c), "h": hp, "u": up, "g": g} for c, hp, up, g in self.terms]}

    @staticmethod
    def from_json_obj(obj) -> "IntegralExpr":
        return IntegralExpr.build((Fraction(t["c"]), int(t["h"]), int(t["u"]), t["g"]) for t in obj["terms"])

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for c, hp, up, g in self.terms:
            s = fraction_str(c)
            if hp:
                s += f"*h^{hp}"
            if up:
                s += f"*u^{up}"
            if g != "Unit":
                s += f"*{g}"
            parts.append(s)
        return " + ".join(parts)


def _unit(c, up: int) -> IntegralExpr:
    return IntegralExpr.build([(Fraction(c), 0, up, "Unit")])


def _gen(g: str, c=1) -> IntegralExpr:
    return IntegralExpr.build([(Fraction(c), 0, 0, g)])


ZERO = IntegralExpr()


def _base(i: int, j: int, m: int, side: int) -> IntegralExpr:
    odd = m % 2 == 1
    if (i, j) == (0, 0):
        return _gen("J00", side)  # I00 = -J00 = -2u
    if (i, j) == (1, 0):
        return ZERO
    if (i, j) == (0, 1):
        if side > 0 or odd:
            return _gen("J01")  # odd m: the two arcs are point reflections, I01 = J01
        return _gen("I01")
    if (i, j) == (1, 1):
        if not odd:
            return ZERO
        return _gen("J11", side)  # odd m: I11 = -J11
    raise AssertionError((i, j))


@lru_cache(maxsize=None)
def _reduce(i: int, j: int, m: int, side: int) -> IntegralExpr:
    if i < 0 or j < 0:
        raise ValueError("indices must be non-negative")
    if i <= 1 and j <= 1:
        return _base(i, j, m, side)
    d = i + j + 1
    if j >= 2:
        e = i + m * j + 1
        rest = _reduce(i, j - 2, m, side).times_h().scale(Fraction(j, d))
        return rest + _unit(Fraction(-side * _sgn(e), d), e)
    e = i + m * j + 2 * m - 1
    rest = _reduce(i - 2, j, m, side).times_h().scale(Fraction(i - 1, d))
    return rest + _unit(Fraction(side * _sgn(e), d), e)


def reduce_J(i: int, j: int, m) -> IntegralExpr:
    """Exact closed form of J_ij over the generators J00, J01, J11."""
    return _reduce(int(i), int(j), as_m(m), 1)


def reduce_I(i: int, j: int, m) -> IntegralExpr:
    """Exact closed form of I_ij; uses J00, J01, J11 (odd m) or J00, J01, I01 (even m)."""
    return _reduce(int(i), int(j), as_m(m), -1)


def reduce(i: int, j: int, m, side: str = "plus") -> IntegralExpr:
    if side not in ("plus", "minus"):
        raise ValueError(f"side must be 'plus' or 'minus', got {side!r}")
    return reduce_J(i, j, m) if side == "plus" else reduce_I(i, j, m)


def base_integrals(m) -> Dict[Tuple[str, int, int], IntegralExpr]:
    """Resolved values of J/I for (i,j) in {0,1}^2 over Unit, Pi, ArcT."""
    m = as_m(m)
    out = {}
    for side, name in ((1, "J"), (-1, "I")):
        for ij in ((0, 0), (1, 0), (0, 1), (1, 1)):
            out[(name,) + ij] = resolve(_base(ij[0], ij[1], m, side), m)
    return out


def _generator_value(g: str, m: int) -> IntegralExpr:
    """Each generator as h^a u^b times a resolved generator."""
    if g in RESOLVED:
        return _gen(g)
    if g == "J00":
        return _unit(2, 1)
    if m % 2 == 1:
        if g == "J01":
            return IntegralExpr.build([(Fraction(1, 2), 1, 0, "Pi")])
        if g == "J11":
            return _unit(Fraction(-2, 3), 3 * m)
    else:
        # J01 = 2 h T(u), I01 = pi h - 2 h T(u)
        if g == "J01":
            return IntegralExpr.build([(Fraction(2), 1, 0, "ArcT")])
        if g == "I01":
            return IntegralExpr.build([(Fraction(1), 1, 0, "Pi"), (Fraction(-2), 1, 0, "ArcT")])
    raise ValueError(f"generator {g} is not defined for m={m}")


def resolve(expr: IntegralExpr, m) -> IntegralExpr:
    """Substitute the base integrals, leaving only Unit, Pi, ArcT generators."""
    m = as_m(m)
    terms = []
    for c, hp, up, g in expr.terms:
        for c2, hp2, up2, g2 in _generator_value(g, m).terms:
            terms.append((c * c2, hp + hp2, up + up2, g2))
    return IntegralExpr.build(terms)


@lru_cache(maxsize=None)
def _h_power(k: int, m: int) -> Tuple[Tuple[int, int], ...]:
    # (u^2 + u^2m)^k as (exponent, binomial) pairs
    return tuple((2 * (k - r) + 2 * m * r, math.comb(k, r)) for r in range(k + 1))


def canonical(expr: IntegralExpr, m) -> Dict[Tuple[str, int], Fraction]:
    """Fully expanded form: (generator in Unit/Pi/ArcT, u-exponent) -> coefficient."""
    m = as_m(m)
    out: Dict[Tuple[str, int], Fraction] = {}
    for c, hp, up, g in resolve(expr, m).terms:
        for e, b in _h_power(hp, m):
            key = (g, up + e)
            out[key] = out.get(key, Fraction(0)) + c * b
    return {k: v for k, v in out.items() if v}


def arc_T(u, m, dps: int | None = None):
    """T(u) = int_0^a sqrt(1-t^2) dt, a = 1/sqrt(1+u^(2m-2)).

    Evaluated as (v/(1+v^2) + atan(1/v))/2 with v = u^(m-1), which stays
    accurate for both small and large u.  Returns an mpf when dps is given.
    """
    m = as_m(m)
    if dps is None:
        v = float(u) ** (m - 1)
        if v == 0.0:
            return math.pi / 4
        return 0.5 * (v / (1.0 + v * v) + math.atan2(1.0, v))
    with mpmath.workdps(dps):
        v = mpmath.mpf(u) ** (m - 1)
        return (v / (1 + v * v) + mpmath.atan2(1, v)) / 2


def evaluate(expr: IntegralExpr, u, m, dps: int = 60) -> float:
    """Numeric value at u; exact-rational structure is evaluated at dps digits
    so the heavy cancellation between h-powers and boundary terms is harmless."""
    m = as_m(m)
    with mpmath.workdps(dps):
        uu = mpmath.mpf(u)
        h = uu ** 2 + uu ** (2 * m)
        vals = {"Unit": mpmath.mpf(1), "Pi": +mpmath.pi}
        if m % 2 == 0 or any(t[3] in ("ArcT", "I01") for t in expr.terms):
            vals["ArcT"] = arc_T(uu, m, dps)
        total = mpmath.mpf(0)
        for c, hp, up, g in resolve(expr, m).terms:
            total += mpmath.mpf(c.numerator) / c.denominator * h ** hp * uu ** up * vals[g]
        return float(total)


def evaluate_J(i, j, u, m, side: str = "plus") -> float:
    return evaluate(reduce(i, j, m, side), u, m)


def pythagoras_residual_expr(i: int, j: int, m, side: str = "plus") -> IntegralExpr:
    """J_{i+2,j} + J_{i,j+2} - h J_ij as an unsimplified expression."""
    return reduce(i + 2, j, m, side) + reduce(i, j + 2, m, side) - reduce(i, j, m, side).times_h()


def pythagoras_symbolic(i: int, j: int, m, side: str = "plus") -> Dict[Tuple[str, int], Fraction]:
    """Canonical residual of the circle identity; empty dict means exact cancellation."""
    return canonical(pythagoras_residual_expr(i, j, m, side), m)


def verify_pythagoras(i: int, j: int, h: float, m) -> float:
    """|J_{i+2,j}(h) + J_{i,j+2}(h) - h J_ij(h)| from the closed forms."""
    from .model import u_from_h

    u = u_from_h(h, m)
    a = evaluate(reduce_J(i + 2, j, m), u, m)
    b = evaluate(reduce_J(i, j + 2, m), u, m)
    c = evaluate(reduce_J(i, j, m), u, m)
    hh = u * u + u ** (2 * as_m(m))
    return abs(a + b - hh * c)


def boundary_exponents(expr: IntegralExpr) -> List[int]:
    return sorted({up for c, hp, up, g in expr.terms if g == "Unit"})


def symmetry_relations(i: int, j: int, m) -> str:
    """Predicted relation between J_ij and I_ij for odd m: 'neg' (J = -I) or 'same'."""
    if j % 2 == 0:
        return "neg"
    return "same" if i % 2 == 0 else "neg"
