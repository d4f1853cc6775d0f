"""Geometry of the unperturbed center and the perturbation data.

The unperturbed system is the linear center x' = y, y' = -x on both sides of
the switching curve y = x^m.  Orbits are circles x^2 + y^2 = h and the circle
through B = (u, u^m) has h = u^2 + u^(2m); every downstream object is
parameterized by u.
"""
from __future__ import annotations

import json
import math
import numbers
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Tuple, Union

Index = Tuple[int, int]
Coeffs = Dict[Index, Fraction]


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class SpecParseError(DomainError):
    pass


@dataclass(frozen=True)
class CurvePower:
    m: int

    def __post_init__(self):
        if isinstance(self.m, bool) or not isinstance(self.m, numbers.Integral) or self.m < 1:
            raise DomainError(f"curve exponent must be a positive integer, got {self.m!r}")
        object.__setattr__(self, "m", int(self.m))

    @property
    def odd(self) -> bool:
        return self.m % 2 == 1

    @property
    def k(self) -> int:
        # m = 2k+1 (odd) or m = 2k (even)
        return self.m // 2

    @property
    def degenerate(self) -> bool:
        """m = 1 makes the switching set a straight line through the origin."""
        return self.m == 1


def as_m(m: Union[int, CurvePower]) -> int:
    if isinstance(m, CurvePower):
        return m.m
    return CurvePower(m).m


def h_of_u(u: float, m: Union[int, CurvePower]) -> float:
    m = as_m(m)
    return u * u + u ** (2 * m)


def u_from_h(h: float, m: Union[int, CurvePower]) -> float:
    """Invert h = u^2 + u^(2m) on u > 0 (bisection, then Newton polish)."""
    m = as_m(m)
    if not (h > 0) or not math.isfinite(h):
        raise DomainError(f"h must be positive and finite, got {h!r}")
    f = lambda u: u * u + u ** (2 * m) - h
    lo, hi = 0.0, max(1.0, math.sqrt(h)) + 1.0
    # bisect until the bracket is tight enough for Newton to be safe
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-6 * hi:
            break
    u = 0.5 * (lo + hi)
    for _ in range(50):
        fu = f(u)
        du = 2 * u + 2 * m * u ** (2 * m - 1)
        step = fu / du
        un = u - step
        if not (lo <= un <= hi):
            un = 0.5 * (lo + hi)
        if fu > 0:
            hi = min(hi, u)
        else:
            lo = max(lo, u)
        if abs(un - u) <= 1e-17 * u:
            u = un
            break
        u = un
    return u


@dataclass(frozen=True)
class OrbitParam:
    u: float
    m: int

    def __post_init__(self):
        as_m(self.m)
        if not (self.u > 0):
            raise DomainError(f"u must be positive, got {self.u!r}")

    @property
    def h(self) -> float:
        return h_of_u(self.u, self.m)

    @classmethod
    def from_h(cls, h: float, m) -> "OrbitParam":
        return cls(u_from_h(h, m), as_m(m))


def intersection_points(u: float, m) -> Tuple[Tuple[float, float], Tuple[float, float]]:
    """Return A = (-u, (-u)^m) and B = (u, u^m), where the orbit meets the curve."""
    m = as_m(m)
    if not (u > 0):
        raise DomainError(f"u must be positive, got {u!r}")
    return (-u, (-u) ** m), (u, u ** m)


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise SpecParseError(f"not a rational coefficient: {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        # keep the decimal the user wrote rather than the binary expansion
        return Fraction(repr(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise SpecParseError(f"not a rational coefficient: {x!r}") from exc
    raise SpecParseError(f"not a rational coefficient: {x!r}")


def fraction_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


FAMILIES = ("a_plus", "a_minus", "b_plus", "b_minus")


def _clean(coeffs, n: int, name: str) -> Coeffs:
    out: Coeffs = {}
    items = coeffs.items() if isinstance(coeffs, dict) else coeffs
    for key, val in items:
        i, j = key
        if int(i) != i or int(j) != j or i < 0 or j < 0:
            raise DomainError(f"{name}: bad index ({i},{j})")
        i, j = int(i), int(j)
        if i + j > n:
            raise DomainError(f"{name}: index ({i},{j}) exceeds degree n={n}")
        q = to_fraction(val)
        if q:
            out[(i, j)] = out.get((i, j), Fraction(0)) + q
    return {k: v for k, v in out.items() if v}


@dataclass(frozen=True)
class PerturbationSpec:
    """p^+-, q^+- as exact rational coefficient maps (i, j) -> a_ij, b_ij.

    Above the curve (y > x^m) the field is (y + eps p+, -x + eps q+), below it
    uses p-, q-.  p = sum a_ij x^i y^j and q = sum b_ij x^i y^j.
    """

    m: int
    n: int
    a_plus: Coeffs = field(default_factory=dict)
    a_minus: Coeffs = field(default_factory=dict)
    b_plus: Coeffs = field(default_factory=dict)
    b_minus: Coeffs = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "m", as_m(self.m))
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 0:
            raise DomainError(f"degree n must be a non-negative integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        for name in FAMILIES:
            object.__setattr__(self, name, _clean(getattr(self, name), self.n, name))

    @property
    def curve(self) -> CurvePower:
        return CurvePower(self.m)

    def family(self, name: str) -> Coeffs:
        return getattr(self, name)

    def is_zero(self) -> bool:
        return not any(getattr(self, f) for f in FAMILIES)

    def scaled(self, c) -> "PerturbationSpec":
        c = to_fraction(c)
        return PerturbationSpec(self.m, self.n, **{f: {k: c * v for k, v in getattr(self, f).items()} for f in FAMILIES})

    def __add__(self, other: "PerturbationSpec") -> "PerturbationSpec":
        if self.m != other.m:
            raise DomainError("cannot add specs with different m")
        fams = {}
        for f in FAMILIES:
            d = dict(getattr(self, f))
            for k, v in getattr(other, f).items():
                d[k] = d.get(k, Fraction(0)) + v
            fams[f] = d
        return PerturbationSpec(self.m, max(self.n, other.n), **fams)

    def to_json_obj(self) -> dict:
        obj = {"m": self.m, "n": self.n}
        for f in FAMILIES:
            obj[f] = [[i, j, fraction_str(q)] for (i, j), q in sorted(getattr(self, f).items())]
        return obj

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_json_obj(), **kw)

    @classmethod
    def from_json_obj(cls, obj) -> "PerturbationSpec":
        if not isinstance(obj, dict):
            raise SpecParseError("spec document must be a JSON object")
        for key in ("m", "n"):
            if key not in obj:
                raise SpecParseError(f"missing field {key!r}")
        fams = {}
        for f in FAMILIES:
            rows = obj.get(f, [])
            if not isinstance(rows, list):
                raise SpecParseError(f"{f} must be a list of [i, j, coefficient]")
            d = {}
            for row in rows:
                if not isinstance(row, list) or len(row) != 3:
                    raise SpecParseError(f"{f}: bad row {row!r}")
                i, j, c = row
                if not isinstance(i, int) or not isinstance(j, int):
                    raise SpecParseError(f"{f}: indices must be integers in {row!r}")
                d[(i, j)] = d.get((i, j), Fraction(0)) + to_fraction(c)
            fams[f] = d
        return cls(obj["m"], obj["n"], **fams)

    @classmethod
    def from_json(cls, text: str) -> "PerturbationSpec":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecParseError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
        return cls.from_json_obj(obj)


def index_set(n: int) -> Iterable[Index]:
    for d in range(n + 1):
        for i in range(d, -1, -1):
            yield (i, d - i)


def random_spec(m, n: int, rng, density: float = 0.8, num: int = 9, den: int = 5) -> PerturbationSpec:
    """Random rational spec; `rng` is a random.Random so runs are reproducible."""
    def fam():
        return {ij: Fraction(rng.randint(-num, num), rng.randint(1, den))
                for ij in index_set(n) if rng.random() < density}
    return PerturbationSpec(m, n, fam(), fam(), fam(), fam())
