"""Sturm sequences for F(u) = P(u) + pi*R(u) with rational P, R.

pi is treated as a transcendental t: the chain is computed exactly in Q[t][u]
(pseudo-remainders, content removed at every step) and signs are taken at
t = pi with arb balls.  A nonzero element of Q[t] cannot vanish at pi, so
every sign query terminates once the working precision is high enough.
"""
from __future__ import annotations

import math
import os
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from flint import arb, arb_poly, ctx, fmpq, fmpq_poly

MAX_PREC = 1 << 15


def default_prec() -> int:
    try:
        return max(64, int(os.environ.get("MELNIKOV_PREC_BITS", "256")))
    except ValueError:
        return 256


@contextmanager
def workprec(bits: int):
    old = ctx.prec
    ctx.prec = bits
    try:
        yield
    finally:
        ctx.prec = old


class Undecided(ArithmeticError):
    pass


def to_fmpq(q) -> fmpq:
    q = Fraction(q)
    return fmpq(q.numerator, q.denominator)


def to_fraction(q: fmpq) -> Fraction:
    return Fraction(int(q.p), int(q.q))


def arb_to_fraction(x: arb) -> Fraction:
    man, exp = x.mid().man_exp()
    man, exp = int(man), int(exp)
    return Fraction(man * 2 ** exp) if exp >= 0 else Fraction(man, 2 ** (-exp))


def arb_upper(x: arb) -> Fraction:
    return arb_to_fraction(x.upper())


def sign_arb(x: arb) -> Optional[int]:
    if x > 0:
        return 1
    if x < 0:
        return -1
    return None


def sign_at_pi(g: fmpq_poly, prec: Optional[int] = None) -> int:
    """Sign of g(pi) for g in Q[t]."""
    if g.is_zero():
        return 0
    if g.degree() == 0:
        c = g[0]
        return 1 if c > 0 else -1
    bits = prec or default_prec()
    while bits <= MAX_PREC:
        with workprec(bits):
            s = sign_arb(_tpoly_arb(g))
        if s is not None:
            return s
        bits *= 2
    raise Undecided("sign at pi not resolved")


def _tpoly_arb(g: fmpq_poly) -> arb:
    return arb_poly([arb(c) for c in g.coeffs()])(arb.pi())


def sign_qpi(a, b) -> int:
    """Sign of a + b*pi for rationals a, b."""
    return sign_at_pi(fmpq_poly([to_fmpq(a), to_fmpq(b)]))


# polynomials in u with coefficients in Q[t]: list index = power of u
BiPoly = List[fmpq_poly]


def _trim(p: BiPoly) -> BiPoly:
    while p and p[-1].is_zero():
        p.pop()
    return p


def bipoly(P: dict, R: dict) -> BiPoly:
    deg = max(list(P) + list(R) + [-1])
    out = []
    for e in range(deg + 1):
        out.append(fmpq_poly([to_fmpq(P.get(e, 0)), to_fmpq(R.get(e, 0))]))
    return _trim(out)


def deg(p: BiPoly) -> int:
    return len(p) - 1


def derivative(p: BiPoly) -> BiPoly:
    return _trim([p[k] * k for k in range(1, len(p))])


def _prem(a: BiPoly, b: BiPoly) -> Tuple[BiPoly, int]:
    """Sparse pseudo-remainder: returns (r, e) with lc(b)^e * a = q*b + r."""
    r = list(a)
    db = deg(b)
    lcb = b[-1]
    e = 0
    while r and deg(r) >= db:
        d = deg(r) - db
        lr = r[-1]
        r = [c * lcb for c in r]
        for k in range(db + 1):
            r[k + d] = r[k + d] - lr * b[k]
        r.pop()  # leading term cancels by construction
        _trim(r)
        e += 1
    return r, e


def _content(p: BiPoly) -> fmpq_poly:
    g = fmpq_poly(0)
    for c in p:
        if not c.is_zero():
            g = c if g.is_zero() else g.gcd(c)
            if g.degree() == 0:
                break
    return g


def primitive(p: BiPoly) -> BiPoly:
    """Divide by the Q[t]-content and a positive rational, keeping the sign at t = pi."""
    if not p:
        return p
    g = _content(p)
    if g.degree() > 0:
        s = sign_at_pi(g)
        out = []
        for c in p:
            q, r = divmod(c, g)
            assert r.is_zero()
            out.append(q * s)
    else:
        out = list(p)
    num_g, den_l = 0, 1
    for c in out:
        for q in c.coeffs():
            if q != 0:
                num_g = math.gcd(num_g, abs(int(q.p)))
                den_l = math.lcm(den_l, int(q.q))
    scale = fmpq(den_l, num_g or 1)
    return [c * scale for c in out]


@dataclass
class SturmChain:
    polys: List[BiPoly]
    prec: int

    def __post_init__(self):
        self._arb = None
        self._arb_prec = None

    @property
    def gcd_degree(self) -> int:
        return deg(self.polys[-1])

    def _arb_polys(self):
        if self._arb is None or self._arb_prec != ctx.prec:
            pi = arb.pi()
            self._arb = [arb_poly([arb_poly([arb(c) for c in t.coeffs()])(pi) if not t.is_zero() else arb(0) for t in p])
                         for p in self.polys]
            self._arb_prec = ctx.prec
        return self._arb

    def signs_at(self, q: Fraction) -> List[int]:
        """Exact signs of every chain member at u = q."""
        with workprec(self.prec):
            ap = self._arb_polys()
            x = arb(to_fmpq(q))
            out = []
            for k, p in enumerate(ap):
                s = sign_arb(p(x))
                if s is None:
                    s = sign_at_pi(evaluate_u(self.polys[k], q))
                out.append(s)
        return out

    def variations(self, q: Fraction) -> int:
        return _variations(self.signs_at(q))

    def variations_inf(self) -> int:
        return _variations([sign_at_pi(p[-1]) for p in self.polys])

    def variations_zero(self) -> int:
        return _variations([sign_at_pi(p[0]) if p else 0 for p in self.polys])


def _variations(signs: Sequence[int]) -> int:
    s = [x for x in signs if x]
    return sum(1 for a, b in zip(s, s[1:]) if a != b)


def evaluate_u(p: BiPoly, q) -> fmpq_poly:
    """p(u = q) as an element of Q[t] (Horner)."""
    q = to_fmpq(q)
    acc = fmpq_poly(0)
    for c in reversed(p):
        acc = acc * q + c
    return acc


def sturm_chain(p: BiPoly, prec: Optional[int] = None) -> SturmChain:
    prec = prec or default_prec()
    p0 = primitive(list(p))
    chain = [p0]
    if deg(p0) <= 0:
        return SturmChain(chain, prec)
    chain.append(primitive(derivative(p0)))
    while deg(chain[-1]) > 0:
        a, b = chain[-2], chain[-1]
        r, e = _prem(a, b)
        if not r:
            break
        # rem = prem / lc(b)^e, and the chain continues with -rem
        sgn = -1 if (e % 2 == 0 or sign_at_pi(b[-1]) > 0) else 1
        chain.append(primitive([c * sgn for c in r]))
    return SturmChain(chain, prec)


def strip_zero_root(p: BiPoly) -> Tuple[BiPoly, int]:
    k = 0
    while k < len(p) and p[k].is_zero():
        k += 1
    return p[k:], k


def cauchy_bound(p: BiPoly, prec: Optional[int] = None) -> Fraction:
    """Rational B with every real root of p (as a polynomial in u at t = pi) in (-B, B)."""
    prec = prec or default_prec()
    with workprec(prec):
        pi = arb.pi()
        vals = [arb_poly([arb(c) for c in t.coeffs()])(pi) if not t.is_zero() else arb(0) for t in p]
        lead = abs(vals[-1])
        if not lead > 0:
            raise Undecided("leading coefficient not separated from 0")
        b = Fraction(1)
        for v in vals[:-1]:
            b = max(b, 1 + arb_upper((abs(v) / lead).upper()))
    # round up to a short rational
    return Fraction(int(b) + 1)


@dataclass(frozen=True)
class RootInterval:
    lo: Fraction
    hi: Fraction
    kind: str  # simple-certified | odd | even


def _pick_mid(lo: Fraction, hi: Fraction, chain: SturmChain, k: int = 0) -> Fraction:
    # dyadic-ish midpoints keep denominators small; avoid exact roots of F
    fracs = (Fraction(1, 2), Fraction(3, 7), Fraction(4, 7), Fraction(2, 5), Fraction(3, 5), Fraction(5, 11))
    order = fracs[k:] + fracs[:k]
    cands = [_shorten(lo + (hi - lo) * f, lo, hi) for f in order] + [lo + (hi - lo) * f for f in order]
    for mid in cands:
        if not evaluate_u(chain.polys[0], mid).is_zero():
            return mid
    raise Undecided("could not avoid an exact root while bisecting")


def _shorten(x: Fraction, lo: Fraction, hi: Fraction) -> Fraction:
    # a rational with small denominator inside (lo, hi), close to x
    w = hi - lo
    den = 1
    while True:
        c = Fraction(round(x * den), den)
        if lo < c < hi and abs(c - x) <= w / 8:
            return c
        den *= 2


def isolate_positive(p: BiPoly, prec: Optional[int] = None, max_width: Optional[Fraction] = None):
    """Isolating intervals for the distinct positive roots of p(u) at t = pi.

    Returns (intervals, search_bound, chain).  Every interval (lo, hi) holds
    exactly one distinct root, lo > 0 and neither endpoint is a root.
    """
    p = _trim(list(p))
    if not p:
        raise ValueError("zero polynomial has no isolated roots")
    p, _ = strip_zero_root(p)
    chain = sturm_chain(p, prec)
    if deg(chain.polys[0]) <= 0:
        return [], Fraction(0), chain
    B = cauchy_bound(chain.polys[0], prec)
    v0 = chain.variations_zero()
    vB = chain.variations(B)
    total = v0 - vB
    if vB != chain.variations_inf():
        raise Undecided("Cauchy bound does not enclose all roots")
    out: List[Tuple[Fraction, Fraction]] = []
    stack = [(Fraction(0), B, v0, vB)]
    while stack:
        lo, hi, vl, vh = stack.pop()
        c = vl - vh
        if c == 0:
            continue
        if c == 1 and (max_width is None or hi - lo <= max_width) and lo > 0:
            out.append((lo, hi))
            continue
        mid = _pick_mid(lo, hi, chain)
        vm = chain.variations(mid)
        stack.append((mid, hi, vm, vh))
        stack.append((lo, mid, vl, vm))
    out.sort()
    assert len(out) == total
    # lo == 0 only when interval's left end is 0; bisection above guarantees lo > 0
    kinds = classify_multiplicity(chain, out)
    return [RootInterval(lo, hi, k) for (lo, hi), k in zip(out, kinds)], B, chain


def classify_multiplicity(chain: SturmChain, intervals) -> List[str]:
    if chain.gcd_degree <= 0:
        return ["simple-certified"] * len(intervals)
    g = chain.polys[-1]
    gchain = sturm_chain(g, chain.prec)
    kinds = []
    for lo, hi in intervals:
        if gchain.variations(lo) - gchain.variations(hi) == 0:
            kinds.append("simple-certified")
            continue
        sl = sign_at_pi(evaluate_u(chain.polys[0], lo))
        sh = sign_at_pi(evaluate_u(chain.polys[0], hi))
        kinds.append("odd" if sl != sh else "even")
    return kinds


def refine(chain: SturmChain, lo: Fraction, hi: Fraction, width: Fraction) -> Tuple[Fraction, Fraction]:
    """Shrink an isolating interval below the given width (Sturm counts)."""
    vl = chain.variations(lo)
    k = 0
    while hi - lo > width:
        mid = _pick_mid(lo, hi, chain, k % 3)
        vm = chain.variations(mid)
        if vl - vm >= 1:
            hi = mid
        else:
            lo, vl = mid, vm
        k += 1
    return lo, hi


def count_distinct_positive(p: BiPoly, prec: Optional[int] = None) -> int:
    p = _trim(list(p))
    if not p:
        raise ValueError("zero polynomial")
    p, _ = strip_zero_root(p)
    chain = sturm_chain(p, prec)
    return chain.variations_zero() - chain.variations_inf()
