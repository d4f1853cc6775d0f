"""Counting zeros of M(u) on (0, inf), the Z(m, n) bound formulas, and the
construction of perturbations with many simple zeros.

Odd m (or no arc part): M = P(u) + pi R(u) is handled by an exact Sturm chain.

Even m: M = G + S T with G = P + pi R.  Off the zeros of S, M1 = M/S has
M1' = M2/S^2 with M2 = G'S - GS' - (m-1) u^(3m) (S/h)^2, a polynomial of the
same P + pi R shape.  Between consecutive zeros of S and M2, M1 is strictly
monotone, so each such piece holds at most one zero of M, present exactly
when M has opposite signs at the two ends.  The piece ends are the isolating
intervals of those zeros (where M is shown sign-definite with arb balls),
u -> 0+ (leading Taylor term) and u -> inf (leading asymptotic term).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath
from flint import arb, arb_poly, fmpq_poly

from . import _sturm as st
from .melnikov import (
    Finding,
    MelnikovExpansion,
    QPi,
    assemble,
    classify_region,
    det_fraction,
    expand_series,
    generating_basis,
    pullback_basis,
)
from .model import DomainError, PerturbationSpec, as_m


@dataclass(frozen=True)
class ZeroInterval:
    lo: Fraction
    hi: Fraction
    multiplicityParity: str  # simple-certified | odd | even

    @property
    def mid(self) -> float:
        return float((self.lo + self.hi) / 2)


@dataclass
class ZeroReport:
    intervals: List[ZeroInterval]
    rigor: str  # exact | interval-certified | heuristic
    searchBound: Fraction
    upper: Optional[int] = None  # Rolle-type bound for even m, equal to count otherwise
    complete: bool = True
    notes: List[str] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.intervals)

    @property
    def simple_count(self) -> int:
        return sum(1 for z in self.intervals if z.multiplicityParity == "simple-certified")

    def to_json_obj(self) -> dict:
        return {
            "count": self.count,
            "rigor": self.rigor,
            "complete": self.complete,
            "searchBound": str(self.searchBound),
            "upper": self.upper,
            "intervals": [{"lo": str(z.lo), "hi": str(z.hi), "lo_float": float(z.lo), "hi_float": float(z.hi),
                           "multiplicity": z.multiplicityParity} for z in self.intervals],
            "notes": list(self.notes),
        }


# ------------------------------------------------------------------ helpers

def _fp(d: Dict[int, Fraction]) -> fmpq_poly:
    if not d:
        return fmpq_poly(0)
    out = [0] * (max(d) + 1)
    for e, c in d.items():
        out[e] = st.to_fmpq(c)
    return fmpq_poly(out)


def _dict(p: fmpq_poly) -> Dict[int, Fraction]:
    return {e: st.to_fraction(c) for e, c in enumerate(p.coeffs()) if c != 0}


def _h_poly(m: int) -> fmpq_poly:
    c = [0] * (2 * m + 1)
    c[2] += 1
    c[2 * m] += 1
    return fmpq_poly(c)


class _Evaluator:
    """Ball evaluation of M = P + pi R + T S over rationals and intervals."""

    def __init__(self, P: fmpq_poly, R: fmpq_poly, S: fmpq_poly, m: int, prec: int):
        self.P, self.R, self.S, self.m, self.prec = P, R, S, m, prec
        self._cache_prec = None

    def _polys(self):
        if self._cache_prec != st.ctx.prec:
            conv = lambda p: arb_poly([arb(c) for c in p.coeffs()]) if not p.is_zero() else arb_poly([arb(0)])
            self._a = (conv(self.P), conv(self.R), conv(self.S))
            self._cache_prec = st.ctx.prec
        return self._a

    def ball(self, x: arb) -> arb:
        P, R, S = self._polys()
        pi = arb.pi()
        val = P(x) + pi * R(x)
        if not self.S.is_zero():
            v = x ** (self.m - 1)
            T = (v / (1 + v * v) + pi / 2 - v.atan()) / 2
            val = val + T * S(x)
        return val

    def sign_point(self, q: Fraction) -> Optional[int]:
        bits = self.prec
        while bits <= st.MAX_PREC:
            with st.workprec(bits):
                s = st.sign_arb(self.ball(arb(st.to_fmpq(q))))
            if s is not None:
                return s
            bits *= 4
        return None

    def sign_on(self, lo: Fraction, hi: Fraction, depth: int = 10) -> Optional[int]:
        """Sign of M on [lo, hi] if it is provably constant, else None."""
        with st.workprec(self.prec):
            return self._sign_on(lo, hi, depth)

    def _sign_on(self, lo, hi, depth):
        x = arb(st.to_fmpq(lo)).union(arb(st.to_fmpq(hi)))
        s = st.sign_arb(self.ball(x))
        if s is not None or depth == 0:
            return s
        mid = (lo + hi) / 2
        a = self._sign_on(lo, mid, depth - 1)
        if a is None:
            return None
        b = self._sign_on(mid, hi, depth - 1)
        return a if a == b else None


def _sign_near_zero(exp: MelnikovExpansion) -> Optional[int]:
    P, R, S = exp.poly_parts()
    top = max(list(P) + list(R) + list(S) + [1])
    order = 8
    while order <= 8 * top + 16 * exp.m + 64:
        terms = expand_series(exp, order)
        if terms:
            q = terms[0][1]
            return st.sign_qpi(q.a, q.b)
        order *= 2
    return None


def _sign_at_infinity(P, R, S, m: int) -> Optional[int]:
    """Sign of P + pi R + T S as u -> inf; T = sum (-1)^k (k+1)/(2k+1) u^-(2k+1)(m-1)."""
    coeffs: Dict[int, QPi] = {}
    for e, c in P.items():
        coeffs[e] = coeffs.get(e, QPi()) + QPi(c)
    for e, c in R.items():
        coeffs[e] = coeffs.get(e, QPi()) + QPi(Fraction(0), c)
    exps = list(coeffs)
    top = max(exps + [max(S) - (m - 1) if S else -10 ** 9])
    bottom = min(exps + [top]) - 64 * max(m - 1, 1)
    K = (top - bottom) // max(2 * (m - 1), 1) + 2
    tail: Dict[int, QPi] = {}
    for es, c in S.items():
        for k in range(K):
            e = es - (2 * k + 1) * (m - 1)
            if e < bottom:
                break
            tail[e] = tail.get(e, QPi()) + QPi(c * Fraction((-1) ** k * (k + 1), 2 * k + 1))
    for e in range(top, bottom - 1, -1):
        q = coeffs.get(e, QPi()) + tail.get(e, QPi())
        if q:
            return st.sign_qpi(q.a, q.b)
    return None


def _poly_zeros(P: Dict[int, Fraction], R: Dict[int, Fraction], prec: int):
    bp = st.bipoly(P, R)
    if not bp:
        raise DomainError("zero function has no isolated zeros")
    return st.isolate_positive(bp, prec)


# ------------------------------------------------------------------ counting

def count_zeros(expansion: MelnikovExpansion, prec: Optional[int] = None, width: Optional[Fraction] = None) -> ZeroReport:
    """Certified zeros of M on (0, inf)."""
    if expansion.is_zero():
        raise DomainError("M is identically zero; its zeros are not isolated")
    prec = prec or st.default_prec()
    P, R, S = expansion.poly_parts()
    if not S:
        ivs, B, chain = _poly_zeros(P, R, prec)
        if width is not None:
            ivs = [st.RootInterval(*st.refine(chain, z.lo, z.hi, width), z.kind) for z in ivs]
        zs = [ZeroInterval(z.lo, z.hi, z.kind) for z in ivs]
        return ZeroReport(zs, "exact", B, len(zs), True)
    return _count_even(expansion, P, R, S, prec, width)


def _count_even(expansion, P, R, S, prec, width) -> ZeroReport:
    m = expansion.m
    notes: List[str] = []
    Pp, Rp, Sp = _fp(P), _fp(R), _fp(S)
    h = _h_poly(m)
    Sh, rem = divmod(Sp, h)
    assert rem.is_zero(), "arc part must be divisible by h"
    u3m = fmpq_poly([0] * (3 * m) + [1])
    P2 = Pp.derivative() * Sp - Pp * Sp.derivative() - (m - 1) * u3m * Sh * Sh
    R2 = Rp.derivative() * Sp - Rp * Sp.derivative()
    ev = _Evaluator(Pp, Rp, Sp, m, prec)

    s_ivs, sB, s_chain = _poly_zeros(S, {}, prec)
    if P2.is_zero() and R2.is_zero():
        # M1 is constant, so M is a constant multiple of S
        zs = [ZeroInterval(z.lo, z.hi, z.kind) for z in s_ivs]
        return ZeroReport(zs, "exact", sB, len(zs), True, ["M is proportional to its arc coefficient"])

    m2_ivs, mB, m2_chain = _poly_zeros(_dict(P2), _dict(R2), prec)
    upper = len(m2_ivs) + 2 * len(s_ivs) + 1

    # breakpoints: isolating intervals on which M must be shown sign-definite
    bps = [[z.lo, z.hi, s_chain] for z in s_ivs] + [[z.lo, z.hi, m2_chain] for z in m2_ivs]
    bps.sort(key=lambda b: b[0])
    resolved: List[Tuple[Fraction, Fraction, Optional[int]]] = []
    for lo, hi, chain in bps:
        sgn = ev.sign_on(lo, hi)
        it = 0
        while sgn is None and it < 40:
            lo, hi = st.refine(chain, lo, hi, (hi - lo) / 8)
            sgn = ev.sign_on(lo, hi)
            it += 1
        resolved.append((lo, hi, sgn))
    resolved = _merge(resolved, ev)

    rigor = "interval-certified"
    complete = True
    s0 = _sign_near_zero(expansion)
    sinf = _sign_at_infinity(P, R, S, m)
    if s0 is None or sinf is None:
        notes.append("could not decide the sign of M near 0 or at infinity")
        rigor, complete = "heuristic", False

    zeros: List[ZeroInterval] = []
    # walk the ends: (position, sign-left-side, sign-right-side)
    ends = [(Fraction(0), Fraction(0), s0, s0)]
    for lo, hi, sgn in resolved:
        if sgn is None:
            sl, sh = ev.sign_point(lo), ev.sign_point(hi)
            rigor, complete = "heuristic", False
            notes.append(f"M not sign-definite on [{float(lo):.6g}, {float(hi):.6g}]")
            if sl is not None and sh is not None:
                zeros.append(ZeroInterval(lo, hi, "odd" if sl != sh else "even"))
            ends.append((lo, hi, sl, sh))
        else:
            ends.append((lo, hi, sgn, sgn))
    for (alo, ahi, _, sa), (blo, bhi, sb, _) in zip(ends, ends[1:]):
        if sa is None or sb is None:
            continue
        if sa != sb:
            zeros.append(_locate(ev, ahi, blo, sa, width))
    last = ends[-1]
    if last[3] is not None and sinf is not None and last[3] != sinf:
        U = max(last[1], Fraction(1)) * 2
        k = 0
        while ev.sign_point(U) != sinf and k < 200:
            U *= 2
            k += 1
        if k == 200:
            notes.append("tail zero not bracketed")
            rigor, complete = "heuristic", False
        else:
            zeros.append(_locate(ev, last[1], U, last[3], width))
    zeros.sort(key=lambda z: z.lo)
    bound = max([sB, mB] + [z.hi for z in zeros])
    return ZeroReport(zeros, rigor, bound, upper, complete, notes)


def _merge(items, ev):
    out = []
    for lo, hi, s in items:
        if out and lo <= out[-1][1]:
            plo, phi, ps = out[-1]
            nhi = max(phi, hi)
            out[-1] = (plo, nhi, ev.sign_on(plo, nhi))
        else:
            out.append((lo, hi, s))
    return out


def _locate(ev: _Evaluator, lo: Fraction, hi: Fraction, s_lo: int, width: Optional[Fraction]) -> ZeroInterval:
    """Shrink (lo, hi), which holds exactly one simple zero of M, by bisection."""
    if lo == 0:
        # step in from the left end until the sign near 0 is seen
        x = hi / 2
        for _ in range(400):
            if ev.sign_point(x) == s_lo:
                break
            x /= 2
        lo = x
    target = width if width is not None else (hi - lo) / 2 ** 20
    k = 0
    while hi - lo > target and k < 200:
        mid = st._shorten((lo + hi) / 2, lo, hi)
        s = ev.sign_point(mid)
        if s is None:
            mid = lo + (hi - lo) * Fraction(3, 7)
            s = ev.sign_point(mid)
            if s is None:
                break
        if s == 0:
            return ZeroInterval(lo, hi, "simple-certified")
        if s == s_lo:
            lo = mid
        else:
            hi = mid
        k += 1
    return ZeroInterval(lo, hi, "simple-certified")


# ----------------------------------------------------------------- wronskians

def _check_exponents(exponents: Sequence[int]) -> List[int]:
    ex = [int(e) for e in exponents]
    if any(e < 0 for e in ex):
        raise DomainError("exponents must be non-negative")
    if len(set(ex)) != len(ex):
        raise DomainError(f"repeated exponents in {ex}")
    if any(b <= a for a, b in zip(ex, ex[1:])):
        raise DomainError(f"exponents must be strictly increasing: {ex}")
    return ex


def _falling(n: int, r: int) -> int:
    out = 1
    for k in range(r):
        out *= n - k
    return out


def wronskian_monomials(exponents: Sequence[int], u: float, dps: int = 40) -> float:
    """Numeric Wronskian of u^n1, ..., u^nk at u (determinant of the derivative matrix)."""
    ex = _check_exponents(exponents)
    if not (u > 0):
        raise DomainError("u must be positive")
    with mpmath.workdps(dps):
        uu = mpmath.mpf(u)
        k = len(ex)
        mat = mpmath.matrix(k, k)
        for r in range(k):
            for c, n in enumerate(ex):
                f = _falling(n, r)
                mat[r, c] = f * uu ** (n - r) if f else 0
        return float(mpmath.det(mat))


def wronskian_closed_form(exponents: Sequence[int], u: float) -> float:
    ex = _check_exponents(exponents)
    k = len(ex)
    prod = 1
    for i in range(k):
        for j in range(i + 1, k):
            prod *= ex[j] - ex[i]
    return prod * u ** (sum(ex) - k * (k - 1) // 2)


def ect_certify(exponents: Sequence[int]) -> bool:
    """True when every leading Wronskian W[u^n1..u^nj] is nonvanishing on (0, inf).

    W_j = det[falling(n_i, r)] * u^(sum n_i - j(j-1)/2); the determinant is
    computed exactly, so the certificate is symbolic.
    """
    ex = _check_exponents(exponents)
    for j in range(1, len(ex) + 1):
        mat = [[_falling(n, r) for n in ex[:j]] for r in range(j)]
        if det_fraction(mat) == 0:
            return False
    return True


# ------------------------------------------------------------------- bounds

@dataclass
class BoundPair:
    lower: Optional[int]
    upper: Optional[int]
    region: str
    findings: List[str] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)


def _fl(a: int, b: int = 2) -> int:
    return a // b  # floor, so [-1/2] = -1


def bound_Z(m, n: int) -> BoundPair:
    """Lower and upper bounds on Z(m, n) from the closed formulas, evaluated literally."""
    m = as_m(m)
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise DomainError("n must be a non-negative integer")
    n = int(n)
    region = classify_region(m, n)
    d = 0 if n % 2 else -1
    h2, h1 = _fl(n), _fl(n - 1)
    notes: List[str] = []
    findings: List[str] = []
    if n == 0:
        findings.append("bracket [(n-1)/2] evaluated at n=0 gives the negative value -1")
    if m % 2:
        k = (m - 1) // 2
        if m == 1:
            notes.append("m=1: the switching curve is a straight line (degenerate case)")
        if region == "D1":
            upper = _fl(n + 3) * _fl(n + 5) // 2 + _fl(n + 2) * _fl(n + 4) - 2
            lower = h2 * _fl(n + 6) + h1 + 2
        else:
            if region == "D2":
                upper = _fl(n + 3) * _fl(n + 5) // 2 + (2 * k + 1) * h2 - (k - 1) ** 2
            else:
                upper = (2 * k + 1) * (2 * h2 + d) + k * (5 - 3 * k) + 1
            lower = 2 * (k + 1) * h2 + d - (k - 1) ** 2 + 2
    else:
        k = m // 2
        if region == "D4":
            lhs, rhs2 = 2 * h1, m - 2  # compare 2[(n-1)/2] with m/2 - 1 (doubled)
            if 2 * lhs < rhs2:
                upper = 4 * h2 * h2 + (6 * d + 11) * h2 + d * (5 * d + 17) // 2 + 4
            elif 2 * lhs == rhs2:
                upper = k * k + ((7 - 2 * d) * k - 3 - 4 * d) // 2
                notes.append("upper bound from the equality case of the three-way split")
            else:
                upper = (4 * k + 1) * h2 + (3 * k + 1) * d - k * (k - 5) - 1
                notes.append("upper bound from the '>' case of the three-way split")
            lower = h2 * (h2 + 3) // 2 + h1 * (h1 + 7) // 2 + 3
        else:
            upper = (3 * k + 1) * h1 + k * h2 - k * (k - 5) - 1
            if region == "D5":
                lower = (k + 2) * h1 + k * h2 - k * (k - 3) + 1
            elif n == 2 * m - 2:
                lower = 3 * k * k + 4 * k - 3
            elif n == 2 * m - 1:
                lower = 3 * k * k + 5 * k - 2
            elif n == 2 * m:
                lower = 3 * k * k + 6 * k - 2
            elif m == 2:
                lower = 3 * (h2 + 1) + 2 * d
                notes.append("lower bound for m=2 from the m=2 closed formula")
            else:
                lower = None
                notes.append("no lower-bound formula for even m with n > 2m")
    if lower is not None and upper is not None and lower > upper:
        findings.append(f"lower bound {lower} exceeds upper bound {upper} at (m,n)=({m},{n})")
    return BoundPair(lower, upper, region, findings, notes)


# -------------------------------------------------------------- construction

def default_targets(count: int, lo: float = 0.3, hi: float = 3.0) -> List[float]:
    if count <= 0:
        return []
    r = (hi / lo) ** (1.0 / (count + 1))
    return [lo * r ** (i + 1) for i in range(count)]


def _basis_values(keys, u, m):
    uu = mpmath.mpf(u)
    h = uu ** 2 + uu ** (2 * m)
    T = None
    out = []
    for kind, i in keys:
        if kind == "u":
            out.append(uu ** i)
        elif kind == "pi":
            out.append(mpmath.pi * h ** (i + 1))
        else:
            if T is None:
                from .abelian import arc_T
                T = arc_T(uu, m, mpmath.mp.dps)
            out.append(h ** (i + 1) * T)
    return out


@dataclass
class Construction:
    spec: PerturbationSpec
    report: ZeroReport
    targets: List[float]
    coefficients: Dict[Tuple[str, int], Fraction]
    expansion: MelnikovExpansion


def construct_max_zeros(m, n: int, targets: Optional[Sequence[float]] = None, digits: int = 40) -> Construction:
    """A perturbation whose Melnikov function has simple zeros at (or next to) the targets."""
    m = as_m(m)
    info = generating_basis(m, n)
    d = info.dimension
    if targets is None:
        lb = bound_Z(m, n).lower
        cnt = d - 1 if lb is None else min(lb, d - 1)
        targets = default_targets(cnt)
    targets = [float(t) for t in targets]
    if any(t <= 0 for t in targets) or any(b <= a for a, b in zip(targets, targets[1:])):
        raise DomainError("targets must be positive and strictly increasing")
    r = len(targets)
    if r > d - 1:
        raise DomainError(f"at most {d - 1} zeros can be prescribed for (m,n)=({m},{n})")
    keys = list(info.descriptors)
    with mpmath.workdps(digits + 20):
        rows = [_basis_values(keys, t, m) for t in targets]
        # column scaling keeps the generalized Vandermonde system well balanced
        scales = [max(abs(rows[i][c]) for i in range(r)) if r else mpmath.mpf(1) for c in range(d)]
        scales = [s if s != 0 else mpmath.mpf(1) for s in scales]
        use = list(range(r + 1))
        A = mpmath.matrix(r, r)
        b = mpmath.matrix(r, 1)
        for i in range(r):
            for jj, c in enumerate(use[:-1]):
                A[i, jj] = rows[i][c] / scales[c]
            b[i] = -rows[i][use[-1]] / scales[use[-1]]
        try:
            x = mpmath.lu_solve(A, b) if r else mpmath.matrix(0, 1)
        except ZeroDivisionError as exc:
            raise DomainError(f"rank-deficient interpolation system on basis {[keys[c] for c in use]}") from exc
        sol = [x[i] for i in range(r)] + [mpmath.mpf(1)]
        big = max(abs(v) for v in sol)
        coeffs: Dict[Tuple[str, int], Fraction] = {}
        for c, v in zip(use, sol):
            val = _to_fraction(v / big / scales[c], digits)
            if val:
                coeffs[keys[c]] = val
    spec = pullback_basis(m, n, coeffs)
    exp = assemble(spec)
    for kk, v in coeffs.items():
        if exp.coefficient(kk) != v:
            raise Finding(f"pullback does not reproduce coefficient {kk}")
    report = count_zeros(exp, width=Fraction(1, 10 ** 9))
    if report.simple_count < r:
        raise Finding(f"constructed M has only {report.simple_count} certified simple zeros, expected {r}")
    return Construction(spec, report, targets, coeffs, exp)


def _to_fraction(v, digits: int) -> Fraction:
    """Round an mpf to a rational carrying `digits` significant decimal digits."""
    if v == 0:
        return Fraction(0)
    e = int(mpmath.floor(mpmath.log10(abs(v))))
    scale = digits - 1 - e
    num = int(mpmath.nint(v * mpmath.mpf(10) ** scale))
    return Fraction(num, 10 ** scale) if scale >= 0 else Fraction(num * 10 ** (-scale))
