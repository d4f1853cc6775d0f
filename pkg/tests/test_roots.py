import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pwmelnikov import roots
from pwmelnikov.melnikov import MelnikovExpansion, assemble
from pwmelnikov.model import DomainError, random_spec


def test_positive_function_has_no_zeros():
    rep = roots.count_zeros(MelnikovExpansion(3, 0, {1: 4}))
    assert rep.count == 0 and rep.rigor == "exact" and rep.complete


def test_identically_zero_rejected():
    with pytest.raises(DomainError):
        roots.count_zeros(MelnikovExpansion(3, 1))


def test_sqrt_pi_zero():
    # pi*h with m = 1 is 2 pi u^2; M = u^4 - 2 pi u^2 vanishes at sqrt(2 pi)
    e = MelnikovExpansion(1, 3, {4: 1}, {0: -1})
    rep = roots.count_zeros(e, width=Fraction(1, 10 ** 10))
    assert rep.count == 1
    assert rep.intervals[0].mid == pytest.approx(math.sqrt(2 * math.pi), abs=1e-9)


def test_even_m_arc_example():
    # M = T(u) h - pi h / 8 vanishes where T = pi/8
    e = MelnikovExpansion(2, 1, {}, {0: Fraction(-1, 8)}, {0: 1})
    rep = roots.count_zeros(e, width=Fraction(1, 10 ** 10))
    assert rep.count == 1 and rep.rigor in ("exact", "interval-certified")
    u = rep.intervals[0].mid
    v = u  # m = 2: T = (v/(1+v^2) + atan(1/v)) / 2
    assert 0.5 * (v / (1 + v * v) + math.atan2(1, v)) == pytest.approx(math.pi / 8, abs=1e-9)


@pytest.mark.parametrize("m,n", [(3, 2), (3, 3), (5, 2), (2, 2), (2, 3)])
def test_random_specs_within_bounds_and_scan(m, n):
    rng = random.Random(77 * m + n)
    us = np.geomspace(1e-3, 50, 20001)
    ub = roots.bound_Z(m, n).upper
    for _ in range(40):
        e = assemble(random_spec(m, n, rng))
        if e.is_zero():
            continue
        rep = roots.count_zeros(e)
        assert rep.complete and rep.count <= ub
        if rep.upper is not None:
            assert rep.count <= rep.upper
        v = e.evaluate_array(us)
        changes = int(np.sum(np.sign(v[1:]) != np.sign(v[:-1])))
        # a float scan can miss close pairs but never invent sign changes
        odd = sum(1 for z in rep.intervals if z.multiplicityParity != "even")
        assert changes <= odd and (odd - changes) % 2 == 0


def test_bound_table_values():
    expect = {(1, n): (n, n) for n in range(1, 7)}
    expect.update({(2, 1): (3, 3), (2, 2): (4, 4), (3, 2): (5, 6), (3, 3): (6, 9), (3, 4): (9, 12),
                   (4, 1): (3, 4), (4, 2): (5, 7), (4, 3): (9, 14), (2, 3): (6, 8)})
    for (m, n), (lo, hi) in expect.items():
        b = roots.bound_Z(m, n)
        assert (b.lower, b.upper) == (lo, hi), (m, n)
        assert not b.findings


@pytest.mark.parametrize("m", range(1, 7))
def test_lower_not_above_upper(m):
    for n in range(0, 7):
        b = roots.bound_Z(m, n)
        if n == 0:
            # the bracket [(n-1)/2] goes negative at n = 0 and is flagged
            assert b.findings
            continue
        assert not b.findings
        if b.lower is not None:
            assert b.lower <= b.upper


def test_bound_validation():
    with pytest.raises(DomainError):
        roots.bound_Z(3, -1)
    with pytest.raises(DomainError):
        roots.bound_Z(0, 2)


@pytest.mark.parametrize("r1,r2", [(r1, r2) for r1 in range(1, 11) for r2 in range(r1 + 1, 11)])
def test_wronskian_closed_form(r1, r2):
    for u in (0.5, 2.0):
        w = roots.wronskian_monomials((0, r1, r2), u)
        expect = r1 * r2 * (r2 - r1) * u ** (r1 + r2 - 3)
        assert w == pytest.approx(expect, rel=1e-12)
        assert roots.wronskian_closed_form((0, r1, r2), u) == pytest.approx(expect, rel=1e-12)


@given(st.lists(st.integers(0, 40), min_size=1, max_size=8, unique=True))
def test_ect_certify(exps):
    assert roots.ect_certify(sorted(exps))


def test_exponent_validation():
    for bad in ([1, 1], [3, 2], [-1, 2]):
        with pytest.raises(DomainError):
            roots.ect_certify(bad)


@pytest.mark.parametrize("m,n,count", [(3, 2, 5), (2, 1, 3), (3, 0, 1), (1, 3, 3)])
def test_construct_round_trip(m, n, count):
    c = roots.construct_max_zeros(m, n)
    e = assemble(c.spec)
    assert e == c.expansion
    assert all(e.coefficient(k) == v for k, v in c.coefficients.items())
    assert c.report.simple_count >= count
    for z, t in zip(c.report.intervals, c.targets):
        assert z.mid == pytest.approx(t, rel=1e-6)


def test_construct_prescribed_targets():
    c = roots.construct_max_zeros(2, 1, [0.6, 1.0, 1.5])
    assert [round(z.mid, 8) for z in c.report.intervals] == [0.6, 1.0, 1.5]


def test_construct_rejects_too_many_targets():
    with pytest.raises(DomainError):
        roots.construct_max_zeros(3, 0, [0.5, 1.0, 2.0])
    with pytest.raises(DomainError):
        roots.construct_max_zeros(3, 2, [1.0, 0.5])


def test_default_targets_geometric():
    t = roots.default_targets(4)
    assert 0.3 < t[0] < t[-1] < 3.0
    r = [b / a for a, b in zip(t, t[1:])]
    assert max(r) == pytest.approx(min(r))


def test_report_json():
    rep = roots.construct_max_zeros(3, 2).report
    obj = rep.to_json_obj()
    assert obj["count"] == 5 and obj["rigor"] == "exact"
    assert all(Fraction(z["lo"]) < Fraction(z["hi"]) for z in obj["intervals"])
