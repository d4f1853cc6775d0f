import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from pwmelnikov import _sturm as S


def _distinct_positive_sympy(coeffs):
    u = sympy.Symbol("u")
    p = sympy.Poly(sum(sympy.Rational(c.numerator, c.denominator) * u ** e for e, c in coeffs.items()), u)
    return len({r for r in sympy.real_roots(p) if r > 0})


@given(st.dictionaries(st.integers(0, 9), st.fractions(-6, 6, max_denominator=5), min_size=1, max_size=8))
def test_rational_count_matches_sympy(coeffs):
    coeffs = {e: c for e, c in coeffs.items() if c}
    if not coeffs:
        return
    p = S.bipoly(coeffs, {})
    assert S.count_distinct_positive(p) == _distinct_positive_sympy(coeffs)
    ivs, _, _ = S.isolate_positive(p)
    assert len(ivs) == _distinct_positive_sympy(coeffs)


def test_root_with_pi_isolated():
    # u^2 - pi has the single positive root sqrt(pi)
    p = S.bipoly({2: Fraction(1)}, {0: Fraction(-1)})
    ivs, B, chain = S.isolate_positive(p)
    assert len(ivs) == 1
    lo, hi = S.refine(chain, ivs[0].lo, ivs[0].hi, Fraction(1, 10 ** 12))
    assert float(lo) <= 3.141592653589793 ** 0.5 <= float(hi)


def test_double_root_reported_even():
    # (u - 1)^2 (u - 2)
    p = S.bipoly({0: Fraction(-2), 1: Fraction(5), 2: Fraction(-4), 3: Fraction(1)}, {})
    ivs, _, _ = S.isolate_positive(p)
    assert [z.kind for z in ivs] == ["even", "simple-certified"]


def test_sign_at_pi():
    from flint import fmpq_poly
    assert S.sign_at_pi(fmpq_poly([-22, 7])) < 0  # 22/7 overestimates pi
    assert S.sign_at_pi(fmpq_poly([-311, 99])) > 0  # 311/99 underestimates pi
    assert S.sign_at_pi(fmpq_poly([-355, 113])) < 0  # 113 pi - 355
    assert S.sign_qpi(Fraction(-3), Fraction(1)) == 1


def test_zero_polynomial_rejected():
    with pytest.raises(ValueError):
        S.isolate_positive([])


def test_random_high_degree_against_sympy():
    rng = random.Random(3)
    for _ in range(10):
        coeffs = {e: Fraction(rng.randint(-20, 20), rng.randint(1, 9)) for e in range(16)}
        coeffs = {e: c for e, c in coeffs.items() if c}
        assert S.count_distinct_positive(S.bipoly(coeffs, {})) == _distinct_positive_sympy(coeffs)
