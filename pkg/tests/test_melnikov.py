import math
import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from pwmelnikov import melnikov as mk
from pwmelnikov import oracle
from pwmelnikov.model import DomainError, PerturbationSpec, h_of_u, random_spec

ORACLE_CASES = [(3, 2), (3, 4), (5, 2), (2, 2), (2, 3), (4, 3)]

fractions = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@given(st.integers(1, 6), st.integers(0, 4), st.integers(0, 10 ** 6), fractions, fractions)
def test_linearity(m, n, seed, alpha, beta):
    rng = random.Random(seed)
    s1, s2 = random_spec(m, n, rng), random_spec(m, n, rng)
    lhs = mk.assemble(s1.scaled(alpha) + s2.scaled(beta))
    rhs = mk.assemble(s1).scale(alpha) + mk.assemble(s2).scale(beta)
    assert lhs == rhs


@pytest.mark.parametrize("m,n", ORACLE_CASES)
def test_oracle_agreement(m, n):
    rng = random.Random(1000 * m + n)
    for _ in range(50):
        s = random_spec(m, n, rng)
        e = mk.assemble(s)
        for u in (0.4, 0.9, 1.3):
            q = oracle.melnikov_quadrature(s, u).value
            scale = (1.0 + math.sqrt(h_of_u(u, m))) ** (n + 1)
            assert oracle.relative_error(e.evaluate(u), q, scale) < 1e-7, (s.to_json(), u)


def test_frozen_melnikov_values():
    # quadrature values frozen from pwmelnikov.oracle
    s = PerturbationSpec.from_json('{"m": 2, "n": 2, "a_plus": [[0, 0, "1/2"], [1, 1, "-3"]], '
                                   '"a_minus": [[2, 0, "2"]], "b_plus": [[0, 1, "1"], [1, 0, "-1/3"]], '
                                   '"b_minus": [[0, 2, "5/4"]]}')
    e = mk.assemble(s)
    for u, v in ((0.4, 0.024651147994411288), (1.0, -3.5958703398717713), (1.7, -42.6200631968031)):
        assert e.evaluate(u) == pytest.approx(v, rel=1e-9)


def test_four_u_example():
    s = PerturbationSpec(3, 0, b_plus={(0, 0): 1}, b_minus={(0, 0): -1})
    e = mk.assemble(s)
    assert e.mono == {1: 4} and not e.ring and not e.arc
    assert e.to_json_obj()["mono"] == [[1, "4"]]


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_equal_fields_and_zero_perturbation_give_zero(m):
    assert mk.assemble(PerturbationSpec(m, 3)).is_zero()
    # a Hamiltonian-preserving perturbation identical on both sides: p = H_y, q = -H_x for H = x^2 y
    fam_a = {(2, 0): 1}
    fam_b = {(1, 1): -2}
    s = PerturbationSpec(m, 2, fam_a, fam_a, fam_b, fam_b)
    assert mk.assemble(s).is_zero()


@given(st.integers(1, 6), st.integers(0, 5), st.integers(0, 10 ** 6))
def test_basis_containment(m, n, seed):
    e = mk.assemble(random_spec(m, n, random.Random(seed)))
    assert set(e.support) <= set(mk.generating_basis(m, n).descriptors)


@given(st.integers(1, 5), st.integers(0, 4), st.integers(0, 10 ** 6))
def test_reduced_coordinates_round_trip(m, n, seed):
    s = random_spec(m, n, random.Random(seed))
    rc = mk.reduce_coefficients(s)
    assert mk.assemble_reduced(rc, m, n) == mk.assemble(s)
    back = mk.pullback(rc, m, n)
    assert mk.assemble(back) == mk.assemble(s)


@pytest.mark.parametrize("m,n", [(1, 1), (1, 3), (3, 0), (3, 2), (3, 3), (3, 4), (5, 2), (7, 3)])
def test_odd_dimension_formula(m, n):
    assert mk.generating_basis(m, n).dimension == mk.closed_form_dimension(m, n)


@pytest.mark.parametrize("m,n,d", [(2, 1, 4), (2, 2, 5), (2, 3, 8), (4, 3, 10)])
def test_even_dimensions(m, n, d):
    # frozen from the exact rank computation
    assert mk.generating_basis(m, n).dimension == d


def test_region_boundaries():
    assert [mk.classify_region(3, n) for n in range(7)] == ["D1", "D1", "D2", "D2", "D2", "D3", "D3"]
    assert [mk.classify_region(4, n) for n in range(8)] == ["D4"] * 4 + ["D5"] * 2 + ["D6"] * 2
    with pytest.raises(DomainError):
        mk.classify_region(3, -1)


@pytest.mark.parametrize("m", [2, 3, 4, 5])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_series_matches_numeric_near_zero(m, n):
    rng = random.Random(31 * m + n)
    for _ in range(5):
        e = mk.assemble(random_spec(m, n, rng))
        if e.is_zero():
            continue
        terms = mk.expand_series(e, 2 * m + 4 + 3 * (m - 1) + 6)
        for u in (1e-2, 1e-4, 1e-8, 1e-12):
            assert abs(mk.series_value(terms, u) - e.evaluate(u)) < 1e-12


def test_series_validation():
    with pytest.raises(DomainError):
        mk.expand_series(mk.MelnikovExpansion(2, 1, {1: 1}), 0)


@pytest.mark.parametrize("m", range(1, 8))
def test_jacobian_nonsingular(m):
    for n in range(7):
        info = mk.independence_jacobian(m, n)
        assert info.determinant != 0 and not info.findings, (m, n)
        assert len(info.rows) == len(info.columns) == mk.generating_basis(m, n).dimension


@pytest.mark.parametrize("m", [1, 3, 5, 7])
@pytest.mark.parametrize("n", range(5))
def test_jacobian_structure_odd(m, n):
    info = mk.independence_jacobian(m, n)
    rows, cols = list(info.rows), list(info.columns)
    for l in range(n // 2 + 1):
        assert info.matrix[rows.index(("u", 2 * l + 1))][cols.index(("rho", (2 * l, 0)))] == Fraction(2, 2 * l + 1)
    for name, (i, j) in cols:
        if name == "gamma":
            c, e = mk.phi_coefficient(i, j, m)
            assert c == Fraction(-2, j + 1)
            assert info.matrix[rows.index(("u", e))][cols.index((name, (i, j)))] == c


def test_pullback_basis_hits_target():
    info = mk.generating_basis(2, 2)
    target = {k: Fraction(idx + 1, 3) for idx, k in enumerate(info.descriptors)}
    e = mk.assemble(mk.pullback_basis(2, 2, target))
    assert all(e.coefficient(k) == v for k, v in target.items())


def test_expansion_json_round_trip():
    e = mk.assemble(random_spec(4, 3, random.Random(5)))
    assert mk.MelnikovExpansion.from_json_obj(e.to_json_obj()) == e


def test_evaluate_array_consistent():
    e = mk.assemble(random_spec(2, 2, random.Random(9)))
    us = [0.5, 1.0, 1.5]
    for u, v in zip(us, e.evaluate_array(us)):
        assert v == pytest.approx(e.evaluate(u), rel=1e-9, abs=1e-12)


class TestArcFunction:
    def test_value_at_zero(self):
        assert mk.ArcFunction(2)(0.0) == pytest.approx(math.pi / 4)

    def test_odd_m_rejected(self):
        with pytest.raises(DomainError):
            mk.ArcFunction(3)

    @pytest.mark.parametrize("m", [2, 4])
    def test_series_coefficients(self, m):
        s = dict(mk.ArcFunction(m).series(5 * m))
        assert s[0] == mk.QPi(Fraction(0), Fraction(1, 4))
        assert s[3 * m - 3] == mk.QPi(Fraction(-1, 3))
        assert s[5 * m - 5] == mk.QPi(Fraction(2, 5))

    @pytest.mark.parametrize("m", [2, 4, 6])
    def test_derivative(self, m):
        T = mk.ArcFunction(m)
        with mpmath.workdps(40):
            for u in (0.3, 1.0, 1.7):
                d = float(mpmath.diff(lambda x: T(x, dps=200), u))
                assert T.derivative(u) == pytest.approx(d, rel=1e-12)
