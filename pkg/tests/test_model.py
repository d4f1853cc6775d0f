import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from pwmelnikov.model import (CurvePower, DomainError, OrbitParam, PerturbationSpec, SpecParseError,
                              h_of_u, index_set, intersection_points, random_spec, to_fraction, u_from_h)


def test_curve_power_validation():
    assert CurvePower(3).odd and CurvePower(3).k == 1
    assert not CurvePower(4).odd and CurvePower(4).k == 2
    assert CurvePower(1).degenerate
    for bad in (0, -2, 2.5, True, "3"):
        with pytest.raises(DomainError):
            CurvePower(bad)


def test_intersection_points_lie_on_curve_and_circle():
    (ax, ay), (bx, by) = intersection_points(1.0, 3)
    assert (ax, ay) == (-1.0, -1.0) and (bx, by) == (1.0, 1.0)
    assert h_of_u(1.0, 3) == 2.0
    with pytest.raises(DomainError):
        intersection_points(0.0, 2)


@given(st.floats(0.01, 5.0), st.integers(1, 7))
def test_u_from_h_inverts(u, m):
    h = h_of_u(u, m)
    assert math.isclose(u_from_h(h, m), u, rel_tol=1e-12)
    assert math.isclose(OrbitParam.from_h(h, m).h, h, rel_tol=1e-12)


def test_u_from_h_rejects_nonpositive():
    for h in (0.0, -1.0, float("inf")):
        with pytest.raises(DomainError):
            u_from_h(h, 2)


def test_to_fraction_forms():
    assert to_fraction("3/4") == Fraction(3, 4)
    assert to_fraction("-0.25") == Fraction(-1, 4)
    assert to_fraction(7) == 7
    assert to_fraction(0.1) == Fraction(1, 10)


def test_spec_degree_and_zero_pruning():
    s = PerturbationSpec(2, 2, a_plus={(1, 1): "1/2", (0, 0): 0})
    assert s.a_plus == {(1, 1): Fraction(1, 2)}
    with pytest.raises(DomainError):
        PerturbationSpec(2, 1, b_minus={(1, 1): 1})
    with pytest.raises(DomainError):
        PerturbationSpec(2, -1)


def test_index_set_size():
    for n in range(6):
        assert len(list(index_set(n))) == (n + 1) * (n + 2) // 2


@given(st.integers(1, 6), st.integers(0, 5), st.integers(0, 10 ** 6))
def test_json_round_trip(m, n, seed):
    s = random_spec(m, n, random.Random(seed))
    assert PerturbationSpec.from_json(s.to_json()) == s


def test_json_parse_error_reports_position():
    with pytest.raises(SpecParseError, match="line 1, column"):
        PerturbationSpec.from_json('{"m": 2, "n": }')
    with pytest.raises(SpecParseError):
        PerturbationSpec.from_json('{"m": 2}')
    with pytest.raises(SpecParseError):
        PerturbationSpec.from_json('{"m": 2, "n": 1, "a_plus": [[0, 0]]}')


def test_spec_linear_structure():
    a = PerturbationSpec(3, 1, a_plus={(0, 0): 1})
    b = PerturbationSpec(3, 2, b_minus={(2, 0): 2})
    c = a + b
    assert c.n == 2 and c.a_plus == {(0, 0): 1} and c.b_minus == {(2, 0): 2}
    assert (a + a.scaled(-1)).is_zero()
