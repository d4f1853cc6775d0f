import math

import pytest

from pwmelnikov import oracle
from pwmelnikov.model import DomainError, PerturbationSpec

PAIRS = [(0, 0), (1, 0), (0, 1), (2, 0), (0, 2), (2, 1), (1, 2), (3, 3), (4, 2), (2, 4)]


@pytest.mark.parametrize("i,j", PAIRS)
@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_arcs_add_up_to_circle(i, j, m):
    u = 0.8
    r = math.sqrt(u * u + u ** (2 * m))
    tot = oracle.integral_quadrature(i, j, u, m, "plus").value + oracle.integral_quadrature(i, j, u, m, "minus").value
    assert tot == pytest.approx(oracle.circle_integral(i, j, r), abs=1e-11 * max(1.0, r) ** (i + j + 1))


def test_circle_integral_known_values():
    # clockwise integral of y dx is the enclosed area
    assert oracle.circle_integral(0, 1, 2.0) == pytest.approx(4 * math.pi)
    assert oracle.circle_integral(1, 0, 2.0) == 0.0


@pytest.mark.parametrize("m", [1, 2, 3, 6])
@pytest.mark.parametrize("u", [0.3, 1.0, 2.0])
def test_switching_ratio_is_one(m, u):
    assert oracle.switching_ratio(u, m) == pytest.approx(1.0, abs=1e-14)


def test_switching_ratio_detects_inconsistent_geometry():
    skew = lambda x, y: (2.0 * x, 3.0 * y)
    assert abs(oracle.switching_ratio(0.7, 3, grad_plus=skew) - 1.0) > 0.1


def test_melnikov_examples():
    four_u = PerturbationSpec(3, 0, b_plus={(0, 0): 1}, b_minus={(0, 0): -1})
    assert oracle.melnikov_quadrature(four_u, 1.0).value == pytest.approx(4.0, abs=1e-12)
    assert oracle.melnikov_quadrature(four_u, 0.25).value == pytest.approx(1.0, abs=1e-12)


def test_quadrature_result_fields():
    r = oracle.integral_quadrature(2, 2, 0.9, 3)
    assert r.converged and r.evaluations > 0 and r.errorEstimate >= 0


def test_domain_errors():
    with pytest.raises(DomainError):
        oracle.integral_quadrature(0, 0, -1.0, 2)
    with pytest.raises(DomainError):
        oracle.integral_quadrature(0, 0, 1.0, 2, "left")


def test_relative_error_floor():
    assert oracle.relative_error(1e-20, 0.0, 1.0) < 1e-7
    assert oracle.relative_error(1.0 + 1e-9, 1.0, 1.0) == pytest.approx(1e-9, rel=1e-3)
