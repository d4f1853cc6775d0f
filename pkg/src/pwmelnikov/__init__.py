"""First-order Melnikov analysis of a linear center switched along y = x^m."""
from .model import CurvePower, DomainError, OrbitParam, PerturbationSpec, SpecParseError, h_of_u, u_from_h
from .abelian import IntegralExpr, reduce, reduce_I, reduce_J
from .melnikov import (ArcFunction, Finding, MelnikovExpansion, assemble, classify_region, expand_series,
                       generating_basis, independence_jacobian, pullback, reduce_coefficients)
from .oracle import integral_quadrature, melnikov_quadrature
from .roots import ZeroReport, bound_Z, construct_max_zeros, count_zeros, ect_certify, wronskian_monomials
from .simulate import CycleFinding, PiecewiseState, displacement_map, find_limit_cycles, flow

__version__ = "0.1.0"
