"""Polyquad模块 - 多项式空间、求积公式与解析场"""

from .quadrature import QuadratureRule, triangle_rule, edge_rule, gauss_lobatto_interior
from .polynomials import (
    PolyBasis,
    HomogeneousBasis,
    DSpace,
    LocalFrame,
    eval_basis,
    d_space,
    graded_exponents,
    monomial_tables,
)
from .analytic import (
    VectorField,
    PolynomialField,
    StreamFunctionField,
    CallableField,
    QUANTITIES,
    bubble_stream_function,
    manufactured_solution,
)

__all__ = [
    'QuadratureRule', 'triangle_rule', 'edge_rule', 'gauss_lobatto_interior',
    'PolyBasis', 'HomogeneousBasis', 'DSpace', 'LocalFrame',
    'eval_basis', 'd_space', 'graded_exponents', 'monomial_tables',
    'VectorField', 'PolynomialField', 'StreamFunctionField', 'CallableField',
    'QUANTITIES', 'bubble_stream_function', 'manufactured_solution',
]
