"""Element模块 - H(curl²) 协调单元与标量 Lagrange 单元"""

from .curl2_element import (
    LocalElement,
    DofFunctional,
    dof_functionals,
    build_local,
    interpolate,
    eval_field,
    local_counts,
    check_degree,
    edge_test_values,
    CONDITION_LIMIT,
)
from .lagrange import LagrangeElement, lagrange_nodes

__all__ = [
    'LocalElement', 'DofFunctional', 'dof_functionals', 'build_local',
    'interpolate', 'eval_field', 'local_counts', 'check_degree',
    'edge_test_values', 'CONDITION_LIMIT',
    'LagrangeElement', 'lagrange_nodes',
]
