"""
误差范数：L2、curl、curl² 分量与 H(curl²) 范数
"""

import logging
from typing import Dict, Optional

import numpy as np

from src.polyquad.analytic import VectorField
from src.polyquad.quadrature import triangle_rule
from src.spaces.field import DiscreteField


logger = logging.getLogger(__name__)


def h_curl2_error(field: DiscreteField, exact: VectorField, degree: Optional[int] = None) -> Dict[str, float]:
    """
    计算 u - u_h 的误差

    Returns:
        {'l2', 'curl', 'curl2', 'hcurl2'}，其中 hcurl2² = l2² + curl² + curl2²
    """
    k = field.assembler.k
    rule = triangle_rule(min(degree or 2 * k + 6, 25))
    sums = {'l2': 0.0, 'curl': 0.0, 'curl2': 0.0}
    quantities = {'l2': 'value', 'curl': 'curl', 'curl2': 'curl2'}
    for t in range(field.mesh.n_triangles):
        pts, w = rule.map_triangle(field.mesh.triangle_points(t))
        for name, quantity in quantities.items():
            diff = np.asarray(exact.evaluate(pts, quantity)) - field.on_triangle(t, pts, quantity)
            sq = diff ** 2 if diff.ndim == 1 else (diff ** 2).sum(axis=1)
            sums[name] += float(w @ sq)
    errors = {name: float(np.sqrt(value)) for name, value in sums.items()}
    errors['hcurl2'] = float(np.sqrt(sum(sums.values())))
    logger.debug(f"误差: {errors}")
    return errors


def interpolation_error(assembler, exact: VectorField, degree: Optional[int] = None) -> Dict[str, float]:
    """插值 Π_h u 的误差"""
    interpolant = DiscreteField(assembler, assembler.interpolate(exact))
    return h_curl2_error(interpolant, exact, degree)
