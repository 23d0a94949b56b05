"""
标量 Lagrange P_k 单元（用于散度约束的乘子空间）
节点顺序：3 个顶点，每条局部边 k-1 个等距内部节点（局部方向），内部节点
"""

import logging
from typing import Dict

import numpy as np
from scipy import linalg

from src.polyquad.polynomials import PolyBasis
from src.polyquad.quadrature import triangle_rule


logger = logging.getLogger(__name__)


def lagrange_nodes(vertices: np.ndarray, k: int) -> np.ndarray:
    """P_k 的等距节点，(k+1)(k+2)/2 个"""
    v = np.asarray(vertices, dtype=float).reshape(3, 2)
    nodes = [v[0], v[1], v[2]]
    for i in range(3):
        a, b = v[(i + 1) % 3], v[(i + 2) % 3]
        nodes.extend(a + (m / k) * (b - a) for m in range(1, k))
    for j in range(1, k):
        for i in range(1, k - j):
            l0 = (k - i - j) / k
            nodes.append(l0 * v[0] + (i / k) * v[1] + (j / k) * v[2])
    return np.asarray(nodes)


class LagrangeElement:
    """三角形上的 P_k Lagrange 单元"""

    def __init__(self, vertices: np.ndarray, k: int, basis: PolyBasis = None):
        self.k = int(k)
        self.vertices = np.asarray(vertices, dtype=float).reshape(3, 2)
        self.basis = basis if basis is not None else PolyBasis(self.vertices, self.k)
        self.nodes = lagrange_nodes(self.vertices, self.k)
        vander = self.basis.tables(self.nodes)[(0, 0)]
        self.coefficients = linalg.solve(vander, np.eye(len(self.nodes)))

    @property
    def n_dofs(self) -> int:
        return len(self.nodes)

    def values(self, points: np.ndarray) -> np.ndarray:
        return self.basis.tables(points)[(0, 0)] @ self.coefficients

    def gradients(self, points: np.ndarray) -> np.ndarray:
        """(npts, n_dofs, 2)"""
        tables = self.basis.tables(points, 1)
        return np.stack([tables[(1, 0)] @ self.coefficients, tables[(0, 1)] @ self.coefficients], axis=-1)

    def stiffness(self) -> np.ndarray:
        pts, w = triangle_rule(2 * self.k).map_triangle(self.vertices)
        g = self.gradients(pts)
        return np.einsum('q,qic,qjc->ij', w, g, g)

    def coupling(self, vector_values: np.ndarray, weights: np.ndarray, points: np.ndarray) -> np.ndarray:
        """(∇q_j, v_i)：vector_values 为 (npts, n_vec, 2)，返回 (n_dofs, n_vec)"""
        g = self.gradients(points)
        return np.einsum('q,qjc,qic->ji', weights, g, vector_values)
