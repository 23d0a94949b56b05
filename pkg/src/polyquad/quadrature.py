"""
三角形与线段上的求积公式
三角形采用折叠 Gauss-Jacobi 张量积公式，线段采用 Gauss-Legendre 公式
"""

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from src.exceptions import QuadratureDegreeError


logger = logging.getLogger(__name__)

MAX_DEGREE = 25


@dataclass(frozen=True)
class QuadratureRule:
    """
    求积公式

    points 为重心坐标：三角形为 (n, 3)，线段为 (n, 2)；
    weights 归一化到参考单元测度（参考三角形 1/2，单位区间 1）
    """
    points: np.ndarray
    weights: np.ndarray
    degree: int

    @property
    def n_points(self) -> int:
        return len(self.weights)

    def map_triangle(self, vertices: np.ndarray):
        """
        映射到物理三角形

        Args:
            vertices: (3, 2) 顶点坐标

        Returns:
            (物理点 (n, 2), 物理权重 (n,))
        """
        vertices = np.asarray(vertices, dtype=float)
        d1 = vertices[1] - vertices[0]
        d2 = vertices[2] - vertices[0]
        jac = abs(d1[0] * d2[1] - d1[1] * d2[0])
        return self.points @ vertices, self.weights * jac

    def map_segment(self, a: np.ndarray, b: np.ndarray):
        """映射到线段 a->b，返回 (物理点, 物理权重, 参数 t)"""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        t = self.points[:, 1]
        length = float(np.hypot(*(b - a)))
        return a + t[:, None] * (b - a), self.weights * length, t


def _check_degree(exact_degree: int) -> int:
    exact_degree = int(exact_degree)
    if not 1 <= exact_degree <= MAX_DEGREE:
        raise QuadratureDegreeError(
            f"求积精度 {exact_degree} 超出支持范围 [1, {MAX_DEGREE}]"
        )
    return exact_degree


@lru_cache(maxsize=None)
def triangle_rule(exact_degree: int) -> QuadratureRule:
    """
    参考三角形 (0,0)-(1,0)-(0,1) 上精度为 exact_degree 的求积公式

    Args:
        exact_degree: 代数精度 (1..25)

    Returns:
        QuadratureRule（点为重心坐标）
    """
    exact_degree = _check_degree(exact_degree)
    n = (exact_degree + 2) // 2
    xl, wl = special.roots_legendre(n)
    xj, wj = special.roots_jacobi(n, 1, 0)
    s = (xj + 1) / 2
    t = (xl + 1) / 2
    # 2 来自 Legendre 映射，4 来自 Jacobi(1,0) 映射
    w = np.outer(wj, wl).ravel() / 8
    x = np.outer(s, np.ones_like(t)).ravel()
    y = np.outer(1 - s, t).ravel()
    bary = np.stack([1 - x - y, x, y], axis=1)
    logger.debug(f"三角形求积: 精度 {exact_degree}, {len(w)} 个点")
    return QuadratureRule(bary, w, exact_degree)


@lru_cache(maxsize=None)
def edge_rule(exact_degree: int) -> QuadratureRule:
    """[0, 1] 上精度为 exact_degree 的 Gauss-Legendre 公式"""
    exact_degree = _check_degree(exact_degree)
    n = (exact_degree + 2) // 2
    x, w = special.roots_legendre(n)
    t = (x + 1) / 2
    return QuadratureRule(np.stack([1 - t, t], axis=1), w / 2, exact_degree)


def gauss_lobatto_interior(n_interior: int) -> np.ndarray:
    """
    [0, 1] 上 Gauss-Lobatto 公式的内部节点（共 n_interior+2 个节点去掉两个端点）

    节点为 P'_{n_interior+1} 的根
    """
    if n_interior <= 0:
        return np.zeros(0)
    deriv = np.polynomial.legendre.Legendre.basis(n_interior + 1).deriv()
    roots = np.sort(np.real(deriv.roots()))
    return (roots + 1) / 2
