"""
三角形上的多项式空间
完全多项式空间 P_k（L2 正交化）、齐次多项式空间与内部矩量空间 D
所有多项式都以单元局部坐标 ξ = (x - 重心) / 直径 表示，求导是精确的
"""

import logging
from typing import Dict, List, Optional, Tuple

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import linalg, special

from src.polyquad.quadrature import triangle_rule


logger = logging.getLogger(__name__)

MAX_DERIVATIVE_ORDER = 4


def graded_exponents(k: int) -> np.ndarray:
    """按总次数分级排列的指数对 (p, q)，次数 ≤ k，共 (k+1)(k+2)/2 个"""
    return np.array([(d - q, q) for d in range(k + 1) for q in range(d + 1)], dtype=np.int64)


def derivative_multi_indices(max_order: int) -> List[Tuple[int, int]]:
    """总阶数 ≤ max_order 的偏导指标 (a, b)，表示 ∂x^a ∂y^b"""
    if not 0 <= max_order <= MAX_DERIVATIVE_ORDER:
        raise ValueError(f"导数阶数必须在 0..{MAX_DERIVATIVE_ORDER} 之间，收到 {max_order}")
    return [(o - b, b) for o in range(max_order + 1) for b in range(o + 1)]


class LocalFrame:
    """单元局部坐标系：ξ = (x - center) / scale"""

    def __init__(self, center: np.ndarray, scale: float):
        self.center = np.asarray(center, dtype=float)
        self.scale = float(scale)

    @classmethod
    def of_triangle(cls, vertices: np.ndarray) -> 'LocalFrame':
        vertices = np.asarray(vertices, dtype=float)
        d = vertices[[1, 2, 0]] - vertices
        return cls(vertices.mean(axis=0), float(np.hypot(d[:, 0], d[:, 1]).max()))

    def to_local(self, points: np.ndarray) -> np.ndarray:
        return (np.asarray(points, dtype=float).reshape(-1, 2) - self.center) / self.scale


def monomial_tables(
    exponents: np.ndarray,
    xi: np.ndarray,
    scale: float,
    max_order: int,
) -> Dict[Tuple[int, int], np.ndarray]:
    """
    单项式 ξ^p η^q 及其关于物理坐标的偏导数表

    Returns:
        {(a, b): (npts, nmono) 数组}
    """
    px = exponents[:, 0][None, :]
    py = exponents[:, 1][None, :]
    x = xi[:, 0][:, None]
    y = xi[:, 1][:, None]
    tables = {}
    for a, b in derivative_multi_indices(max_order):
        coef = special.perm(px, a) * special.perm(py, b)
        ex = np.maximum(px - a, 0)
        ey = np.maximum(py - b, 0)
        tables[(a, b)] = coef * x ** ex * y ** ey / scale ** (a + b)
    return tables


class PolyBasis:
    """
    三角形上 P_k 的 L2 正交基

    以分级单项式为起点，用 Gram 矩阵的 Cholesky 分解正交化（两遍，消除舍入）
    """

    def __init__(self, vertices: np.ndarray, k: int):
        self.vertices = np.asarray(vertices, dtype=float).reshape(3, 2)
        self.k = int(k)
        self.frame = LocalFrame.of_triangle(self.vertices)
        self.exponents = graded_exponents(self.k)
        self.coefficients = self._orthonormalize()

    @property
    def size(self) -> int:
        return (self.k + 1) * (self.k + 2) // 2

    def _orthonormalize(self) -> np.ndarray:
        rule = triangle_rule(2 * self.k)
        pts, w = rule.map_triangle(self.vertices)
        raw = monomial_tables(self.exponents, self.frame.to_local(pts), self.frame.scale, 0)[(0, 0)]
        coeffs = np.eye(self.size)
        for _ in range(2):
            values = raw @ coeffs
            gram = values.T @ (w[:, None] * values)
            chol = linalg.cholesky(gram, lower=True)
            coeffs = coeffs @ linalg.solve_triangular(chol, np.eye(self.size), lower=True).T
        return coeffs

    def tables(self, points: np.ndarray, max_order: int = 0) -> Dict[Tuple[int, int], np.ndarray]:
        raw = monomial_tables(self.exponents, self.frame.to_local(points), self.frame.scale, max_order)
        return {key: value @ self.coefficients for key, value in raw.items()}

    def gram(self, degree: Optional[int] = None) -> np.ndarray:
        """数值 Gram 矩阵（正交基时应为单位阵）"""
        rule = triangle_rule(degree or 2 * self.k)
        pts, w = rule.map_triangle(self.vertices)
        values = self.tables(pts)[(0, 0)]
        return values.T @ (w[:, None] * values)


def eval_basis(basis: PolyBasis, points: np.ndarray, max_derivative_order: int = 0) -> Dict[Tuple[int, int], np.ndarray]:
    """
    计算基函数及其偏导数在给定点的值

    Args:
        basis: PolyBasis
        points: (n, 2) 物理坐标
        max_derivative_order: 0..4

    Returns:
        {(a, b): (n, size)}，(a, b) 表示 ∂x^a ∂y^b
    """
    return basis.tables(points, max_derivative_order)


class HomogeneousBasis:
    """d 次齐次多项式空间的单项式基 ξ^(d-i) η^i, i = 0..d"""

    def __init__(self, d: int):
        if d < 0:
            raise ValueError(f"齐次多项式次数必须非负，收到 {d}")
        self.d = int(d)
        self.exponents = np.array([(self.d - i, i) for i in range(self.d + 1)], dtype=np.int64)

    @property
    def size(self) -> int:
        return self.d + 1

    def evaluate(self, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float).reshape(-1, 2)
        return xi[:, :1] ** self.exponents[:, 0] * xi[:, 1:] ** self.exponents[:, 1]

    def coefficient_arrays(self, size: int) -> List[np.ndarray]:
        """每个成员的 polyval2d 系数数组"""
        arrays = []
        for p, q in self.exponents:
            c = np.zeros((size, size))
            c[p, q] = 1.0
            arrays.append(c)
        return arrays


class DSpace:
    """
    内部矩量测试空间（向量场），以局部坐标 ξ 表示

    k = 4:  P̃0 ξ ⊕ P̃1 ξ ⊕ P̃2 ξ
    k ≥ 5:  P_{k-5}² ⊕ P̃_{k-5} ξ ⊕ P̃_{k-4} ξ ⊕ P̃_{k-3} ξ ⊕ P̃_{k-2} ξ
    """

    def __init__(self, k: int):
        if k < 4:
            raise ValueError(f"D 空间要求 k ≥ 4，收到 k={k}")
        self.k = int(k)
        size = self.k + 1
        members: List[Tuple[np.ndarray, np.ndarray]] = []

        if self.k >= 5:
            for p, q in graded_exponents(self.k - 5):
                c = np.zeros((size, size))
                c[p, q] = 1.0
                members.append((c, np.zeros_like(c)))
            for p, q in graded_exponents(self.k - 5):
                c = np.zeros((size, size))
                c[p, q] = 1.0
                members.append((np.zeros_like(c), c))

        for d in range(max(self.k - 5, 0), self.k - 1):
            for c in HomogeneousBasis(d).coefficient_arrays(size):
                # 乘以 ξ = (ξ, η)
                members.append((_shift(c, 1, 0), _shift(c, 0, 1)))

        self.members = members

    @property
    def dim(self) -> int:
        return len(self.members)

    def evaluate(self, xi: np.ndarray) -> np.ndarray:
        """在局部坐标点上求值，返回 (npts, dim, 2)"""
        xi = np.asarray(xi, dtype=float).reshape(-1, 2)
        out = np.empty((len(xi), self.dim, 2))
        for j, (cx, cy) in enumerate(self.members):
            out[:, j, 0] = npoly.polyval2d(xi[:, 0], xi[:, 1], cx)
            out[:, j, 1] = npoly.polyval2d(xi[:, 0], xi[:, 1], cy)
        return out

    def gram_rank(self, vertices: np.ndarray, tol: float = 1e-10) -> int:
        """在给定三角形上 L2 Gram 矩阵的数值秩"""
        vertices = np.asarray(vertices, dtype=float)
        frame = LocalFrame.of_triangle(vertices)
        pts, w = triangle_rule(2 * self.k).map_triangle(vertices)
        values = self.evaluate(frame.to_local(pts))
        gram = np.einsum('q,qic,qjc->ij', w, values, values)
        return int(np.linalg.matrix_rank(gram, tol=tol * np.abs(gram).max()))


def _shift(c: np.ndarray, dx: int, dy: int) -> np.ndarray:
    """系数数组乘以 ξ^dx η^dy"""
    out = np.zeros_like(c)
    out[dx:, dy:] = c[:c.shape[0] - dx, :c.shape[1] - dy]
    return out


def d_space(k: int) -> DSpace:
    """构造内部矩量空间 D（k ≥ 4）"""
    return DSpace(k)
