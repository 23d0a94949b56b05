"""
H(curl²) 协调三角形单元
自由度泛函、逐单元对偶基、单可解性检查、插值与精确场求值

局部自由度顺序：
  [3 个顶点 curl 值][每条边 k-2 个内部 curl 节点][每条边 k+1 个切向矩][(k-1)(k-2) 个内部矩]
局部边 i 与顶点 i 相对，局部方向为 vertices[(i+1)%3] -> vertices[(i+2)%3]
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from numpy.polynomial import legendre
from scipy import linalg

from src.exceptions import UnisolvenceError
from src.polyquad.analytic import VectorField, check_quantity
from src.polyquad.polynomials import DSpace, PolyBasis
from src.polyquad.quadrature import edge_rule, gauss_lobatto_interior, triangle_rule


logger = logging.getLogger(__name__)

MIN_DEGREE = 4
MAX_DEGREE = 8
CONDITION_LIMIT = 1e13

# 各物理量需要的最高导数阶
_DERIVATIVE_ORDER = {'value': 0, 'curl': 1, 'curl2': 2, 'curl3': 3, 'curl4': 4, 'div': 1}


def check_degree(k: int) -> int:
    k = int(k)
    if not MIN_DEGREE <= k <= MAX_DEGREE:
        raise ValueError(f"单元次数必须在 {MIN_DEGREE}..{MAX_DEGREE} 之间，收到 k={k}")
    return k


def local_counts(k: int) -> Dict[str, int]:
    """各类自由度个数"""
    return {
        'vertex_curl': 3,
        'edge_curl': k - 2,
        'edge_moment': k + 1,
        'interior': (k - 1) * (k - 2),
        'total': (k + 1) * (k + 2),
    }


def edge_test_values(t: np.ndarray, k: int) -> np.ndarray:
    """边上切向矩的测试函数 sqrt(2j+1) P_j(2t-1), j = 0..k，返回 (len(t), k+1)"""
    scale = np.sqrt(2 * np.arange(k + 1) + 1)
    return legendre.legvander(2 * np.asarray(t) - 1, k) * scale


@dataclass(frozen=True)
class DofFunctional:
    """
    单个自由度泛函

    kind: curl_point | edge_moment | interior_moment
    """
    kind: str
    index: int
    point: Optional[Tuple[float, float]] = None
    owner: Optional[str] = None
    edge: Optional[int] = None
    test_index: Optional[int] = None


def dof_functionals(vertices: np.ndarray, k: int) -> List[DofFunctional]:
    """
    按规范顺序列出三角形上的全部自由度泛函

    Args:
        vertices: (3, 2) 逆时针顶点坐标
        k: 多项式次数 (≥ 4)
    """
    k = check_degree(k)
    vertices = np.asarray(vertices, dtype=float).reshape(3, 2)
    dofs: List[DofFunctional] = []
    for i in range(3):
        dofs.append(DofFunctional('curl_point', len(dofs), tuple(vertices[i]), owner='vertex'))
    nodes = gauss_lobatto_interior(k - 2)
    for i in range(3):
        a, b = vertices[(i + 1) % 3], vertices[(i + 2) % 3]
        for s in nodes:
            p = a + s * (b - a)
            dofs.append(DofFunctional('curl_point', len(dofs), tuple(p), owner='edge', edge=i))
    for i in range(3):
        for j in range(k + 1):
            dofs.append(DofFunctional('edge_moment', len(dofs), edge=i, test_index=j))
    for m in range((k - 1) * (k - 2)):
        dofs.append(DofFunctional('interior_moment', len(dofs), test_index=m))
    return dofs


def modal_tables(scalar: Dict[Tuple[int, int], np.ndarray], quantity: str) -> np.ndarray:
    """
    由标量正交基的导数表组装向量模态基 [(φ_i, 0)..., (0, φ_i)...] 的物理量

    Returns:
        向量量 (npts, N, 2)，标量量 (npts, N)
    """
    g = scalar
    if quantity == 'value':
        phi = g[(0, 0)]
        zero = np.zeros_like(phi)
        return np.concatenate([np.stack([phi, zero], -1), np.stack([zero, phi], -1)], axis=1)
    if quantity == 'curl':
        return np.concatenate([-g[(0, 1)], g[(1, 0)]], axis=1)
    if quantity == 'div':
        return np.concatenate([g[(1, 0)], g[(0, 1)]], axis=1)
    if quantity == 'curl2':
        first = np.stack([-g[(0, 2)], g[(1, 1)]], -1)
        second = np.stack([g[(1, 1)], -g[(2, 0)]], -1)
        return np.concatenate([first, second], axis=1)
    if quantity == 'curl3':
        return np.concatenate([g[(2, 1)] + g[(0, 3)], -(g[(3, 0)] + g[(1, 2)])], axis=1)
    if quantity == 'curl4':
        first = np.stack([g[(2, 2)] + g[(0, 4)], -(g[(3, 1)] + g[(1, 3)])], -1)
        second = np.stack([-(g[(3, 1)] + g[(1, 3)]), g[(4, 0)] + g[(2, 2)]], -1)
        return np.concatenate([first, second], axis=1)
    raise ValueError(f"未知物理量: {quantity}")


class LocalElement:
    """
    单个三角形上的 H(curl²) 单元

    对偶矩阵 A = V⁻¹，V_ij = dof_i(Φ_j)，Φ 为 L2 正交的向量模态基；
    形函数 ψ_i = Σ_j A[j, i] Φ_j
    """

    def __init__(self, vertices: np.ndarray, k: int, triangle: Optional[int] = None,
                 condition_limit: float = CONDITION_LIMIT):
        self.k = check_degree(k)
        self.vertices = np.asarray(vertices, dtype=float).reshape(3, 2)
        self.triangle = triangle
        self.basis = PolyBasis(self.vertices, self.k)
        self.n_dofs = (self.k + 1) * (self.k + 2)
        self._setup_functionals()

        vander = self.apply_functionals(self.modal)
        self.vandermonde = vander
        self.condition = self._equilibrated_condition(vander)
        if not np.isfinite(self.condition) or self.condition > condition_limit:
            logger.error(f"单元自由度矩阵奇异: triangle={triangle}, cond={self.condition:.3e}")
            raise UnisolvenceError(
                f"三角形 {triangle} 上自由度 Vandermonde 矩阵数值奇异 (cond={self.condition:.3e})",
                triangle=triangle,
                condition=self.condition,
            )
        lu = linalg.lu_factor(vander)
        self.dual = linalg.lu_solve(lu, np.eye(self.n_dofs))
        self._matrices: Optional[Dict[str, np.ndarray]] = None

    @staticmethod
    def _equilibrated_condition(vander: np.ndarray) -> float:
        rows = np.abs(vander).max(axis=1)
        if np.any(rows == 0):
            return np.inf
        return float(np.linalg.cond(vander / rows[:, None]))

    def _setup_functionals(self):
        k = self.k
        v = self.vertices
        nodes = gauss_lobatto_interior(k - 2)
        curl_points = [v[i] for i in range(3)]
        for i in range(3):
            a, b = v[(i + 1) % 3], v[(i + 2) % 3]
            curl_points.extend(a + s * (b - a) for s in nodes)
        self.curl_points = np.asarray(curl_points)

        erule = edge_rule(2 * k)
        self.edge_data = []
        for i in range(3):
            a, b = v[(i + 1) % 3], v[(i + 2) % 3]
            pts, w, t = erule.map_segment(a, b)
            length = w.sum()
            tau = (b - a) / length
            tests = edge_test_values(t, k) * (w / length)[:, None]
            self.edge_data.append((pts, tau, tests))

        trule = triangle_rule(2 * k)
        pts, w = trule.map_triangle(v)
        d_values = DSpace(k).evaluate(self.basis.frame.to_local(pts))
        self.interior_data = (pts, d_values * (w / w.sum())[:, None, None])

    def apply_functionals(self, evaluate) -> np.ndarray:
        """
        对 evaluate(points, quantity) 给出的对象逐个应用自由度泛函

        evaluate 对向量量返回 (npts, ..., 2)，对标量量返回 (npts, ...)
        """
        rows = [np.asarray(evaluate(self.curl_points, 'curl'))]
        for pts, tau, tests in self.edge_data:
            ut = np.asarray(evaluate(pts, 'value')) @ tau
            rows.append(np.einsum('qj,q...->j...', tests, ut))
        pts, weighted = self.interior_data
        values = np.asarray(evaluate(pts, 'value'))
        rows.append(np.einsum('qmc,q...c->m...', weighted, values))
        return np.concatenate(rows, axis=0)

    def modal(self, points: np.ndarray, quantity: str = 'value') -> np.ndarray:
        """模态基在物理点上的物理量"""
        check_quantity(quantity)
        return modal_tables(self.basis.tables(points, _DERIVATIVE_ORDER[quantity]), quantity)

    def shape(self, points: np.ndarray, quantity: str = 'value') -> np.ndarray:
        """形函数（对偶基）在物理点上的物理量，第二维为形函数编号"""
        values = self.modal(points, quantity)
        if values.ndim == 3:
            return np.einsum('pjc,ji->pic', values, self.dual)
        return values @ self.dual

    def translated(self, vertices: np.ndarray, triangle: Optional[int] = None) -> 'LocalElement':
        """复制到平移后的同形三角形，共享对偶矩阵与局部矩阵"""
        clone = object.__new__(LocalElement)
        clone.__dict__.update(self.__dict__)
        vertices = np.asarray(vertices, dtype=float).reshape(3, 2)
        offset = vertices[0] - self.vertices[0]
        clone.vertices = vertices
        clone.triangle = triangle
        clone.basis = object.__new__(PolyBasis)
        clone.basis.__dict__.update(self.basis.__dict__)
        clone.basis.vertices = vertices
        clone.basis.frame = type(self.basis.frame)(self.basis.frame.center + offset, self.basis.frame.scale)
        clone.curl_points = self.curl_points + offset
        clone.edge_data = [(pts + offset, tau, tests) for pts, tau, tests in self.edge_data]
        pts, weighted = self.interior_data
        clone.interior_data = (pts + offset, weighted)
        return clone

    # ==================== 插值与求值 ====================

    def interpolate(self, field: VectorField) -> np.ndarray:
        """插值 Π_T u：返回形函数系数（即 u 的自由度值）"""
        return self.apply_functionals(field.evaluate)

    def eval_field(self, coefficients: np.ndarray, points: np.ndarray, quantity: str = 'value') -> np.ndarray:
        """
        精确计算离散场 Σ c_i ψ_i 的物理量

        Args:
            coefficients: (N,) 形函数系数
            points: (n, 2) 物理点
            quantity: value | curl | curl2 | curl3 | curl4 | div
        """
        check_quantity(quantity)
        modal_coeffs = self.dual @ np.asarray(coefficients, dtype=float)
        values = self.modal(points, quantity)
        if values.ndim == 3:
            return np.einsum('pnc,n->pc', values, modal_coeffs)
        return values @ modal_coeffs

    def to_modal(self, coefficients: np.ndarray) -> np.ndarray:
        return self.dual @ np.asarray(coefficients, dtype=float)

    # ==================== 局部矩阵 ====================

    def local_matrices(self) -> Dict[str, np.ndarray]:
        """
        局部矩阵（按形函数基）

        Returns:
            mass: (ψ_i, ψ_j)
            curl2: ((∇×)²ψ_i, (∇×)²ψ_j)
        """
        if self._matrices is None:
            pts, w = triangle_rule(2 * self.k).map_triangle(self.vertices)
            matrices = {}
            for name, quantity in (('mass', 'value'), ('curl2', 'curl2')):
                b = self.shape(pts, quantity)
                if b.ndim == 2:
                    b = b[:, :, None]
                gram = np.einsum('q,qic,qjc->ij', w, b, b)
                matrices[name] = 0.5 * (gram + gram.T)
            self._matrices = matrices
        return self._matrices


def build_local(vertices: np.ndarray, k: int, triangle: Optional[int] = None,
                condition_limit: float = CONDITION_LIMIT) -> LocalElement:
    """构造单元并检查单可解性（条件数超过阈值时抛出 UnisolvenceError）"""
    element = LocalElement(vertices, k, triangle=triangle, condition_limit=condition_limit)
    logger.debug(f"单元构造完成: triangle={triangle}, k={k}, cond={element.condition:.3e}")
    return element


def interpolate(element: LocalElement, field: VectorField) -> np.ndarray:
    return element.interpolate(field)


def eval_field(element: LocalElement, coefficients: np.ndarray, points: np.ndarray,
               quantity: str = 'value') -> np.ndarray:
    return element.eval_field(coefficients, points, quantity)
