"""
残差型后验误差估计子

单元项：
  η₁ᵀ = h_T² ‖π_h f - (∇×)⁴u_h - u_h‖_T     η₂ᵀ = h_T² ‖f - π_h f‖_T
  η₃ᵀ = h_T ‖∇·u_h‖_T                        η₀ᵀ = h_T ‖∇·(f - u_h)‖_T
内部边项（跳跃 = t_plus 迹 - t_minus 迹）：
  η₁;₁ᴱ = h_E^½ ‖[[n_E × (∇×)²u_h]]‖_E      η₁;₂ᴱ = h_E^{3/2} ‖[[(∇×)³u_h]]‖_E
  η₃ᴱ = h_E^½ ‖[[n_E·u_h]]‖_E                 η₀ᴱ = h_E^½ ‖[[n_E·(f - u_h)]]‖_E
特征情形 f = (λ_h+1)u_h 时 π_h f = f，故 η₂ = 0，η₀ = λ_h η₃
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.exceptions import ContractError
from src.polyquad.analytic import CallableField, PolynomialField, VectorField
from src.polyquad.quadrature import edge_rule, triangle_rule
from src.spaces.field import DiscreteField


logger = logging.getLogger(__name__)

ELEMENT_COLUMNS = ('eta1', 'eta2', 'eta3', 'eta0')
EDGE_COLUMNS = ('eta1_1', 'eta1_2', 'eta3', 'eta0')
AGGREGATIONS = ('sum', 'rss')


def _rss(values: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.square(values))))


def _cross(n: np.ndarray, v: np.ndarray) -> np.ndarray:
    """二维 n × v = n1 v2 - n2 v1"""
    return n[0] * v[..., 1] - n[1] * v[..., 0]


@dataclass
class EstimatorReport:
    """
    估计子报告

    element_terms: (nt, 4)，列为 η₁ᵀ, η₂ᵀ, η₃ᵀ, η₀ᵀ
    edge_terms: (n_int, 4)，列为 η₁;₁ᴱ, η₁;₂ᴱ, η₃ᴱ, η₀ᴱ，行与 interior_edges 对应
    """
    element_terms: np.ndarray
    edge_terms: np.ndarray
    interior_edges: np.ndarray
    eta0: float
    eta1: float
    eta2: float
    eta3: float
    eigenvalue: Optional[float]
    aggregation: str
    element_indicator: np.ndarray
    centroids: np.ndarray = None
    edge_midpoints: np.ndarray = None
    info: Dict[str, Any] = field(default_factory=dict)

    @property
    def weight(self) -> float:
        """η₃ 的权重 λ_h + 1（源问题为 1）"""
        return 1.0 if self.eigenvalue is None else self.eigenvalue + 1.0

    @property
    def estimator(self) -> float:
        """η₁ + (λ_h+1) η₃"""
        return self.eta1 + self.weight * self.eta3

    @property
    def bound(self) -> float:
        """特征值误差界 (η₁ + (λ_h+1)η₃)²"""
        return self.estimator ** 2

    def rows(self) -> List[Dict[str, Any]]:
        """逐实体导出：先三角形后内部边"""
        rows = []
        for t, terms in enumerate(self.element_terms):
            row = {'entity': 'triangle', 'id': t, 'x': float(self.centroids[t, 0]), 'y': float(self.centroids[t, 1])}
            row.update({name: float(v) for name, v in zip(ELEMENT_COLUMNS, terms)})
            row['eta1_1'] = row['eta1_2'] = None
            row['indicator'] = float(np.sqrt(self.element_indicator[t]))
            rows.append(row)
        for i, e in enumerate(self.interior_edges):
            row = {'entity': 'edge', 'id': int(e),
                   'x': float(self.edge_midpoints[i, 0]), 'y': float(self.edge_midpoints[i, 1])}
            row.update({name: float(v) for name, v in zip(EDGE_COLUMNS, self.edge_terms[i])})
            row['eta2'] = None
            row['indicator'] = None
            rows.append(row)
        return rows

    def summary(self) -> Dict[str, float]:
        return {
            'eta0': self.eta0, 'eta1': self.eta1, 'eta2': self.eta2, 'eta3': self.eta3,
            'estimator': self.estimator, 'bound': self.bound,
        }


class ResidualEstimator:
    """
    逐实体计算估计子

    Args:
        u_h: 离散场
        eigenvalue: 特征情形的 λ_h（f = (λ_h+1)u_h）；为 None 时使用 f
        f: 一般右端（源问题情形）
        config: estimator 配置段（aggregation, rhs_degree）
    """

    def __init__(self, u_h: DiscreteField, eigenvalue: Optional[float] = None,
                 f: Optional[VectorField] = None, config: Optional[Dict[str, Any]] = None):
        config = config or {}
        if eigenvalue is None and f is None:
            raise ValueError("必须给出特征值（特征情形）或右端 f（源问题情形）")
        self.u_h = u_h
        self.mesh = u_h.mesh
        self.k = u_h.assembler.k
        self.eigenvalue = None if eigenvalue is None else float(eigenvalue)
        self.f = f
        self.aggregation = config.get('aggregation', 'sum')
        if self.aggregation not in AGGREGATIONS:
            raise ValueError(f"未知聚合方式: {self.aggregation}（可选: sum, rss）")
        self.element_rule = triangle_rule(2 * self.k)
        self.rhs_rule = triangle_rule(min(int(config.get('rhs_degree', 2 * self.k + 6)), 25))
        self.edge_rule = edge_rule(2 * self.k)

    @property
    def eigen_case(self) -> bool:
        return self.f is None

    def _f_on(self, t: int, points: np.ndarray, quantity: str) -> np.ndarray:
        if isinstance(self.f, DiscreteField):
            return self.f.on_triangle(t, points, quantity)
        return np.asarray(self.f.evaluate(points, quantity))

    def _f_has_div(self) -> bool:
        if isinstance(self.f, (PolynomialField, DiscreteField)):
            return True
        return isinstance(self.f, CallableField) and self.f.has('div')

    def _projection(self, t: int) -> np.ndarray:
        """π_h f 在三角形 t 上的模态系数（模态基 L2 正交归一）"""
        element = self.u_h.assembler.element(t)
        pts, w = self.rhs_rule.map_triangle(element.vertices)
        return np.einsum('q,qnc,qc->n', w, element.modal(pts, 'value'), self._f_on(t, pts, 'value'))

    # ==================== 单元项 ====================

    def element_terms(self, t: int) -> Tuple[float, float, float, float]:
        """(η₁ᵀ, η₂ᵀ, η₃ᵀ, η₀ᵀ)"""
        mesh = self.mesh
        if not 0 <= t < mesh.n_triangles:
            raise ContractError(f"非法三角形编号: {t}")
        h = float(mesh.diameters[t])
        element = self.u_h.assembler.element(t)
        local = self.u_h.local(t)
        pts, w = self.element_rule.map_triangle(element.vertices)

        value = element.eval_field(local, pts, 'value')
        curl4 = element.eval_field(local, pts, 'curl4')
        div = element.eval_field(local, pts, 'div')
        eta3 = h * np.sqrt(w @ div ** 2)

        if self.eigen_case:
            lam = self.eigenvalue
            residual = lam * value - curl4
            eta1 = h ** 2 * np.sqrt(w @ np.sum(residual ** 2, axis=1))
            # f = (λ_h+1)u_h：π_h f = f 故 η₂ = 0；div f − div u_h = λ_h div u_h 故 η₀ = λ_h·η₃
            return float(eta1), 0.0, float(eta3), float(lam * eta3)

        proj = self._projection(t)
        pi_f = np.einsum('qnc,n->qc', element.modal(pts, 'value'), proj)
        residual = pi_f - curl4 - value
        eta1 = h ** 2 * np.sqrt(w @ np.sum(residual ** 2, axis=1))

        rpts, rw = self.rhs_rule.map_triangle(element.vertices)
        f_vals = self._f_on(t, rpts, 'value')
        pi_f_fine = np.einsum('qnc,n->qc', element.modal(rpts, 'value'), proj)
        eta2 = h ** 2 * np.sqrt(rw @ np.sum((f_vals - pi_f_fine) ** 2, axis=1))

        if self._f_has_div():
            div_f = self._f_on(t, rpts, 'div')
        else:
            div_f = np.einsum('qn,n->q', element.modal(rpts, 'div'), proj)
        div_u = element.eval_field(local, rpts, 'div')
        eta0 = h * np.sqrt(rw @ (div_f - div_u) ** 2)
        return float(eta1), float(eta2), float(eta3), float(eta0)

    # ==================== 边项 ====================

    def edge_terms(self, e: int) -> Tuple[float, float, float, float]:
        """(η₁;₁ᴱ, η₁;₂ᴱ, η₃ᴱ, η₀ᴱ)，只接受内部边"""
        mesh = self.mesh
        if not 0 <= e < mesh.n_edges:
            raise ContractError(f"非法边编号: {e}")
        if mesh.boundary_edges[e]:
            raise ContractError(f"边 {e} 是边界边，边项只对内部边定义")
        t_plus, t_minus = (int(t) for t in mesh.edge_tris[e])
        a, b = mesh.points[mesh.edges[e]]
        pts, w, _ = self.edge_rule.map_segment(a, b)
        h = float(mesh.edge_lengths[e])
        n = mesh.normals[e]

        def jump(quantity: str) -> np.ndarray:
            return self.u_h.on_triangle(t_plus, pts, quantity) - self.u_h.on_triangle(t_minus, pts, quantity)

        j_curl2 = _cross(n, jump('curl2'))
        j_curl3 = jump('curl3')
        j_normal = jump('value') @ n

        eta11 = np.sqrt(h) * np.sqrt(w @ j_curl2 ** 2)
        eta12 = h ** 1.5 * np.sqrt(w @ j_curl3 ** 2)
        eta3 = np.sqrt(h) * np.sqrt(w @ j_normal ** 2)

        if self.eigen_case:
            eta0 = self.eigenvalue * eta3
        else:
            f_jump = (self._f_on(t_plus, pts, 'value') - self._f_on(t_minus, pts, 'value')) @ n
            eta0 = np.sqrt(h) * np.sqrt(w @ (f_jump - j_normal) ** 2)
        return float(eta11), float(eta12), float(eta3), float(eta0)

    # ==================== 聚合 ====================

    def report(self) -> EstimatorReport:
        mesh = self.mesh
        elements = np.array([self.element_terms(t) for t in range(mesh.n_triangles)]).reshape(-1, 4)
        interior = mesh.interior_edges
        edges = np.array([self.edge_terms(int(e)) for e in interior]).reshape(-1, 4)

        if self.aggregation == 'sum':
            eta1 = _rss(elements[:, 0]) + _rss(edges[:, 0]) + _rss(edges[:, 1])
            eta3 = _rss(elements[:, 2]) + _rss(edges[:, 2])
            eta0 = _rss(elements[:, 3]) + _rss(edges[:, 3])
        else:
            eta1 = _rss(np.concatenate([elements[:, 0], edges[:, 0], edges[:, 1]]))
            eta3 = _rss(np.concatenate([elements[:, 2], edges[:, 2]]))
            eta0 = _rss(np.concatenate([elements[:, 3], edges[:, 3]]))
        eta2 = _rss(elements[:, 1])
        if self.eigen_case:
            eta0 = self.eigenvalue * eta3
            eta2 = 0.0

        weight = 1.0 if self.eigenvalue is None else self.eigenvalue + 1.0
        indicator = elements[:, 0] ** 2 + (weight * elements[:, 2]) ** 2
        edge_share = 0.5 * (edges[:, 0] ** 2 + edges[:, 1] ** 2 + (weight * edges[:, 2]) ** 2)
        for side in range(2):
            np.add.at(indicator, mesh.edge_tris[interior, side], edge_share)

        midpoints = mesh.points[mesh.edges[interior]].mean(axis=1)
        report = EstimatorReport(
            element_terms=elements,
            edge_terms=edges,
            interior_edges=interior,
            eta0=float(eta0), eta1=float(eta1), eta2=float(eta2), eta3=float(eta3),
            eigenvalue=self.eigenvalue,
            aggregation=self.aggregation,
            element_indicator=indicator,
            centroids=mesh.centroids,
            edge_midpoints=midpoints,
        )
        logger.info(
            f"估计子: η1={report.eta1:.6e}, η3={report.eta3:.6e}, "
            f"η1+(λ+1)η3={report.estimator:.6e} ({self.aggregation})"
        )
        return report


def local_element_terms(t: int, u_h: DiscreteField, f: Optional[VectorField] = None,
                        eigenvalue: Optional[float] = None) -> Tuple[float, float, float, float]:
    return ResidualEstimator(u_h, eigenvalue, f).element_terms(t)


def local_edge_terms(e: int, u_h: DiscreteField, f: Optional[VectorField] = None,
                     eigenvalue: Optional[float] = None) -> Tuple[float, float, float, float]:
    return ResidualEstimator(u_h, eigenvalue, f).edge_terms(e)


def global_report(u_h: DiscreteField, eigenvalue: Optional[float] = None, f: Optional[VectorField] = None,
                  config: Optional[Dict[str, Any]] = None) -> EstimatorReport:
    """全局估计子报告（特征情形要求 u_h 已 M-归一化）"""
    return ResidualEstimator(u_h, eigenvalue, f, config).report()


def loglog_slope(hs: Sequence[float], values: Sequence[float]) -> float:
    """log-log 最小二乘斜率"""
    hs = np.asarray(hs, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(hs) < 2 or np.any(values <= 0):
        raise ValueError("斜率拟合需要至少两个正值点")
    return float(np.polyfit(np.log(hs), np.log(values), 1)[0])
