"""
实验流程控制模块
整合网格、组装、特征求解与估计子，完成特征值表、收敛率、估计子序列、自适应加密与单元自检
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from tqdm import tqdm

from src.element.curl2_element import build_local, check_degree
from src.estimator.marking import dorfler_mark
from src.estimator.residual import EstimatorReport, global_report, loglog_slope
from src.mesh.io import read_mesh
from src.mesh.refinement import refine_bisect
from src.mesh.triangulation import Mesh, make_domain, normalize_domain
from src.polyquad.analytic import CallableField, PolynomialField
from src.solver.eigen import EigenResult, solve_eigs
from src.solver.rates import RateRow, rate_table
from src.spaces.assembly import AssembledSystem, Assembler, ElementCache
from src.spaces.field import DiscreteField
from src.spaces.norms import interpolation_error


logger = logging.getLogger(__name__)

# 估计子实验默认跟踪的（单重）特征值序号
DEFAULT_EIG_INDEX = {'square': 3, 'lshape': 1, 'square_hole': 3}

ERROR_PROXY = (
    "relative eigenvalue error proxy |lambda_h(h) - lambda_h(h_ref)| / lambda_h(h_ref), "
    "h_ref = finest level computed"
)


@dataclass
class LevelResult:
    """一个网格层上的求解结果"""
    mesh: Mesh
    assembler: Assembler
    system: AssembledSystem
    eigen: EigenResult
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def h(self) -> float:
        return self.mesh.h

    def eigenfield(self, index: int) -> DiscreteField:
        """第 index 个（1 起）特征向量对应的离散场"""
        return DiscreteField(self.assembler, self.eigen.vectors[:, index - 1])


class ExperimentPipeline:
    """实验流程控制器"""

    def __init__(self, config: Dict[str, Any]):
        """
        初始化实验流程控制器

        Args:
            config: 完整的配置字典
        """
        self.config = config
        self.mesh_config = config.get('mesh', {})
        self.element_config = config.get('element', {})
        self.assembly_config = config.get('assembly', {})
        self.solver_config = config.get('solver', {})
        self.estimator_config = config.get('estimator', {})

        self.k = check_degree(self.element_config.get('k', 4))
        self.diagonal = self.mesh_config.get('diagonal', 'positive')
        self.progress = config.get('output', {}).get('progress', True)
        self._caches: Dict[int, ElementCache] = {}

        logger.info(f"实验流程初始化: k={self.k}, diagonal={self.diagonal}")

    # ==================== 基本步骤 ====================

    def build_mesh(self, domain: str, n: Optional[int] = None, mesh_file: Optional[str] = None) -> Mesh:
        if mesh_file:
            return read_mesh(mesh_file, domain=normalize_domain(domain))
        return make_domain(domain, n, self.diagonal)

    def _cache(self, k: int) -> ElementCache:
        if k not in self._caches:
            limit = float(self.element_config.get('condition_limit', 1e13))
            self._caches[k] = ElementCache(k, limit)
        return self._caches[k]

    def assemble(self, mesh: Mesh) -> Assembler:
        assembly_config = dict(self.assembly_config)
        assembly_config.setdefault('condition_limit', self.element_config.get('condition_limit', 1e13))
        return Assembler(mesh, self.k, assembly_config, cache=self._cache(self.k))

    def solve(self, mesh: Mesh, nev: int) -> LevelResult:
        """组装并求解一个网格层"""
        timings = {}
        start = time.perf_counter()
        assembler = self.assemble(mesh)
        system = assembler.assemble()
        timings['assembly'] = time.perf_counter() - start

        start = time.perf_counter()
        eigen = solve_eigs(
            system,
            nev=nev,
            tol=float(self.solver_config.get('tol', 1e-10)),
            shift=float(self.solver_config.get('shift', 0.0)),
            config=self.solver_config,
        )
        timings['eigensolve'] = time.perf_counter() - start
        return LevelResult(mesh, assembler, system, eigen, timings)

    def estimate(self, level: LevelResult, eig_index: int) -> EstimatorReport:
        """对第 eig_index 个特征对计算估计子"""
        if not 1 <= eig_index <= len(level.eigen):
            raise ValueError(f"特征值序号 {eig_index} 超出已计算范围 1..{len(level.eigen)}")
        lam = float(level.eigen.eigenvalues[eig_index - 1])
        return global_report(level.eigenfield(eig_index), eigenvalue=lam, config=self.estimator_config)

    def _eig_index(self, domain: str, eig_index: Optional[int]) -> int:
        if eig_index is None:
            eig_index = self.estimator_config.get('eig_index')
        if eig_index is None:
            eig_index = DEFAULT_EIG_INDEX.get(normalize_domain(domain), 1)
        return int(eig_index)

    def _levels(self, levels: Sequence[int], desc: str):
        return tqdm(list(levels), desc=desc, disable=not self.progress)

    # ==================== 实验 ====================

    def run_eigs(self, domain: str, levels: Sequence[int], nev: int,
                 mesh_file: Optional[str] = None) -> List[Dict[str, Any]]:
        """逐层计算前 nev 个特征值"""
        rows = []
        targets = [None] if mesh_file else list(levels)
        for n in self._levels(targets, '特征值'):
            mesh = self.build_mesh(domain, n, mesh_file)
            level = self.solve(mesh, nev)
            row = {'h': 1.0 / n if n else level.h, 'n': n, 'ndof': level.system.n_free}
            row.update({f'lambda_{i + 1}': float(v) for i, v in enumerate(level.eigen.eigenvalues)})
            row['max_residual'] = float(level.eigen.residuals.max())
            rows.append(row)
        return rows

    def run_rates(self, domain: str, levels: Sequence[int]) -> List[RateRow]:
        """最小特征值的逐层相对误差与收敛阶"""
        levels = list(levels)
        with tqdm(total=len(levels), desc='收敛率', disable=not self.progress) as bar:
            def first_eigenvalue(n: int) -> float:
                level = self.solve(self.build_mesh(domain, n), 1)
                bar.update(1)
                return float(level.eigen.eigenvalues[0])

            return rate_table(domain, self.k, levels, self.config, first_eigenvalue=first_eigenvalue)

    def run_estimate(self, domain: str, levels: Sequence[int], eig_index: Optional[int] = None,
                     mesh_file: Optional[str] = None) -> Dict[str, Any]:
        """
        逐层计算估计子，并与特征值误差代理比较斜率

        Returns:
            {'eig_index', 'series': [...], 'reports': [...], 'slopes': {...}}
        """
        eig_index = self._eig_index(domain, eig_index)
        targets = [None] if mesh_file else list(levels)
        series, reports = [], []
        for n in self._levels(targets, '估计子'):
            mesh = self.build_mesh(domain, n, mesh_file)
            level = self.solve(mesh, eig_index)
            report = self.estimate(level, eig_index)
            reports.append(report)
            series.append({
                'h': 1.0 / n if n else level.h,
                'n': n,
                'ndof': level.system.n_free,
                'lambda': float(level.eigen.eigenvalues[eig_index - 1]),
                'eta1': report.eta1,
                'eta3': report.eta3,
                'estimator': report.estimator,
                'bound': report.bound,
            })

        lam_ref = series[-1]['lambda']
        for row in series:
            row['error_proxy'] = abs(row['lambda'] - lam_ref) / lam_ref if len(series) > 1 else None
        series[-1]['error_proxy'] = None

        slopes = {'bound': None, 'error_proxy': None}
        if len(series) >= 3:
            hs = [row['h'] for row in series[:-1]]
            slopes['bound'] = loglog_slope(hs, [row['bound'] for row in series[:-1]])
            slopes['error_proxy'] = loglog_slope(hs, [row['error_proxy'] for row in series[:-1]])
            logger.info(f"斜率: 估计子界 {slopes['bound']:.4f}, 误差代理 {slopes['error_proxy']:.4f}")
        return {'eig_index': eig_index, 'series': series, 'reports': reports, 'slopes': slopes}

    def run_adapt(self, domain: str, n: int, theta: float, iterations: int,
                  eig_index: Optional[int] = None, mesh_file: Optional[str] = None) -> List[Dict[str, Any]]:
        """求解 → 估计 → 标记 → 二分加密 的循环"""
        eig_index = self._eig_index(domain, eig_index)
        if iterations < 0:
            raise ValueError(f"迭代次数必须非负，收到 {iterations}")
        mesh = self.build_mesh(domain, n, mesh_file)
        trace = []
        for it in tqdm(range(iterations + 1), desc='自适应', disable=not self.progress):
            level = self.solve(mesh, eig_index)
            report = self.estimate(level, eig_index)
            row = {
                'iteration': it,
                'ndof': level.system.n_free,
                'n_triangles': mesh.n_triangles,
                'lambda': float(level.eigen.eigenvalues[eig_index - 1]),
                'estimator': report.estimator,
                'marked': 0,
                'new_vertices_near_corner': None,
            }
            if it < iterations:
                marked = dorfler_mark(report, theta)
                refined = refine_bisect(mesh, marked)
                new_points = refined.points[mesh.n_vertices:]
                row['marked'] = len(marked)
                if len(new_points):
                    dist = np.linalg.norm(new_points - np.array([0.5, 0.5]), axis=1)
                    row['new_vertices_near_corner'] = float(np.mean(dist <= 0.25))
                mesh = refined
            trace.append(row)
        return trace

    # ==================== 单元自检 ====================

    def check_element(self, k: int, seed: int = 0, n_random: int = 100) -> Dict[str, Dict[str, Any]]:
        """单可解性、协调性、多项式重现与插值阶四项自检"""
        k = check_degree(k)
        rng = np.random.default_rng(seed)
        suites = {
            'unisolvence': self._check_unisolvence(k, rng, n_random),
            'conformity': self._check_conformity(k, rng),
            'reproduction': self._check_reproduction(k, rng),
            'interpolation_order': self._check_orders(k),
        }
        for name, suite in suites.items():
            logger.info(f"单元自检 {name}: {'PASS' if suite['passed'] else 'FAIL'} {suite['detail']}")
        return suites

    @staticmethod
    def _random_triangle(rng: np.random.Generator, min_angle: float = 15.0) -> np.ndarray:
        while True:
            v = rng.uniform(-1.0, 1.0, size=(3, 2)) * rng.uniform(0.05, 2.0) + rng.uniform(-5, 5, size=2)
            d = v[[1, 2, 0]] - v
            lengths = np.hypot(d[:, 0], d[:, 1])
            area = 0.5 * (d[0, 0] * d[1, 1] - d[0, 1] * d[1, 0])
            if abs(area) < 1e-12:
                continue
            angles = []
            for i in range(3):
                a, b = -d[(i + 2) % 3], d[i]
                angles.append(np.degrees(np.arccos(np.clip(a @ b / (np.hypot(*a) * np.hypot(*b)), -1, 1))))
            if min(angles) >= min_angle:
                return v if area > 0 else v[[0, 2, 1]]

    def _check_unisolvence(self, k: int, rng, n_random: int) -> Dict[str, Any]:
        limit = 1e12
        triangles = [np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])]
        triangles += [self._random_triangle(rng) for _ in range(n_random)]
        conditions = [build_local(v, k).condition for v in triangles]
        worst = float(max(conditions))
        return {'passed': worst <= limit, 'detail': f"max cond={worst:.3e} over {len(triangles)} triangles",
                'max_condition': worst}

    def _check_reproduction(self, k: int, rng) -> Dict[str, Any]:
        vertices = self._random_triangle(rng)
        cx = np.zeros((k + 1, k + 1))
        cy = np.zeros((k + 1, k + 1))
        for i in range(k + 1):
            for j in range(k + 1 - i):
                cx[i, j], cy[i, j] = rng.standard_normal(2)
        poly = PolynomialField(cx, cy)
        element = build_local(vertices, k)
        coeffs = element.interpolate(poly)
        pts = rng.dirichlet(np.ones(3), size=20) @ vertices
        worst = 0.0
        for quantity in ('value', 'curl'):
            exact = poly.evaluate(pts, quantity)
            approx = element.eval_field(coeffs, pts, quantity)
            worst = max(worst, float(np.abs(exact - approx).max() / max(np.abs(exact).max(), 1e-300)))
        return {'passed': worst <= 1e-9, 'detail': f"max relative error={worst:.3e}", 'error': worst}

    def _check_conformity(self, k: int, rng) -> Dict[str, Any]:
        quad = np.array([[0.0, 0.0], [1.0, 0.1], [1.1, 1.0], [-0.1, 0.9]]) + rng.uniform(-0.05, 0.05, size=(4, 2))
        mesh = Mesh(quad, np.array([[0, 1, 2], [0, 2, 3]]))
        size = k + 3
        cx = rng.standard_normal((size, size))
        cy = rng.standard_normal((size, size))
        smooth = PolynomialField(cx, cy)
        assembler = Assembler(mesh, k, {'deterministic': True})
        u_h = DiscreteField(assembler, assembler.interpolate(smooth))
        e = int(mesh.interior_edges[0])
        t_plus, t_minus = (int(t) for t in mesh.edge_tris[e])
        a, b = mesh.points[mesh.edges[e]]
        s = np.linspace(0.0, 1.0, 11)[:, None]
        pts = a + s * (b - a)
        tau = mesh.tangents[e]
        jump_t = (u_h.on_triangle(t_plus, pts) - u_h.on_triangle(t_minus, pts)) @ tau
        jump_c = u_h.on_triangle(t_plus, pts, 'curl') - u_h.on_triangle(t_minus, pts, 'curl')
        scale = max(np.abs(u_h.on_triangle(t_plus, pts)).max(), np.abs(u_h.on_triangle(t_plus, pts, 'curl')).max(), 1.0)
        worst = float(max(np.abs(jump_t).max(), np.abs(jump_c).max()) / scale)
        return {'passed': worst <= 1e-8, 'detail': f"max trace jump={worst:.3e}", 'jump': worst}

    def _check_orders(self, k: int, levels: Sequence[int] = (2, 4, 8, 16), tol: float = 0.3) -> Dict[str, Any]:
        exact = CallableField(
            value=lambda p: np.stack([p[:, 0] * np.sin(np.pi * p[:, 1]), np.zeros(len(p))], axis=1),
            curl=lambda p: -np.pi * p[:, 0] * np.cos(np.pi * p[:, 1]),
            curl2=lambda p: np.stack([np.pi ** 2 * p[:, 0] * np.sin(np.pi * p[:, 1]),
                                      np.pi * np.cos(np.pi * p[:, 1])], axis=1),
        )
        errors = []
        for n in levels:
            mesh = make_domain('square', n, self.diagonal)
            assembler = Assembler(mesh, k, {'deterministic': True}, cache=self._cache(k))
            errors.append(interpolation_error(assembler, exact))
        expected = {'l2': k + 1, 'curl': k, 'curl2': k - 1}
        orders = {name: float(np.log2(errors[-2][name] / errors[-1][name])) for name in expected}
        passed = all(abs(orders[name] - expected[name]) <= tol for name in expected)
        detail = ", ".join(f"{name}={orders[name]:.3f} (expected {expected[name]})" for name in expected)
        return {'passed': passed, 'detail': detail, 'orders': orders}
