"""
稀疏组装
K₂ = ((∇×)²u, (∇×)²v)，M = (u, v)，C[j, i] = (ψ_i, ∇q_j)，q_j 取 k+1 次连续元（∇S⁰_{k+1} ⊂ V_h⁰）
单元对偶基与局部矩阵按三角形形状缓存（构造与平移无关）
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Hashable, List, Optional, Tuple, Union

import numpy as np
from scipy import sparse

from src.element.curl2_element import CONDITION_LIMIT, LocalElement, build_local
from src.element.lagrange import LagrangeElement
from src.mesh.triangulation import Mesh
from src.polyquad.analytic import VectorField
from src.polyquad.quadrature import triangle_rule
from src.spaces.dofmap import DofMap
from src.spaces.scalar import ScalarSpace


logger = logging.getLogger(__name__)


def shape_key(vertices: np.ndarray) -> Tuple[float, ...]:
    """三角形形状的键：相对首顶点的坐标差（平移不变）"""
    v = np.asarray(vertices, dtype=float)
    return tuple(np.round(v[1:] - v[0], 13).ravel().tolist())


@dataclass
class ShapeEntry:
    """一种三角形形状的缓存内容"""
    element: LocalElement
    mass: np.ndarray
    curl2: np.ndarray
    coupling: np.ndarray
    scalar_stiffness: np.ndarray


class ElementCache:
    """按形状缓存单元，返回平移到实际位置的单元"""

    def __init__(self, k: int, condition_limit: float = CONDITION_LIMIT):
        self.k = k
        self.condition_limit = condition_limit
        self._entries: Dict[Hashable, ShapeEntry] = {}
        self.hits = 0
        self.misses = 0

    def __len__(self) -> int:
        return len(self._entries)

    def _build(self, vertices: np.ndarray, triangle: Optional[int]) -> ShapeEntry:
        element = build_local(vertices, self.k, triangle=triangle, condition_limit=self.condition_limit)
        matrices = element.local_matrices()
        lagrange = LagrangeElement(vertices, self.k + 1)
        pts, w = triangle_rule(2 * self.k).map_triangle(element.vertices)
        coupling = lagrange.coupling(element.shape(pts, 'value'), w, pts)
        return ShapeEntry(element, matrices['mass'], matrices['curl2'], coupling, lagrange.stiffness())

    def prepare(self, mesh: Mesh, threads: int = 1) -> List[ShapeEntry]:
        """
        为网格的所有形状构造缓存条目

        Returns:
            按三角形顺序排列的缓存条目
        """
        keys: List[Hashable] = []
        owner: Dict[Hashable, int] = {}
        for t in range(mesh.n_triangles):
            key = shape_key(mesh.triangle_points(t))
            keys.append(key)
            owner.setdefault(key, t)

        missing = [key for key in owner if key not in self._entries]
        if missing:
            build_args = [(mesh.triangle_points(owner[key]), owner[key]) for key in missing]
            if threads > 1 and len(missing) > 1:
                with ThreadPoolExecutor(max_workers=threads) as pool:
                    entries = list(pool.map(lambda args: self._build(*args), build_args))
            else:
                entries = [self._build(*args) for args in build_args]
            for key, entry in zip(missing, entries):
                self._entries[key] = entry
        self.misses += len(missing)
        self.hits += len(owner) - len(missing)
        logger.debug(f"形状缓存: {len(owner)} 种形状, 新建 {len(missing)}")
        return [self._entries[key] for key in keys]

    def max_condition(self) -> float:
        return max((e.element.condition for e in self._entries.values()), default=0.0)


@dataclass
class AssembledSystem:
    """组装结果：自由自由度上的 K₂、M、C 及其全矩阵"""
    mesh: Mesh
    k: int
    dofmap: DofMap
    scalar_space: ScalarSpace
    K2: sparse.csr_matrix
    M: sparse.csr_matrix
    C: sparse.csr_matrix
    K2_full: sparse.csr_matrix
    M_full: sparse.csr_matrix
    C_full: sparse.csr_matrix
    scalar_stiffness: sparse.csr_matrix
    assembler: Any = None
    info: Dict[str, Any] = field(default_factory=dict)

    @property
    def n_free(self) -> int:
        return self.K2.shape[0]

    @property
    def n_multipliers(self) -> int:
        return self.C.shape[0]

    def context(self) -> Dict[str, Any]:
        return {
            'domain': self.mesh.domain,
            'h': f"{self.mesh.h:.6g}",
            'k': self.k,
            'ndof': self.n_free,
        }


class Assembler:
    """
    组装器

    Args:
        mesh: 网格
        k: 单元次数
        config: assembly 配置段（threads, deterministic, load_degree, condition_limit）
    """

    def __init__(self, mesh: Mesh, k: int, config: Optional[Dict[str, Any]] = None,
                 cache: Optional[ElementCache] = None):
        config = config or {}
        self.mesh = mesh
        self.k = int(k)
        self.deterministic = config.get('deterministic', True)
        self.threads = 1 if self.deterministic else max(1, int(config.get('threads', 1)))
        self.load_degree = min(int(config.get('load_degree', 2 * self.k + 2)), 25)
        condition_limit = float(config.get('condition_limit', CONDITION_LIMIT))

        self.dofmap = DofMap(mesh, self.k)
        # 乘子空间 S⁰_{k+1}：∇S⁰_{k+1} ⊂ V_h⁰ 整体受约束
        self.scalar_space = ScalarSpace(mesh, self.k + 1)
        self.cache = cache if cache is not None and cache.k == self.k else ElementCache(self.k, condition_limit)
        self.entries = self.cache.prepare(mesh, self.threads)

    def element(self, t: int) -> LocalElement:
        base = self.entries[t].element
        vertices = self.mesh.triangle_points(t)
        if np.array_equal(base.vertices, vertices):
            return base
        return base.translated(vertices, t)

    @staticmethod
    def _scatter(local: np.ndarray, rows: np.ndarray, cols: np.ndarray, shape) -> sparse.csr_matrix:
        """按单元顺序散射局部矩阵 (nt, nr, nc)，重复项求和"""
        r = np.broadcast_to(rows[:, :, None], local.shape).ravel()
        c = np.broadcast_to(cols[:, None, :], local.shape).ravel()
        return sparse.coo_matrix((local.ravel(), (r, c)), shape=shape).tocsr()

    def assemble(self) -> AssembledSystem:
        """组装全部双线性形式并去掉受约束的行列"""
        dm = self.dofmap
        ss = self.scalar_space
        entries = self.entries
        s = dm.signs
        l2g = dm.local_to_global

        mass = np.stack([e.mass for e in entries]) * s[:, :, None] * s[:, None, :]
        curl2 = np.stack([e.curl2 for e in entries]) * s[:, :, None] * s[:, None, :]
        coupling = np.stack([e.coupling for e in entries]) * s[:, None, :]
        stiff = np.stack([e.scalar_stiffness for e in entries])

        M_full = self._scatter(mass, l2g, l2g, (dm.n_dofs, dm.n_dofs))
        K2_full = self._scatter(curl2, l2g, l2g, (dm.n_dofs, dm.n_dofs))
        C_full = self._scatter(coupling, ss.local_to_global, l2g, (ss.n_dofs, dm.n_dofs))
        A_s = self._scatter(stiff, ss.local_to_global, ss.local_to_global, (ss.n_dofs, ss.n_dofs))

        free = dm.free_dofs
        sfree = ss.free_dofs
        system = AssembledSystem(
            mesh=self.mesh,
            k=self.k,
            dofmap=dm,
            scalar_space=ss,
            K2=K2_full[free][:, free].tocsr(),
            M=M_full[free][:, free].tocsr(),
            C=C_full[sfree][:, free].tocsr(),
            K2_full=K2_full,
            M_full=M_full,
            C_full=C_full,
            scalar_stiffness=A_s,
            assembler=self,
            info={'shapes': len(self.cache), 'max_condition': self.cache.max_condition()},
        )
        logger.info(
            f"组装完成: 自由向量自由度={system.n_free}, 乘子={system.n_multipliers}, "
            f"形状数={len(self.cache)}, 最大条件数={system.info['max_condition']:.3e}"
        )
        return system

    def assemble_load(self, f: VectorField, free_only: bool = True) -> np.ndarray:
        """载荷向量 (f, ψ_i)"""
        dm = self.dofmap
        rule = triangle_rule(self.load_degree)
        b = np.zeros(dm.n_dofs)
        for t in range(self.mesh.n_triangles):
            element = self.element(t)
            pts, w = rule.map_triangle(element.vertices)
            values = np.asarray(f.evaluate(pts, 'value'))
            local = np.einsum('q,qic,qc->i', w, element.shape(pts, 'value'), values)
            np.add.at(b, dm.local_to_global[t], dm.signs[t] * local)
        return b[dm.free_dofs] if free_only else b

    def interpolate(self, f: VectorField) -> np.ndarray:
        """全局插值 Π_h u（全向量，不施加边界掩码）"""
        dm = self.dofmap
        u = np.zeros(dm.n_dofs)
        for t in range(self.mesh.n_triangles):
            local = self.element(t).interpolate(f)
            u[dm.local_to_global[t]] = dm.signs[t] * local
        return u


def assemble(mesh: Mesh, k: int, config: Optional[Dict[str, Any]] = None,
             cache: Optional[ElementCache] = None) -> AssembledSystem:
    """组装 (K₂, M, C)"""
    return Assembler(mesh, k, config, cache=cache).assemble()


def assemble_load(system: AssembledSystem, f: VectorField, free_only: bool = True) -> np.ndarray:
    return system.assembler.assemble_load(f, free_only=free_only)


def export_coo(matrix, path: Union[str, Path]) -> Path:
    """以坐标文本格式（每行 row col value）导出稀疏矩阵"""
    path = Path(path)
    os.makedirs(path.parent, exist_ok=True)
    coo = sparse.coo_matrix(matrix)
    order = np.lexsort((coo.col, coo.row))
    with open(path, 'w', encoding='utf-8') as fh:
        for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
            fh.write(f"{int(r)} {int(c)} {float(v)!r}\n")
    logger.info(f"矩阵已导出: {path} ({coo.nnz} 个非零元)")
    return path
