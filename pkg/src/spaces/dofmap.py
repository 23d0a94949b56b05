"""
全局自由度编号
向量空间 V_h / V_h⁰：顶点 curl 值 → 每条边 (k-2)+(k+1) 个 → 每个三角形 (k-1)(k-2) 个
"""

import logging

import numpy as np

from src.element.curl2_element import check_degree
from src.mesh.triangulation import Mesh


logger = logging.getLogger(__name__)


class DofMap:
    """
    V_h 的全局编号与边界掩码

    local_to_global[t, i] 与 signs[t, i]：全局值 = signs * 局部值
    边上的 curl 节点与切向矩沿全局切向排列；局部方向相反时
    curl 节点倒序，第 j 个矩乘以 (-1)^(j+1)
    """

    def __init__(self, mesh: Mesh, k: int):
        self.mesh = mesh
        self.k = check_degree(k)
        k = self.k
        nv, ne, nt = mesh.n_vertices, mesh.n_edges, mesh.n_triangles

        self.per_edge = 2 * k - 1
        self.per_triangle = (k - 1) * (k - 2)
        self.edge_offset = nv
        self.triangle_offset = nv + ne * self.per_edge
        self.n_dofs = self.triangle_offset + nt * self.per_triangle
        self.n_local = (k + 1) * (k + 2)

        l2g = np.empty((nt, self.n_local), dtype=np.int64)
        signs = np.ones((nt, self.n_local))
        l2g[:, :3] = mesh.triangles

        nc = k - 2
        curl_index = np.arange(nc)
        moment_index = np.arange(k + 1)
        moment_flip = np.where(moment_index % 2 == 0, -1.0, 1.0)
        for i in range(3):
            e = mesh.tri_edges[:, i]
            forward = mesh.edge_signs[:, i] > 0
            base = self.edge_offset + e * self.per_edge

            cols = 3 + i * nc + curl_index
            order = np.where(forward[:, None], curl_index[None, :], (nc - 1 - curl_index)[None, :])
            l2g[:, cols] = base[:, None] + order

            cols = 3 + 3 * nc + i * (k + 1) + moment_index
            l2g[:, cols] = base[:, None] + nc + moment_index[None, :]
            signs[:, cols] = np.where(forward[:, None], 1.0, moment_flip[None, :])

        start = 3 + 3 * nc + 3 * (k + 1)
        l2g[:, start:] = self.triangle_offset + np.arange(nt)[:, None] * self.per_triangle + np.arange(self.per_triangle)

        self.local_to_global = l2g
        self.signs = signs

        constrained = np.zeros(self.n_dofs, dtype=bool)
        constrained[np.nonzero(mesh.boundary_vertices)[0]] = True
        for e in np.nonzero(mesh.boundary_edges)[0]:
            start = self.edge_offset + e * self.per_edge
            constrained[start:start + self.per_edge] = True
        self.free = ~constrained
        self.free_dofs = np.nonzero(self.free)[0]

        logger.info(f"向量自由度编号: k={k}, 总数={self.n_dofs}, 自由={self.n_free}")

    @property
    def n_free(self) -> int:
        return int(self.free.sum())

    def expected_count(self) -> int:
        """闭式公式 V + E(2k-1) + T(k-1)(k-2)"""
        m = self.mesh
        return m.n_vertices + m.n_edges * self.per_edge + m.n_triangles * self.per_triangle

    def local_coefficients(self, t: int, global_vector: np.ndarray) -> np.ndarray:
        """取出三角形 t 的局部系数"""
        return self.signs[t] * global_vector[self.local_to_global[t]]

    def expand(self, free_vector: np.ndarray) -> np.ndarray:
        """自由自由度向量补零扩展为全向量"""
        full = np.zeros(self.n_dofs, dtype=np.result_type(free_vector, float))
        full[self.free_dofs] = free_vector
        return full

    def edge_dofs(self, e: int) -> np.ndarray:
        start = self.edge_offset + e * self.per_edge
        return np.arange(start, start + self.per_edge)


def build_dofmap(mesh: Mesh, k: int) -> DofMap:
    return DofMap(mesh, k)
