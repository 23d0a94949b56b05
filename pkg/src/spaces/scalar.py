"""
标量 Lagrange 空间 S_h / S_h⁰
"""

import logging

import numpy as np

from src.mesh.triangulation import Mesh


logger = logging.getLogger(__name__)


class ScalarSpace:
    """
    连续 P_k 节点空间

    边内部节点沿全局切向编号；局部方向相反时第 m 个局部节点对应第 k-2-m 个全局节点
    """

    def __init__(self, mesh: Mesh, k: int):
        self.mesh = mesh
        self.k = int(k)
        k = self.k
        nv, ne, nt = mesh.n_vertices, mesh.n_edges, mesh.n_triangles
        self.per_edge = k - 1
        self.per_triangle = (k - 1) * (k - 2) // 2
        self.edge_offset = nv
        self.triangle_offset = nv + ne * self.per_edge
        self.n_dofs = self.triangle_offset + nt * self.per_triangle
        self.n_local = (k + 1) * (k + 2) // 2

        l2g = np.empty((nt, self.n_local), dtype=np.int64)
        l2g[:, :3] = mesh.triangles
        index = np.arange(self.per_edge)
        for i in range(3):
            forward = mesh.edge_signs[:, i] > 0
            base = self.edge_offset + mesh.tri_edges[:, i] * self.per_edge
            order = np.where(forward[:, None], index[None, :], (self.per_edge - 1 - index)[None, :])
            l2g[:, 3 + i * self.per_edge + index] = base[:, None] + order
        start = 3 + 3 * self.per_edge
        l2g[:, start:] = (
            self.triangle_offset
            + np.arange(nt)[:, None] * self.per_triangle
            + np.arange(self.per_triangle)
        )
        self.local_to_global = l2g

        boundary = np.zeros(self.n_dofs, dtype=bool)
        boundary[np.nonzero(mesh.boundary_vertices)[0]] = True
        for e in np.nonzero(mesh.boundary_edges)[0]:
            start = self.edge_offset + e * self.per_edge
            boundary[start:start + self.per_edge] = True
        self.free = ~boundary
        self.free_dofs = np.nonzero(self.free)[0]

        logger.info(f"标量 P{k} 空间: 总数={self.n_dofs}, 内部={self.n_free}")

    @property
    def n_free(self) -> int:
        return int(self.free.sum())
