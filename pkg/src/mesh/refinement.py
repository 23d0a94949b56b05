"""
网格加密模块
红加密（一分为四）与最新顶点二分（含一致性闭包）
"""

import logging
from typing import Dict, Iterable, List, Tuple

import numpy as np

from src.exceptions import ContractError
from src.mesh.triangulation import Mesh


logger = logging.getLogger(__name__)


def refine_uniform(mesh: Mesh) -> Mesh:
    """
    红加密：每个三角形按边中点分为 4 个全等子三角形，h 精确减半

    子三角形的局部顶点 0 保持为“最新顶点”位置，使二分加密边与父三角形平行
    """
    nv = mesh.n_vertices
    tris = mesh.triangles
    mids = 0.5 * (mesh.points[mesh.edges[:, 0]] + mesh.points[mesh.edges[:, 1]])
    points = np.vstack([mesh.points, mids])

    v0, v1, v2 = tris[:, 0], tris[:, 1], tris[:, 2]
    m0, m1, m2 = (nv + mesh.tri_edges[:, i] for i in range(3))
    children = np.concatenate([
        np.stack([v0, m2, m1], axis=1),
        np.stack([m2, v1, m0], axis=1),
        np.stack([m1, m0, v2], axis=1),
        np.stack([m0, m1, m2], axis=1),
    ])
    # 按父单元排列子单元，保持编号局部性
    order = np.arange(len(children)).reshape(4, -1).T.ravel()
    refined = Mesh(points, children[order], domain=mesh.domain, level=mesh.level + 1)
    logger.info(f"红加密完成: T {mesh.n_triangles} -> {refined.n_triangles}, h={refined.h:.6g}")
    return refined


def _close_marking(mesh: Mesh, marked_edges: np.ndarray) -> np.ndarray:
    """一致性闭包：三角形任一边被标记时，其加密边（局部边 0）也必须标记"""
    ref_edge = mesh.tri_edges[:, 0]
    while True:
        touched = np.any(marked_edges[mesh.tri_edges], axis=1)
        missing = touched & ~marked_edges[ref_edge]
        if not np.any(missing):
            return marked_edges
        marked_edges[ref_edge[missing]] = True


def refine_bisect(mesh: Mesh, marked: Iterable[int]) -> Mesh:
    """
    最新顶点二分加密

    Args:
        mesh: 输入一致网格（局部顶点 0 为最新顶点）
        marked: 需要加密的三角形编号集合

    Returns:
        加密后的一致网格；marked 为空时原样返回
    """
    marked = np.asarray(sorted(set(int(t) for t in marked)), dtype=np.int64)
    if marked.size == 0:
        return mesh
    if marked.min() < 0 or marked.max() >= mesh.n_triangles:
        raise ContractError(f"标记集合包含非法三角形编号（共 {mesh.n_triangles} 个）")

    marked_edges = np.zeros(mesh.n_edges, dtype=bool)
    marked_edges[mesh.tri_edges[marked, 0]] = True
    marked_edges = _close_marking(mesh, marked_edges)

    points: List[np.ndarray] = [p for p in mesh.points]
    midpoint: Dict[Tuple[int, int], int] = {}
    for e in np.nonzero(marked_edges)[0]:
        a, b = (int(v) for v in mesh.edges[e])
        midpoint[(a, b)] = len(points)
        points.append(0.5 * (mesh.points[a] + mesh.points[b]))

    def bisect(tri: Tuple[int, int, int], out: List[Tuple[int, int, int]]):
        p, a, b = tri
        key = (a, b) if a < b else (b, a)
        m = midpoint.get(key)
        if m is None:
            out.append(tri)
            return
        # 子单元的加密边都是父单元的边
        bisect((m, p, a), out)
        bisect((m, b, p), out)

    triangles: List[Tuple[int, int, int]] = []
    for tri in mesh.triangles:
        bisect(tuple(int(v) for v in tri), triangles)

    refined = Mesh(np.asarray(points), np.asarray(triangles), domain=mesh.domain, level=mesh.level + 1)
    logger.info(
        f"二分加密完成: 标记 {marked.size} 个, 加密边 {int(marked_edges.sum())} 条, "
        f"T {mesh.n_triangles} -> {refined.n_triangles}"
    )
    return refined
