"""
网格文本格式读写
第 1 行 "nv ne nt"；随后 nv 行 "x y boundary_flag"，ne 行 "v0 v1 boundary_flag"，nt 行 "v0 v1 v2 e0 e1 e2"
"""

import logging
import os
from pathlib import Path
from typing import Union

import numpy as np

from src.exceptions import ContractError
from src.mesh.triangulation import Mesh


logger = logging.getLogger(__name__)


def write_mesh(mesh: Mesh, path: Union[str, Path]) -> Path:
    """把网格写成文本格式，返回文件路径"""
    path = Path(path)
    if path.parent and not path.parent.exists():
        os.makedirs(path.parent, exist_ok=True)

    lines = [f"{mesh.n_vertices} {mesh.n_edges} {mesh.n_triangles}"]
    for (x, y), flag in zip(mesh.points, mesh.boundary_vertices):
        lines.append(f"{float(x)!r} {float(y)!r} {int(flag)}")
    for (a, b), flag in zip(mesh.edges, mesh.boundary_edges):
        lines.append(f"{a} {b} {int(flag)}")
    for tri, edges in zip(mesh.triangles, mesh.tri_edges):
        lines.append(" ".join(str(int(v)) for v in (*tri, *edges)))

    path.write_text("\n".join(lines) + "\n", encoding='utf-8')
    logger.info(f"网格已导出: {path}")
    return path


def read_mesh(path: Union[str, Path], domain: str = 'custom') -> Mesh:
    """
    读取文本格式网格

    顶点与三角形决定网格；文件中的边表与边界标记用于校验
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"网格文件不存在: {path}")

    rows = [line.split() for line in path.read_text(encoding='utf-8').splitlines() if line.strip()]
    try:
        nv, ne, nt = (int(v) for v in rows[0])
        vertex_rows = np.array(rows[1:1 + nv], dtype=float)
        edge_rows = np.array(rows[1 + nv:1 + nv + ne], dtype=np.int64)
        tri_rows = np.array(rows[1 + nv + ne:1 + nv + ne + nt], dtype=np.int64)
    except (ValueError, IndexError) as e:
        raise ContractError(f"网格文件格式错误: {path}: {e}") from e
    if len(vertex_rows) != nv or len(edge_rows) != ne or len(tri_rows) != nt:
        raise ContractError(f"网格文件行数与头部不符: {path}")

    mesh = Mesh(vertex_rows[:, :2], tri_rows[:, :3], domain=domain)

    if ne != mesh.n_edges or not np.array_equal(np.sort(edge_rows[:, :2], axis=1), mesh.edges):
        raise ContractError("网格文件中的边表与三角形拓扑不一致")
    if not np.array_equal(edge_rows[:, 2].astype(bool), mesh.boundary_edges):
        raise ContractError("网格文件中的边界标记与拓扑不一致")

    logger.info(f"网格已导入: {path} (V={nv}, E={ne}, T={nt})")
    return mesh
