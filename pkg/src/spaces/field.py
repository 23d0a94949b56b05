"""
离散场：全局系数向量 + 组装器，逐单元精确求值
"""

import logging
from typing import Optional

import numpy as np

from src.polyquad.analytic import VectorField, check_quantity


logger = logging.getLogger(__name__)


class DiscreteField(VectorField):
    """
    V_h 中的有限元函数

    Args:
        assembler: Assembler（提供网格、编号与单元）
        coefficients: 全向量 (n_dofs,) 或自由自由度向量 (n_free,)
    """

    def __init__(self, assembler, coefficients: np.ndarray):
        self.assembler = assembler
        self.mesh = assembler.mesh
        self.dofmap = assembler.dofmap
        coefficients = np.asarray(coefficients, dtype=float)
        if coefficients.shape[0] == self.dofmap.n_free and self.dofmap.n_free != self.dofmap.n_dofs:
            coefficients = self.dofmap.expand(coefficients)
        if coefficients.shape[0] != self.dofmap.n_dofs:
            raise ValueError(
                f"系数长度 {coefficients.shape[0]} 与自由度数 {self.dofmap.n_dofs} 不符"
            )
        self.coefficients = coefficients

    def local(self, t: int) -> np.ndarray:
        return self.dofmap.local_coefficients(t, self.coefficients)

    def on_triangle(self, t: int, points: np.ndarray, quantity: str = 'value') -> np.ndarray:
        """在三角形 t 上（含边界）求值，points 不做归属检查"""
        return self.assembler.element(t).eval_field(self.local(t), points, quantity)

    def locate(self, points: np.ndarray, tol: float = 1e-12) -> np.ndarray:
        """每个点所在的三角形编号（落在边上时取编号最小者），找不到为 -1"""
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        p = self.mesh.points[self.mesh.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        owner = np.full(len(points), -1, dtype=np.int64)
        for start in range(0, len(points), 256):
            chunk = points[start:start + 256]
            rel = chunk[:, None, :] - p[None, :, 0]
            l1 = (rel[..., 0] * d2[:, 1] - rel[..., 1] * d2[:, 0]) / det
            l2 = (d1[:, 0] * rel[..., 1] - d1[:, 1] * rel[..., 0]) / det
            inside = (l1 >= -tol) & (l2 >= -tol) & (l1 + l2 <= 1 + tol)
            found = inside.any(axis=1)
            owner[start:start + 256] = np.where(found, inside.argmax(axis=1), -1)
        return owner

    def evaluate(self, points: np.ndarray, quantity: str = 'value') -> np.ndarray:
        check_quantity(quantity)
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        owner = self.locate(points)
        if np.any(owner < 0):
            raise ValueError("部分求值点不在网格区域内")
        vector = quantity in ('value', 'curl2', 'curl4')
        out = np.zeros((len(points), 2) if vector else len(points))
        for t in np.unique(owner):
            mask = owner == t
            out[mask] = self.on_triangle(int(t), points[mask], quantity)
        return out

    def scaled(self, factor: float) -> 'DiscreteField':
        return DiscreteField(self.assembler, factor * self.coefficients)
