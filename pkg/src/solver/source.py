"""
源问题：a(u_h, v_h) + b(v_h, p_h) = (f, v_h)，b(u_h, q_h) = 0
其中 a(u, v) = ((∇×)²u, (∇×)²v) + (u, v)
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.solver.saddle import SaddleOperator
from src.spaces.assembly import AssembledSystem


logger = logging.getLogger(__name__)


@dataclass
class SourceSolution:
    u: np.ndarray
    p: np.ndarray
    residual: float
    constraint_residual: float


def solve_source(system: AssembledSystem, f_load: np.ndarray,
                 operator: Optional[SaddleOperator] = None) -> SourceSolution:
    """
    求解混合鞍点系统 [[K₂+M, Cᵀ], [C, 0]] (u, p) = (f, 0)

    Args:
        system: 组装结果
        f_load: 自由自由度上的载荷向量
        operator: 可复用的已分解算子（移位 -1）
    """
    f_load = np.asarray(f_load, dtype=float)
    if operator is None:
        operator = SaddleOperator(system.K2, system.M, system.C, -1.0, system.context())
    u, p = operator.solve(f_load)
    residual = operator.block_residual(u, p, f_load)
    scale = max(np.linalg.norm(u), 1e-300)
    constraint = float(np.linalg.norm(system.C @ u) / scale) if np.any(u) else 0.0
    logger.info(f"源问题求解完成: 相对残差 {residual:.3e}, 约束残差 {constraint:.3e}")
    return SourceSolution(u=u, p=p, residual=residual, constraint_residual=constraint)
