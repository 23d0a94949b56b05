"""
鞍点系统的稀疏 LU 分解
[[K₂ - τM, Cᵀ], [C, 0]] (u, p) = (g, 0)
"""

import logging
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from src.exceptions import SolverError


logger = logging.getLogger(__name__)


class SaddleOperator:
    """
    带散度约束的移位算子

    Args:
        K: 刚度矩阵（自由自由度）
        M: 质量矩阵
        C: 约束矩阵 (n_mult, n_free)
        tau: 移位，块 (1,1) 为 K - tau*M
        context: 报错时附带的网格/次数信息
    """

    def __init__(self, K, M, C, tau: float, context: Optional[Dict[str, Any]] = None,
                 check_tol: float = 1e-6, seed: int = 0):
        self.n = K.shape[0]
        self.m = C.shape[0]
        self.tau = float(tau)
        self.context = dict(context or {})
        self.context['shift'] = self.tau
        self.applications = 0

        self.matrix = sparse.bmat([[K - self.tau * M, C.T], [C, None]], format='csc')
        logger.info(f"鞍点系统分解: 规模 {self.matrix.shape[0]} ({self.n}+{self.m}), nnz={self.matrix.nnz}")
        try:
            self._lu = splu(self.matrix)
        except RuntimeError as e:
            logger.error(f"鞍点系统分解失败: {e}")
            raise SolverError(f"鞍点系统奇异，无法分解: {e}", self.context) from e

        self._check(check_tol, seed)

    def _check(self, check_tol: float, seed: int):
        """用随机右端检查分解质量，移位接近特征值时残差会失控"""
        rhs = np.random.default_rng(seed).standard_normal(self.matrix.shape[0])
        sol = self._lu.solve(rhs)
        residual = np.linalg.norm(self.matrix @ sol - rhs) / np.linalg.norm(rhs)
        if not np.all(np.isfinite(sol)) or residual > check_tol:
            logger.error(f"鞍点系统近奇异: 相对残差 {residual:.3e}")
            raise SolverError(
                f"鞍点系统近奇异（移位可能过于接近特征值），相对残差 {residual:.3e}",
                self.context,
            )
        logger.debug(f"分解检查通过: 相对残差 {residual:.3e}")

    def solve(self, g: np.ndarray, h: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
        """求解 (u, p)"""
        rhs = np.zeros(self.n + self.m)
        rhs[:self.n] = g
        if h is not None:
            rhs[self.n:] = h
        sol = self._lu.solve(rhs)
        self.applications += 1
        return sol[:self.n], sol[self.n:]

    def block_residual(self, u: np.ndarray, p: np.ndarray, g: np.ndarray) -> float:
        """两个块方程的相对残差"""
        rhs = np.concatenate([g, np.zeros(self.m)])
        res = self.matrix @ np.concatenate([u, p]) - rhs
        scale = max(np.linalg.norm(rhs), np.linalg.norm(self.matrix @ np.concatenate([u, p])), 1e-300)
        return float(np.linalg.norm(res) / scale)
