"""
收敛率表
err(h_i) = |λ(h_i) - λ(h_{i+1})| / λ(h_i)，order(h_i) = log₂(err(h_{i-1}) / err(h_i))
首行无 order，末行既无 err 也无 order
"""

import logging
from dataclasses import dataclass
from functools import partial
from typing import Callable, List, Optional, Sequence

import numpy as np

from src.mesh.triangulation import make_domain
from src.solver.eigen import solve_eigs
from src.spaces.assembly import assemble


logger = logging.getLogger(__name__)

MIN_LEVELS = 3


@dataclass
class RateRow:
    h: float
    eigenvalue: float
    err: Optional[float] = None
    order: Optional[float] = None

    def as_dict(self) -> dict:
        return {'h': self.h, 'lambda_1': self.eigenvalue, 'err': self.err, 'order': self.order}


def tabulate_rates(hs: Sequence[float], eigenvalues: Sequence[float]) -> List[RateRow]:
    """由逐层网格尺寸与特征值生成收敛率表（h 递减排列）"""
    if len(hs) != len(eigenvalues):
        raise ValueError("h 序列与特征值序列长度不一致")
    if len(hs) < MIN_LEVELS:
        raise ValueError(f"收敛率表至少需要 {MIN_LEVELS} 个网格层，收到 {len(hs)}")

    lam = np.asarray(eigenvalues, dtype=float)
    rows = [RateRow(float(h), float(v)) for h, v in zip(hs, lam)]
    for i in range(len(rows) - 1):
        rows[i].err = float(abs(lam[i] - lam[i + 1]) / lam[i])
    for i in range(1, len(rows) - 1):
        prev, cur = rows[i - 1].err, rows[i].err
        if prev > 0 and cur > 0:
            rows[i].order = float(np.log2(prev / cur))
    return rows


def rate_table(domain: str, k: int, levels: Sequence[int], config: Optional[dict] = None,
               first_eigenvalue: Optional[Callable[[int], float]] = None) -> List[RateRow]:
    """
    在一串结构网格上计算最小特征值并生成收敛率表

    Args:
        domain: square | lshape | square_hole
        k: 单元次数
        levels: 每单位剖分数序列，如 [4, 8, 16]
        config: 完整配置字典（使用 mesh/assembly/solver 段）
        first_eigenvalue: n -> λ₁(1/n) 的求解回调；缺省时按 config 直接组装求解
    """
    config = config or {}
    levels = [int(n) for n in levels]
    if len(levels) < MIN_LEVELS:
        raise ValueError(f"收敛率表至少需要 {MIN_LEVELS} 个网格层，收到 {len(levels)}")
    if first_eigenvalue is None:
        first_eigenvalue = partial(_first_eigenvalue, domain, k, config)
    hs, lams = [], []
    for n in levels:
        hs.append(1.0 / n)
        lams.append(float(first_eigenvalue(n)))
    rows = tabulate_rates(hs, lams)
    logger.info(f"收敛率表完成: {domain}, k={k}, levels={levels}")
    return rows


def _first_eigenvalue(domain: str, k: int, config: dict, n: int) -> float:
    solver_cfg = config.get('solver', {})
    mesh = make_domain(domain, n, config.get('mesh', {}).get('diagonal', 'positive'))
    system = assemble(mesh, k, config.get('assembly', {}))
    result = solve_eigs(system, nev=1, tol=solver_cfg.get('tol', 1e-10),
                        shift=solver_cfg.get('shift', 0.0), config=solver_cfg)
    return float(result.eigenvalues[0])
