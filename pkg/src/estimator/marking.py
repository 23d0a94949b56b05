"""
Dörfler 标记
"""

import logging
from typing import Set

import numpy as np

from src.exceptions import ContractError
from src.estimator.residual import EstimatorReport


logger = logging.getLogger(__name__)


def dorfler_mark(report: EstimatorReport, theta: float) -> Set[int]:
    """
    选出满足 Σ_{T∈S} η(T)² ≥ θ² Σ_T η(T)² 的最小集合 S（同值按编号先后）

    Args:
        report: 估计子报告（element_indicator 为 η(T)²）
        theta: (0, 1) 内的比例
    """
    if not 0.0 < theta < 1.0:
        raise ContractError(f"θ 必须在 (0, 1) 内，收到 {theta}")
    eta2 = np.asarray(report.element_indicator, dtype=float)
    total = float(eta2.sum())
    if total <= 0:
        logger.warning("估计子全为零，不标记任何单元")
        return set()

    ids = np.arange(len(eta2))
    order = np.lexsort((ids, -eta2))
    cumulative = np.cumsum(eta2[order])
    target = theta ** 2 * total * (1 - 1e-12)
    count = int(np.argmax(cumulative >= target)) + 1
    marked = {int(t) for t in order[:count]}
    logger.info(f"Dörfler 标记: θ={theta}, 标记 {len(marked)}/{len(eta2)} 个单元")
    return marked
