"""Estimator模块 - 残差型后验估计子与 Dörfler 标记"""

from .residual import (
    EstimatorReport,
    ResidualEstimator,
    local_element_terms,
    local_edge_terms,
    global_report,
    loglog_slope,
    ELEMENT_COLUMNS,
    EDGE_COLUMNS,
)
from .marking import dorfler_mark

__all__ = [
    'EstimatorReport', 'ResidualEstimator',
    'local_element_terms', 'local_edge_terms', 'global_report',
    'loglog_slope', 'ELEMENT_COLUMNS', 'EDGE_COLUMNS',
    'dorfler_mark',
]
