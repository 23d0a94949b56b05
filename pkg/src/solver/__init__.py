"""Solver模块 - 鞍点源问题、约束特征值问题与收敛率表"""

from .saddle import SaddleOperator
from .source import SourceSolution, solve_source
from .eigen import EigenResult, solve_eigs, constrained_residuals
from .rates import RateRow, tabulate_rates, rate_table

__all__ = [
    'SaddleOperator',
    'SourceSolution', 'solve_source',
    'EigenResult', 'solve_eigs', 'constrained_residuals',
    'RateRow', 'tabulate_rates', 'rate_table',
]
