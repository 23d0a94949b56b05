"""Pipeline模块 - 实验流程控制"""

from .experiment import ExperimentPipeline, LevelResult, DEFAULT_EIG_INDEX, ERROR_PROXY

__all__ = ['ExperimentPipeline', 'LevelResult', 'DEFAULT_EIG_INDEX', 'ERROR_PROXY']
