"""CLI模块 - 运行配置验证、子命令与结果输出"""

from .models import RunConfig
from .commands import (
    cmd_eigs,
    cmd_rates,
    cmd_estimate,
    cmd_adapt,
    cmd_check_element,
    cmd_mesh,
    run_command,
    COMMANDS,
    EXIT_OK,
    EXIT_FAILURE,
    EXIT_USAGE,
)
from .output import write_table, read_csv, version_string, build_metadata, SCHEMAS

__all__ = [
    'RunConfig',
    'cmd_eigs', 'cmd_rates', 'cmd_estimate', 'cmd_adapt', 'cmd_check_element', 'cmd_mesh',
    'run_command', 'COMMANDS', 'EXIT_OK', 'EXIT_FAILURE', 'EXIT_USAGE',
    'write_table', 'read_csv', 'version_string', 'build_metadata', 'SCHEMAS',
]
