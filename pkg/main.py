"""
quadcurl - 主程序入口
子命令：eigs / rates / estimate / adapt / check-element / mesh
"""

import os
import sys
import argparse
import logging
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from config import get_config_value, load_config, load_overrides, merge_config
from src.cli import EXIT_FAILURE, EXIT_USAGE, RunConfig, run_command
from src.exceptions import InvalidSubdivisionError, QuadCurlError


# RunConfig 字段在配置文件中的默认来源
CONFIG_DEFAULTS = {
    'domain': 'run.domain',
    'levels': 'run.levels',
    'iterations': 'run.iterations',
    'mesh_file': 'run.mesh_file',
    'k': 'element.k',
    'nev': 'solver.nev',
    'tol': 'solver.tol',
    'sigma': 'solver.shift',
    'deterministic': 'assembly.deterministic',
    'threads': 'assembly.threads',
    'theta': 'estimator.theta',
    'eig_index': 'estimator.eig_index',
    'aggregation': 'estimator.aggregation',
    'format': 'output.format',
}


def setup_logging(config):
    """配置日志系统"""
    log_config = config.get('logging', {})
    log_level = log_config.get('level', 'INFO')
    log_format = log_config.get('format', '%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    log_file = log_config.get('file', 'data/logs/quadcurl.log')

    handlers = [logging.StreamHandler(sys.stderr)]
    if log_file:
        # 确保日志目录存在
        os.makedirs(os.path.dirname(log_file) or '.', exist_ok=True)
        handlers.insert(0, logging.FileHandler(log_file, encoding='utf-8'))

    # 配置根日志记录器
    logging.basicConfig(
        level=getattr(logging, log_level),
        format=log_format,
        handlers=handlers,
    )

    return logging.getLogger(__name__)


def parse_levels(text: str) -> List[int]:
    """'4,8,16' → [4, 8, 16]"""
    try:
        return [int(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"levels 应为逗号分隔的整数，收到 {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=str, help='覆盖配置文件（YAML，或 key=value 行）')
    common.add_argument('--domain', type=str, choices=['square', 'lshape', 'square-hole'],
                        help='区域: square（单位正方形）, lshape（L 形）, square-hole（带孔正方形）')
    common.add_argument('--k', type=int, help='单元次数 (k ≥ 4)')
    common.add_argument('--levels', type=parse_levels, help='每单位剖分数，如 4,8,16')
    common.add_argument('--nev', type=int, help='特征值个数')
    common.add_argument('--tol', type=float, help='特征求解相对精度')
    common.add_argument('--sigma', type=float, help='移位 σ ≥ 0')
    common.add_argument('--output', type=str, help='输出文件路径')
    common.add_argument('--format', type=str, choices=['csv', 'json'], help='输出格式')
    common.add_argument('--deterministic', action=argparse.BooleanOptionalAction, default=None,
                        help='确定性模式（单线程，无时间戳）')
    common.add_argument('--threads', type=int, help='组装线程数')
    common.add_argument('--mesh-file', type=str, help='导入文本格式网格')
    common.add_argument('--eig-index', type=int, help='估计子跟踪的特征值序号（1 起）')

    parser = argparse.ArgumentParser(description='quadcurl - 四阶旋度特征值问题的 H(curl²) 协调有限元')
    subparsers = parser.add_subparsers(dest='command', required=True)

    subparsers.add_parser('eigs', parents=[common], help='特征值表')
    subparsers.add_parser('rates', parents=[common], help='最小特征值收敛率表（至少 3 层）')
    estimate = subparsers.add_parser('estimate', parents=[common], help='后验估计子序列与逐实体分布')
    estimate.add_argument('--check-slope', type=float, help='估计子与误差代理斜率允许偏差')
    estimate.add_argument('--aggregation', type=str, choices=['sum', 'rss'], help='估计子聚合方式')
    adapt = subparsers.add_parser('adapt', parents=[common], help='Dörfler 标记 + 二分加密')
    adapt.add_argument('--theta', type=float, help='Dörfler 比例 θ ∈ (0, 1)')
    adapt.add_argument('--iterations', type=int, help='迭代次数')
    subparsers.add_parser('check-element', parents=[common], help='单元自检')
    subparsers.add_parser('mesh', parents=[common], help='导出结构网格')
    return parser


def build_run_config(args: argparse.Namespace, config: Dict[str, Any]) -> RunConfig:
    """配置文件提供默认值，命令行参数优先"""
    values: Dict[str, Any] = {'command': args.command}
    for name, key_path in CONFIG_DEFAULTS.items():
        value = get_config_value(config, key_path)
        if value is not None:
            values[name] = value
    for name in RunConfig.model_fields:
        value = getattr(args, name, None)
        if value is not None and name != 'command':
            values[name] = value
    return RunConfig(**values)


def main(argv: Optional[List[str]] = None) -> int:
    """主函数，返回退出码"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        config = load_config()
        if args.config:
            config = merge_config(config, load_overrides(args.config))
        logger = setup_logging(config)
        run = build_run_config(args, config)
    except (ValidationError, ValueError, FileNotFoundError) as e:
        print(f"✗ 参数错误: {e}", file=sys.stderr)
        return EXIT_USAGE

    logger.info("=" * 60)
    logger.info(f"quadcurl {run.command} 启动")
    logger.info("=" * 60)

    try:
        return run_command(run, run.to_config(config))
    except InvalidSubdivisionError as e:
        print(f"✗ 参数错误: {e}", file=sys.stderr)
        return EXIT_USAGE
    except QuadCurlError as e:
        logger.error(f"数值失败: {e}")
        print(f"✗ 错误: {e}", file=sys.stderr)
        return EXIT_FAILURE
    except (ValidationError, ValueError) as e:
        print(f"✗ 参数错误: {e}", file=sys.stderr)
        return EXIT_USAGE
    except KeyboardInterrupt:
        print("\n\n程序已中断")
        return EXIT_FAILURE


if __name__ == '__main__':
    sys.exit(main())
