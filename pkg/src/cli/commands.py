"""
命令行子命令实现
每个 cmd_* 接收已验证的 RunConfig 与合并后的配置字典，返回进程退出码
"""

import logging
from pathlib import Path
from typing import Any, Dict, List

from src.cli.models import RunConfig
from src.cli.output import SCHEMAS, build_metadata, eigs_columns, format_table, write_table
from src.mesh.io import write_mesh
from src.pipeline.experiment import ExperimentPipeline


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _banner(title: str):
    print("\n" + "=" * 60)
    print(title)
    print("=" * 60)


def _output_path(run: RunConfig, config: Dict[str, Any], suffix: str = '') -> Path:
    if run.output:
        path = Path(run.output)
        return path.with_name(f"{path.stem}{suffix}{path.suffix}") if suffix else path
    directory = Path(config.get('output', {}).get('directory', 'data/results'))
    return directory / f"{run.command}_{run.domain}{suffix}.{run.format}"


def _metadata(run: RunConfig) -> Dict[str, Any]:
    return build_metadata(run.command, run.model_dump(mode='json'), run.deterministic)


def cmd_eigs(run: RunConfig, config: Dict[str, Any]) -> int:
    """逐层输出前 nev 个特征值"""
    _banner(f"特征值表: domain={run.domain}, k={run.k}, nev={run.nev}")
    pipeline = ExperimentPipeline(config)
    rows = pipeline.run_eigs(run.domain, run.levels, run.nev, mesh_file=run.mesh_file)
    columns = eigs_columns(run.nev)
    print(format_table(rows, columns))
    path = write_table(rows, columns, _output_path(run, config), run.format, _metadata(run))
    print(f"\n✓ 结果已保存: {path}")
    return EXIT_OK


def cmd_rates(run: RunConfig, config: Dict[str, Any]) -> int:
    """最小特征值的收敛率表"""
    _banner(f"收敛率表: domain={run.domain}, k={run.k}, levels={run.levels}")
    pipeline = ExperimentPipeline(config)
    rows = [row.as_dict() for row in pipeline.run_rates(run.domain, run.levels)]
    columns = SCHEMAS['rates']
    print(format_table(rows, columns))
    path = write_table(rows, columns, _output_path(run, config), run.format, _metadata(run))
    print(f"\n✓ 结果已保存: {path}")
    return EXIT_OK


def cmd_estimate(run: RunConfig, config: Dict[str, Any]) -> int:
    """估计子序列与逐实体分布；可选斜率一致性检查"""
    _banner(f"后验估计子: domain={run.domain}, k={run.k}, levels={run.levels}")
    pipeline = ExperimentPipeline(config)
    result = pipeline.run_estimate(run.domain, run.levels, eig_index=run.eig_index, mesh_file=run.mesh_file)
    series: List[Dict[str, Any]] = result['series']
    slopes = result['slopes']
    metadata = _metadata(run)
    metadata['eig_index'] = result['eig_index']

    print(format_table(series, SCHEMAS['estimate']))
    path = write_table(series, SCHEMAS['estimate'], _output_path(run, config), run.format, metadata,
                       extra={'slopes': slopes})
    print(f"\n✓ 估计子序列已保存: {path}")

    for row, report in zip(series, result['reports']):
        tag = f"_entities_n{row['n']}" if row['n'] else "_entities_mesh"
        entity_path = write_table(report.rows(), SCHEMAS['entities'], _output_path(run, config, tag),
                                  run.format, metadata)
        logger.debug(f"逐实体估计子: {entity_path}")

    if slopes['bound'] is not None:
        print(f"斜率: 估计子界 {slopes['bound']:.4f}, 误差代理 {slopes['error_proxy']:.4f}")

    if run.check_slope is not None:
        if slopes['bound'] is None:
            raise ValueError("--check-slope 需要至少 3 个网格层")
        diff = abs(slopes['bound'] - slopes['error_proxy'])
        if diff > run.check_slope:
            print(f"✗ 斜率差 {diff:.4f} 超过允许值 {run.check_slope}")
            logger.error(f"斜率检查失败: |{slopes['bound']:.4f} - {slopes['error_proxy']:.4f}| > {run.check_slope}")
            return EXIT_FAILURE
        print(f"✓ 斜率差 {diff:.4f} ≤ {run.check_slope}")
    return EXIT_OK


def cmd_adapt(run: RunConfig, config: Dict[str, Any]) -> int:
    """自适应加密：以 levels 的第一项作为初始剖分"""
    n = run.levels[0]
    _banner(f"自适应加密: domain={run.domain}, n={n}, θ={run.theta}, 迭代 {run.iterations} 次")
    pipeline = ExperimentPipeline(config)
    trace = pipeline.run_adapt(run.domain, n, run.theta, run.iterations,
                               eig_index=run.eig_index, mesh_file=run.mesh_file)
    columns = SCHEMAS['adapt']
    print(format_table(trace, columns))
    path = write_table(trace, columns, _output_path(run, config), run.format, _metadata(run))
    print(f"\n✓ 加密轨迹已保存: {path}")
    return EXIT_OK


def cmd_check_element(run: RunConfig, config: Dict[str, Any]) -> int:
    """单元四项自检；任一失败返回非零"""
    _banner(f"单元自检: k={run.k}")
    pipeline = ExperimentPipeline(config)
    seed = int(config.get('solver', {}).get('seed', 0))
    suites = pipeline.check_element(run.k, seed=seed)
    rows = []
    for name, suite in suites.items():
        mark = '✓ PASS' if suite['passed'] else '✗ FAIL'
        print(f"  {mark}  {name:<20} {suite['detail']}")
        rows.append({'suite': name, 'passed': bool(suite['passed']), 'detail': suite['detail']})
    if run.output:
        write_table(rows, SCHEMAS['check-element'], run.output, run.format, _metadata(run))
    if all(row['passed'] for row in rows):
        print("\n✓ 全部通过")
        return EXIT_OK
    print("\n✗ 存在失败项")
    return EXIT_FAILURE


def cmd_mesh(run: RunConfig, config: Dict[str, Any]) -> int:
    """生成结构网格并以文本格式导出（每个剖分数一个文件）"""
    _banner(f"网格导出: domain={run.domain}, levels={run.levels}")
    pipeline = ExperimentPipeline(config)
    for n in run.levels:
        mesh = pipeline.build_mesh(run.domain, n)
        audit = mesh.audit()
        failed = [name for name, ok in audit.items() if not ok]
        if failed:
            print(f"✗ 网格检查失败: {', '.join(failed)}")
            return EXIT_FAILURE
        if run.output and len(run.levels) == 1:
            path = Path(run.output)
        elif run.output:
            path = _output_path(run, config, f"_n{n}")
        else:
            directory = Path(config.get('output', {}).get('directory', 'data/results'))
            path = directory / f"{run.domain}_n{n}.mesh"
        write_mesh(mesh, path)
        print(f"✓ n={n}: {mesh.n_vertices} 顶点, {mesh.n_edges} 边, {mesh.n_triangles} 三角形 → {path}")
    return EXIT_OK


COMMANDS = {
    'eigs': cmd_eigs,
    'rates': cmd_rates,
    'estimate': cmd_estimate,
    'adapt': cmd_adapt,
    'check-element': cmd_check_element,
    'mesh': cmd_mesh,
}


def run_command(run: RunConfig, config: Dict[str, Any]) -> int:
    return COMMANDS[run.command](run, config)
