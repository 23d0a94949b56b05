#!/usr/bin/env python3
"""
性能基准测试脚本
测试整个流程的运行时间，包括：
1. 各网格层的网格生成、组装、特征求解与估计子时间
2. 形状缓存（冷/热）对组装时间的影响
3. 多次运行的平均时间
"""

import argparse
import json
import sys
import time
from pathlib import Path
from statistics import mean, stdev
from typing import Any, Dict, List

# 添加项目路径
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

STEPS = ['mesh', 'assembly', 'eigensolve', 'estimator']


def load_config():
    """加载配置"""
    from config import load_config as _load_config
    config = _load_config()
    config.setdefault('output', {})['progress'] = False
    return config


def _stats(values: List[float]) -> Dict[str, Any]:
    return {
        'mean': mean(values),
        'std': stdev(values) if len(values) > 1 else 0,
        'runs': values,
    }


def measure_levels(config: Dict[str, Any], domain: str, levels: List[int],
                   eig_index: int, num_runs: int = 3) -> Dict[str, Any]:
    """测量每个网格层各步骤的时间"""
    from src.pipeline import ExperimentPipeline

    print("\n" + "="*60)
    print(f"测试1: 各网格层分步时间 (domain={domain}, 运行 {num_runs} 次取平均值)")
    print("="*60)

    results = {}
    for n in levels:
        print(f"\n网格层 n={n}...")
        times = {step: [] for step in STEPS}
        info = {}
        for i in range(num_runs):
            # 每次运行新建流程，形状缓存从空开始
            pipeline = ExperimentPipeline(config)

            start = time.perf_counter()
            mesh = pipeline.build_mesh(domain, n)
            times['mesh'].append(time.perf_counter() - start)

            level = pipeline.solve(mesh, eig_index)
            times['assembly'].append(level.timings['assembly'])
            times['eigensolve'].append(level.timings['eigensolve'])

            start = time.perf_counter()
            report = pipeline.estimate(level, eig_index)
            times['estimator'].append(time.perf_counter() - start)

            info = {
                'n_triangles': mesh.n_triangles,
                'ndof': level.system.n_free,
                'lambda': float(level.eigen.eigenvalues[eig_index - 1]),
                'estimator': report.estimator,
            }
            total = sum(times[step][-1] for step in STEPS)
            print(f"  运行 {i+1}/{num_runs}: {total:.3f} 秒 (ndof={info['ndof']}, λ={info['lambda']:.6f})")

        for step in STEPS:
            print(f"  {step:<10}: {mean(times[step]):.3f} 秒 (±{_stats(times[step])['std']:.3f})")
        results[str(n)] = {**info, 'steps': {step: _stats(times[step]) for step in STEPS}}

    return results


def measure_cache(config: Dict[str, Any], domain: str, n: int, num_runs: int = 3) -> Dict[str, Any]:
    """比较空缓存与复用缓存时的组装时间"""
    from src.pipeline import ExperimentPipeline

    print("\n" + "="*60)
    print(f"测试2: 形状缓存对组装时间的影响 (n={n})")
    print("="*60)

    cold, warm = [], []
    for i in range(num_runs):
        pipeline = ExperimentPipeline(config)
        mesh = pipeline.build_mesh(domain, n)

        start = time.perf_counter()
        pipeline.assemble(mesh).assemble()
        cold.append(time.perf_counter() - start)

        start = time.perf_counter()
        pipeline.assemble(mesh).assemble()
        warm.append(time.perf_counter() - start)
        print(f"  运行 {i+1}/{num_runs}: 冷 {cold[-1]:.3f} 秒, 热 {warm[-1]:.3f} 秒")

    speedup = mean(cold) / mean(warm) if mean(warm) > 0 else None
    if speedup:
        print(f"  加速比: {speedup:.2f}x")
    return {'cold': _stats(cold), 'warm': _stats(warm), 'speedup': speedup}


def generate_report(
    level_results: Dict[str, Any],
    cache_results: Dict[str, Any],
    meta: Dict[str, Any],
    output_file: str = "benchmark_report.json"
):
    """生成性能报告（JSON + Markdown）"""
    print("\n" + "="*60)
    print("性能报告汇总")
    print("="*60)

    report = {
        'timestamp': time.strftime('%Y-%m-%d %H:%M:%S'),
        'setup': meta,
        'levels': level_results,
        'cache': cache_results,
    }

    lines = [
        "# 性能基准报告",
        "",
        f"- 时间: {report['timestamp']}",
        f"- 区域: {meta['domain']}, k={meta['k']}, 特征值序号={meta['eig_index']}, 每层运行 {meta['runs']} 次",
        "",
        "| n | 三角形 | ndof | " + " | ".join(f"{step} (秒)" for step in STEPS) + " |",
        "|---|---|---|" + "---|" * len(STEPS),
    ]
    print("\n1. 各层分步时间 (平均):")
    for n, result in level_results.items():
        cells = [f"{result['steps'][step]['mean']:.3f}" for step in STEPS]
        lines.append(f"| {n} | {result['n_triangles']} | {result['ndof']} | " + " | ".join(cells) + " |")
        print(f"   n={n:<4} ndof={result['ndof']:<7} " + "  ".join(
            f"{step}={cell}" for step, cell in zip(STEPS, cells)))

    print("\n2. 形状缓存:")
    print(f"   冷缓存组装: {cache_results['cold']['mean']:.3f} 秒 (±{cache_results['cold']['std']:.3f})")
    print(f"   热缓存组装: {cache_results['warm']['mean']:.3f} 秒 (±{cache_results['warm']['std']:.3f})")
    lines += [
        "",
        "## 形状缓存",
        "",
        f"- 冷缓存组装: {cache_results['cold']['mean']:.3f} 秒",
        f"- 热缓存组装: {cache_results['warm']['mean']:.3f} 秒",
    ]
    if cache_results['speedup']:
        lines.append(f"- 加速比: {cache_results['speedup']:.2f}x")

    # 保存报告
    output_path = project_root / "data" / output_file
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, 'w', encoding='utf-8') as f:
        json.dump(report, f, indent=2, ensure_ascii=False)
    md_path = output_path.with_suffix('.md')
    md_path.write_text("\n".join(lines) + "\n", encoding='utf-8')
    print(f"\n报告已保存到: {output_path}")
    print(f"             {md_path}")

    return report


def main():
    """主函数"""
    parser = argparse.ArgumentParser(description='四阶旋度特征值求解器 - 性能基准测试')
    parser.add_argument('--domain', default='lshape', help='计算区域 (square / lshape / square-hole)')
    parser.add_argument('--levels', default='4,8,16', help='逗号分隔的网格层 n')
    parser.add_argument('--eig-index', type=int, default=1, help='跟踪的特征值序号（1 起）')
    parser.add_argument('--runs', type=int, default=3, help='每层运行次数')
    args = parser.parse_args()

    print("="*60)
    print("四阶旋度特征值求解器 - 性能基准测试")
    print("="*60)

    print("\n加载配置...")
    config = load_config()
    levels = [int(x) for x in args.levels.split(',') if x.strip()]
    if not levels or args.runs < 1 or args.eig_index < 1:
        print("✗ 错误: 网格层、运行次数与特征值序号都必须为正")
        return

    meta = {
        'domain': args.domain,
        'k': config.get('element', {}).get('k', 4),
        'eig_index': args.eig_index,
        'runs': args.runs,
        'levels': levels,
    }
    print(f"  ✓ k={meta['k']}, levels={levels}")

    # 测试1: 各网格层分步时间
    level_results = measure_levels(config, args.domain, levels, args.eig_index, num_runs=args.runs)

    # 测试2: 形状缓存
    cache_results = measure_cache(config, args.domain, levels[-1], num_runs=args.runs)

    generate_report(level_results, cache_results, meta)

    print("\n" + "="*60)
    print("测试完成！")
    print("="*60)


if __name__ == "__main__":
    main()
