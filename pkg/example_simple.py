"""
简单的使用示例
演示如何在单位正方形上求前几个四阶旋度特征值，并计算一个特征对的后验估计子
"""

import os
import sys

# 添加项目根目录到路径
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from config import load_config
from src.exceptions import QuadCurlError
from src.pipeline import ExperimentPipeline


def main():
    print("\n" + "="*60)
    print("四阶旋度特征值求解器 - 简单示例")
    print("="*60)

    try:
        # 加载配置
        print("\n[1/3] 加载配置...")
        config = load_config()
        config.setdefault('output', {})['progress'] = False
        print("✓ 配置加载成功")

        # 初始化流程
        print("\n[2/3] 初始化实验流程控制器...")
        pipeline = ExperimentPipeline(config)
        print(f"✓ 初始化成功 (k={pipeline.k})")

        # 网格 h = 1/4 上求解
        print("\n[3/3] 组装并求解 (square, h=1/4, nev=5)...")
        mesh = pipeline.build_mesh('square', 4)
        level = pipeline.solve(mesh, nev=5)
        print(f"✓ 自由度: {level.system.n_free}, 约束: {level.system.n_multipliers}")

        print("\n" + "-"*60)
        print("特征值:")
        print("-"*60)
        for i, lam in enumerate(level.eigen.eigenvalues, 1):
            print(f"  λ_{i} = {lam:.6f}")

        # 第 3 个特征值是单重的
        report = pipeline.estimate(level, eig_index=3)
        print(f"\n估计子 (λ_3): η₁={report.eta1:.4e}, η₃={report.eta3:.4e}, η={report.estimator:.4e}")

        print("\n" + "="*60)
        print("完成")
        print("="*60)
        print("\n提示:")
        print("- 运行 'python main.py rates --domain lshape --levels 4,8,16' 得到收敛率表")
        print("- 运行 'python main.py adapt --domain lshape --theta 0.5' 进行自适应加密")
        print("- 运行 'pytest tests/' 进行完整测试")
        print("="*60 + "\n")

    except KeyboardInterrupt:
        print("\n\n程序已中断")
    except QuadCurlError as e:
        print(f"\n错误: {str(e)}")
        return 1

    return 0


if __name__ == '__main__':
    sys.exit(main())
