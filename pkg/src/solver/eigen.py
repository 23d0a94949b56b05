"""
约束广义特征值问题
((∇×)²u, (∇×)²v) = λ (u, v)，u ∈ X_h（离散无散）
移位-求逆 Lanczos（ARPACK），逆算子由鞍点求解给出
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
from scipy import linalg
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh, factorized

from src.exceptions import ConvergenceError, SolverError
from src.solver.saddle import SaddleOperator
from src.spaces.assembly import AssembledSystem


logger = logging.getLogger(__name__)


@dataclass
class EigenResult:
    """
    特征对：eigenvalues 升序，vectors 的列 M-正交归一

    residuals: ‖K₂u - λMu - Cᵀp‖ / (λ‖Mu‖)
    multipliers: 乘子 p 的范数（离散意义下为 0）
    """
    eigenvalues: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    multipliers: np.ndarray
    shift: float
    iterations: int
    harmonic_dropped: int = 0
    info: Dict[str, Any] = field(default_factory=dict)

    @property
    def mu(self) -> np.ndarray:
        """μ_h = 1 / (λ_h + 1)"""
        return 1.0 / (self.eigenvalues + 1.0)

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def pairs(self) -> List[tuple]:
        return [(float(lam), self.vectors[:, i], float(self.residuals[i]))
                for i, lam in enumerate(self.eigenvalues)]


def _subspace_size(n_wanted: int, n: int, n_constrained: int) -> int:
    """Lanczos 子空间维数，不超过 OPinv 值域（约束子空间）的维数"""
    return min(n - 1, n_constrained, max(2 * n_wanted + 1, n_wanted + 5, 20))


def constrained_residuals(system: AssembledSystem, lam: np.ndarray, vectors: np.ndarray):
    """残差去掉 range(Cᵀ) 分量后的相对范数与对应乘子范数"""
    K, M, C = system.K2, system.M, system.C
    cct = factorized((C @ C.T).tocsc())
    residuals = np.empty(len(lam))
    multipliers = np.empty(len(lam))
    for i, value in enumerate(lam):
        u = vectors[:, i]
        mu = M @ u
        r = K @ u - value * mu
        p = cct(C @ r)
        r = r - C.T @ p
        residuals[i] = np.linalg.norm(r) / (abs(value) * np.linalg.norm(mu))
        multipliers[i] = np.linalg.norm(p)
    return residuals, multipliers


def solve_eigs(system: AssembledSystem, nev: int = 5, tol: float = 1e-10, shift: float = 0.0,
               config: Optional[Dict[str, Any]] = None) -> EigenResult:
    """
    计算最小的 nev 个约束特征值

    Args:
        system: 组装结果
        nev: 特征值个数 (≥ 1)
        tol: ARPACK 相对精度
        shift: 移位 σ ≥ 0；σ = 0 时以 K₂+M（源问题算子）作逆算子
        config: solver 配置段（max_iterations, harmonic_tol, seed）
    """
    config = config or {}
    nev = int(nev)
    if nev < 1:
        raise ValueError(f"nev 必须 ≥ 1，收到 {nev}")
    if shift < 0:
        raise ValueError(f"移位必须非负，收到 {shift}")
    max_iterations = int(config.get('max_iterations', 500))
    harmonic_tol = float(config.get('harmonic_tol', 1e-8))
    seed = int(config.get('seed', 0))

    n = system.n_free
    n_holes = max(system.mesh.n_holes, 0)
    n_wanted = nev + n_holes
    n_constrained = n - system.n_multipliers
    if n_wanted >= min(n - 1, n_constrained):
        raise ValueError(f"请求的特征值个数 {n_wanted} 超过问题规模 {n}（约束子空间维数 {n_constrained}）")

    tau = -1.0 if shift == 0 else float(shift)
    context = system.context()
    operator = SaddleOperator(system.K2, system.M, system.C, tau, context, seed=seed)
    opinv = LinearOperator((n, n), matvec=lambda g: operator.solve(np.ravel(g))[0], dtype=float)

    ncv = _subspace_size(n_wanted, n, n_constrained)
    v0 = np.random.default_rng(seed).standard_normal(n)
    logger.info(f"开始特征求解: nev={nev}(+{n_holes} 调和), ncv={ncv}, tol={tol:g}, τ={tau:g}")
    try:
        values, vectors = eigsh(
            system.K2, k=n_wanted, M=system.M, sigma=tau, which='LM',
            OPinv=opinv, ncv=ncv, maxiter=max_iterations, tol=tol, v0=v0,
        )
    except ArpackNoConvergence as e:
        logger.error(f"特征求解未收敛: 已收敛 {len(e.eigenvalues)} 个")
        raise ConvergenceError(
            f"ARPACK 在 {max_iterations} 次重启内未收敛（已收敛 {len(e.eigenvalues)}/{n_wanted}）",
            context,
        ) from e

    order = np.argsort(values)
    values = values[order]
    vectors = vectors[:, order]

    top = np.max(np.abs(values))
    harmonic = values <= harmonic_tol * top
    dropped = int(harmonic.sum())
    if dropped:
        logger.warning(
            f"丢弃 {dropped} 个调和场特征值 {values[harmonic].tolist()}（区域孔数 {n_holes}）"
        )
    values = values[~harmonic][:nev]
    vectors = vectors[:, ~harmonic][:, :nev]
    if len(values) < nev:
        raise SolverError(f"有效特征值个数不足: {len(values)} < {nev}", context)

    # Rayleigh-Ritz：精化并 M-正交归一
    kr = vectors.T @ (system.K2 @ vectors)
    mr = vectors.T @ (system.M @ vectors)
    values, coeffs = linalg.eigh(0.5 * (kr + kr.T), 0.5 * (mr + mr.T))
    vectors = vectors @ coeffs

    residuals, multipliers = constrained_residuals(system, values, vectors)
    if np.any(values <= 0):
        raise SolverError(f"出现非正特征值 {values.tolist()}", context)
    if np.any(residuals > max(1e3 * tol, 1e-6)):
        logger.warning(f"特征对残差偏大: {residuals.tolist()}")

    logger.info(f"特征值: {', '.join(f'{v:.9g}' for v in values)}（求逆次数 {operator.applications}）")
    return EigenResult(
        eigenvalues=values,
        vectors=vectors,
        residuals=residuals,
        multipliers=multipliers,
        shift=float(shift),
        iterations=operator.applications,
        harmonic_dropped=dropped,
        info={'ncv': ncv, 'tau': tau, 'n_holes': n_holes},
    )
