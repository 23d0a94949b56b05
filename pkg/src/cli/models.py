"""
CLI 运行配置模型
使用Pydantic进行参数验证
"""

from typing import List, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from src.mesh.triangulation import DOMAIN_ALIASES


class RunConfig(BaseModel):
    """一次命令行运行的完整参数"""
    command: Literal['eigs', 'rates', 'estimate', 'adapt', 'check-element', 'mesh'] = Field(
        ..., description="子命令"
    )
    domain: str = Field('square', description="区域: square | lshape | square-hole")
    k: int = Field(4, ge=4, le=8, description="单元次数 (k ≥ 4)")
    levels: List[int] = Field(default_factory=lambda: [4, 8], description="每单位剖分数序列")
    nev: int = Field(5, ge=1, description="特征值个数")
    tol: float = Field(1e-10, gt=0.0, lt=1.0, description="特征求解相对精度")
    sigma: float = Field(0.0, ge=0.0, description="移位 σ")
    output: Optional[str] = Field(None, description="输出文件路径")
    format: Literal['csv', 'json'] = Field('csv', description="输出格式")
    deterministic: bool = Field(True, description="确定性模式（单线程组装，输出不含时间戳）")
    threads: int = Field(1, ge=1, description="组装线程数")
    theta: float = Field(0.5, description="Dörfler 标记比例")
    iterations: int = Field(5, ge=0, description="自适应迭代次数")
    eig_index: Optional[int] = Field(None, ge=1, description="估计子跟踪的特征值序号（1 起）")
    check_slope: Optional[float] = Field(None, gt=0.0, description="估计子与误差代理斜率允许偏差")
    mesh_file: Optional[str] = Field(None, description="导入的网格文件")
    aggregation: Literal['sum', 'rss'] = Field('sum', description="估计子聚合方式")

    model_config = {
        'json_schema_extra': {
            'example': {
                'command': 'eigs',
                'domain': 'square',
                'k': 4,
                'levels': [4, 8],
                'nev': 5,
            }
        }
    }

    @field_validator('domain')
    @classmethod
    def _check_domain(cls, value: str) -> str:
        key = value.strip().lower()
        if key not in DOMAIN_ALIASES:
            raise ValueError(f"未知区域 {value}（可选: square, lshape, square-hole）")
        return DOMAIN_ALIASES[key]

    @field_validator('levels')
    @classmethod
    def _check_levels(cls, value: List[int]) -> List[int]:
        if not value:
            raise ValueError("levels 不能为空")
        if any(n < 1 for n in value):
            raise ValueError("levels 中的剖分数必须 ≥ 1")
        return value

    @model_validator(mode='after')
    def _check_command(self) -> 'RunConfig':
        if self.command == 'adapt' and not 0.0 < self.theta < 1.0:
            raise ValueError(f"adapt 要求 θ ∈ (0, 1)，收到 {self.theta}")
        if self.command == 'rates' and len(self.levels) < 3:
            raise ValueError(f"rates 至少需要 3 个网格层 (minimum 3 levels)，收到 {len(self.levels)}")
        return self

    def to_config(self, base: dict) -> dict:
        """把命令行参数写回配置字典（返回新字典）"""
        config = {key: dict(value) if isinstance(value, dict) else value for key, value in base.items()}
        config.setdefault('element', {})['k'] = self.k
        assembly = config.setdefault('assembly', {})
        assembly['deterministic'] = self.deterministic
        assembly['threads'] = 1 if self.deterministic else self.threads
        solver = config.setdefault('solver', {})
        solver['tol'] = self.tol
        solver['shift'] = self.sigma
        estimator = config.setdefault('estimator', {})
        estimator['theta'] = self.theta
        estimator['aggregation'] = self.aggregation
        if self.eig_index is not None:
            estimator['eig_index'] = self.eig_index
        config.setdefault('output', {})['format'] = self.format
        return config
