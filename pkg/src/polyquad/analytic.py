"""
解析向量场
多项式向量场与流函数场的精确 curl 运算，以及只提供若干可调用对象的一般场

约定（二维）：curl u = ∂x u2 - ∂y u1；对标量 w，curl w = (∂y w, -∂x w)
于是 (∇×)²u = curl(curl u)，(∇×)³u = -Δ(curl u)，(∇×)⁴u = curl((∇×)³u)
"""

import logging
from typing import Callable, Dict, Optional

import numpy as np
from numpy.polynomial import polynomial as npoly


logger = logging.getLogger(__name__)

QUANTITIES = ('value', 'curl', 'curl2', 'curl3', 'curl4', 'div')


def check_quantity(quantity: str) -> str:
    if quantity not in QUANTITIES:
        raise ValueError(f"未知物理量: {quantity}（可选: {', '.join(QUANTITIES)}）")
    return quantity


class VectorField:
    """向量场基类：子类实现 evaluate(points, quantity)"""

    def evaluate(self, points: np.ndarray, quantity: str = 'value') -> np.ndarray:
        raise NotImplementedError

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.evaluate(points, 'value')

    def value(self, points):
        return self.evaluate(points, 'value')

    def curl(self, points):
        return self.evaluate(points, 'curl')


def _dx(c: np.ndarray) -> np.ndarray:
    return npoly.polyder(c, axis=0)


def _dy(c: np.ndarray) -> np.ndarray:
    return npoly.polyder(c, axis=1)


def _laplacian(c: np.ndarray) -> np.ndarray:
    return _pad_add(npoly.polyder(c, 2, axis=0), npoly.polyder(c, 2, axis=1))


def _pad_add(a: np.ndarray, b: np.ndarray, sa: float = 1.0, sb: float = 1.0) -> np.ndarray:
    shape = (max(a.shape[0], b.shape[0]), max(a.shape[1], b.shape[1]))
    out = np.zeros(shape)
    out[:a.shape[0], :a.shape[1]] += sa * a
    out[:b.shape[0], :b.shape[1]] += sb * b
    return out


class PolynomialField(VectorField):
    """
    多项式向量场 u = (u1, u2)

    Args:
        cx, cy: polyval2d 系数数组，c[i, j] 对应 x^i y^j
    """

    def __init__(self, cx, cy):
        cx = np.atleast_2d(np.asarray(cx, dtype=float))
        cy = np.atleast_2d(np.asarray(cy, dtype=float))
        self.cx = cx
        self.cy = cy

        w = _pad_add(_dx(cy), _dy(cx), 1.0, -1.0)
        w3 = -_laplacian(w)
        self._tables = {
            'value': (cx, cy),
            'curl': (w,),
            'curl2': (_dy(w), -_dx(w)),
            'curl3': (w3,),
            'curl4': (_dy(w3), -_dx(w3)),
            'div': (_pad_add(_dx(cx), _dy(cy)),),
        }

    @property
    def degree(self) -> int:
        def deg(c):
            nz = np.argwhere(np.abs(c) > 0)
            return int(nz.sum(axis=1).max()) if len(nz) else 0
        return max(deg(self.cx), deg(self.cy))

    def evaluate(self, points: np.ndarray, quantity: str = 'value') -> np.ndarray:
        check_quantity(quantity)
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        parts = [npoly.polyval2d(points[:, 0], points[:, 1], c) for c in self._tables[quantity]]
        if len(parts) == 1:
            return parts[0]
        return np.stack(parts, axis=1)

    def __add__(self, other: 'PolynomialField') -> 'PolynomialField':
        return PolynomialField(_pad_add(self.cx, other.cx), _pad_add(self.cy, other.cy))

    def scaled(self, factor: float) -> 'PolynomialField':
        return PolynomialField(factor * self.cx, factor * self.cy)


class StreamFunctionField(PolynomialField):
    """
    由多项式流函数 ψ 生成的无散场 u = curl ψ = (∂y ψ, -∂x ψ)

    Args:
        psi: polyval2d 系数数组
    """

    def __init__(self, psi):
        self.psi = np.atleast_2d(np.asarray(psi, dtype=float))
        super().__init__(_dy(self.psi), -_dx(self.psi))

    def source(self) -> 'StreamFunctionField':
        """对应源问题 (∇×)⁴u + u = f 的右端 f = curl(Δ²ψ + ψ)"""
        return StreamFunctionField(_pad_add(_laplacian(_laplacian(self.psi)), self.psi))


def bubble_stream_function(power: int = 3) -> np.ndarray:
    """ψ = (x(1-x)y(1-y))^power 的系数数组"""
    base = np.array([0.0, 1.0, -1.0])
    one_d = npoly.polypow(base, power)
    return np.outer(one_d, one_d)


def manufactured_solution(power: int = 3) -> StreamFunctionField:
    """单位正方形上满足 u×n = 0 且 ∇×u = 0 的无散制造解"""
    return StreamFunctionField(bubble_stream_function(power))


class CallableField(VectorField):
    """
    由可调用对象给出的一般向量场

    Args:
        value: points -> (n, 2)
        curl: points -> (n,)
        其余 curl2/curl3/curl4/div 可选，缺失时请求会报错
    """

    def __init__(
        self,
        value: Callable[[np.ndarray], np.ndarray],
        curl: Callable[[np.ndarray], np.ndarray],
        **derived: Optional[Callable[[np.ndarray], np.ndarray]],
    ):
        self._callables: Dict[str, Callable] = {'value': value, 'curl': curl}
        for key, func in derived.items():
            check_quantity(key)
            if func is not None:
                self._callables[key] = func

    def has(self, quantity: str) -> bool:
        return quantity in self._callables

    def evaluate(self, points: np.ndarray, quantity: str = 'value') -> np.ndarray:
        check_quantity(quantity)
        if quantity not in self._callables:
            raise ValueError(f"该场未提供 {quantity}")
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        return np.asarray(self._callables[quantity](points), dtype=float)


def has_quantity(field: VectorField, quantity: str) -> bool:
    """判断场能否给出某个物理量"""
    if isinstance(field, CallableField):
        return field.has(quantity)
    return isinstance(field, PolynomialField)
