"""
多项式空间与求积公式测试
"""

import pytest
import numpy as np
from math import factorial

from src.exceptions import QuadratureDegreeError
from src.polyquad import (
    CallableField,
    HomogeneousBasis,
    PolyBasis,
    PolynomialField,
    StreamFunctionField,
    d_space,
    edge_rule,
    eval_basis,
    gauss_lobatto_interior,
    manufactured_solution,
    triangle_rule,
)
from src.polyquad.polynomials import derivative_multi_indices


REFERENCE = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
SKEWED = np.array([[0.3, -0.2], [1.7, 0.4], [0.1, 1.1]])


def _monomial_integral(a: int, b: int) -> float:
    """参考三角形上 ∫ x^a y^b = a! b! / (a+b+2)!"""
    return factorial(a) * factorial(b) / factorial(a + b + 2)


class TestQuadrature:
    """三角形与线段求积"""

    def test_reference_values(self):
        rule = triangle_rule(10)
        pts, w = rule.map_triangle(REFERENCE)
        assert w.sum() == pytest.approx(0.5, rel=1e-14)
        assert w @ pts[:, 0] == pytest.approx(1 / 6, rel=1e-14)
        assert w @ (pts[:, 0] ** 4 * pts[:, 1] ** 4) == pytest.approx(1 / 6300, rel=1e-13)

    @pytest.mark.parametrize('degree', [1, 2, 5, 8, 13, 25])
    def test_monomial_sweep(self, degree):
        rule = triangle_rule(degree)
        assert np.all(rule.weights > 0)
        pts, w = rule.map_triangle(REFERENCE)
        for total in range(degree + 1):
            for b in range(total + 1):
                a = total - b
                exact = _monomial_integral(a, b)
                assert w @ (pts[:, 0] ** a * pts[:, 1] ** b) == pytest.approx(exact, rel=1e-13)

    def test_affine_mapping(self):
        rule = triangle_rule(4)
        pts, w = rule.map_triangle(SKEWED)
        d1, d2 = SKEWED[1] - SKEWED[0], SKEWED[2] - SKEWED[0]
        area = 0.5 * abs(d1[0] * d2[1] - d1[1] * d2[0])
        assert w.sum() == pytest.approx(area, rel=1e-14)
        assert (w @ pts) / w.sum() == pytest.approx(SKEWED.mean(axis=0), rel=1e-13)

    def test_edge_rule(self):
        pts, w, t = edge_rule(2).map_segment([0.0, 0.0], [1.0, 0.0])
        assert w.sum() == pytest.approx(1.0, rel=1e-15)
        assert w @ t ** 2 == pytest.approx(1 / 3, rel=1e-14)
        _, w9, t9 = edge_rule(9).map_segment([0.0, 0.0], [1.0, 0.0])
        assert abs(w9 @ t9 ** 9 - 0.1) <= 1e-14

    def test_edge_rule_length(self):
        _, w, _ = edge_rule(6).map_segment([1.0, 1.0], [4.0, 5.0])
        assert w.sum() == pytest.approx(5.0, rel=1e-14)

    @pytest.mark.parametrize('degree', [0, 26])
    def test_degree_out_of_range(self, degree):
        with pytest.raises(QuadratureDegreeError):
            triangle_rule(degree)
        with pytest.raises(QuadratureDegreeError):
            edge_rule(degree)

    def test_gauss_lobatto_interior(self):
        nodes = gauss_lobatto_interior(3)
        assert len(nodes) == 3
        assert np.all(np.diff(nodes) > 0)
        assert nodes == pytest.approx(1 - nodes[::-1], abs=1e-14)
        assert nodes[1] == pytest.approx(0.5, abs=1e-14)
        assert len(gauss_lobatto_interior(0)) == 0


class TestPolyBasis:
    """P_k 正交基"""

    @pytest.mark.parametrize('k', [4, 5])
    def test_gram_identity(self, k):
        basis = PolyBasis(SKEWED, k)
        assert basis.size == (k + 1) * (k + 2) // 2
        assert np.allclose(basis.gram(), np.eye(basis.size), atol=1e-10)

    def test_constant_member_derivatives(self):
        basis = PolyBasis(SKEWED, 4)
        pts = np.random.default_rng(0).dirichlet(np.ones(3), size=7) @ SKEWED
        tables = eval_basis(basis, pts, 1)
        assert np.allclose(tables[(1, 0)][:, 0], 0.0)
        assert np.allclose(tables[(0, 1)][:, 0], 0.0)

    def test_laplacian_of_linear_members(self):
        basis = PolyBasis(SKEWED, 4)
        pts = np.random.default_rng(1).dirichlet(np.ones(3), size=5) @ SKEWED
        tables = eval_basis(basis, pts, 2)
        lap = tables[(2, 0)] + tables[(0, 2)]
        # 前三个成员张成 P_1
        assert np.allclose(lap[:, :3], 0.0, atol=1e-8)

    def test_derivatives_match_polynomial(self):
        """任意 P_k 成员的导数表与 PolynomialField 的精确导数一致"""
        basis = PolyBasis(REFERENCE, 4)
        rng = np.random.default_rng(2)
        c = rng.standard_normal(basis.size)
        pts = rng.dirichlet(np.ones(3), size=9) @ REFERENCE
        tables = eval_basis(basis, pts, 1)
        values = tables[(0, 0)] @ c
        dx = tables[(1, 0)] @ c
        # 用 value 拟合系数，再比较导数
        grid = rng.dirichlet(np.ones(3), size=40) @ REFERENCE
        exps = [(i, j) for i in range(5) for j in range(5 - i)]
        vander = np.stack([grid[:, 0] ** i * grid[:, 1] ** j for i, j in exps], axis=1)
        coef, *_ = np.linalg.lstsq(vander, eval_basis(basis, grid, 0)[(0, 0)] @ c, rcond=None)
        cx = np.zeros((5, 5))
        for (i, j), v in zip(exps, coef):
            cx[i, j] = v
        field = PolynomialField(cx, np.zeros((5, 5)))
        assert np.allclose(field.evaluate(pts)[:, 0], values, atol=1e-9)
        assert np.allclose(field.evaluate(pts, 'div'), dx, atol=1e-8)

    def test_order_above_four_rejected(self):
        with pytest.raises(ValueError):
            derivative_multi_indices(5)
        with pytest.raises(ValueError):
            eval_basis(PolyBasis(REFERENCE, 4), REFERENCE, 5)


class TestHomogeneousAndD:
    """齐次多项式与内部矩量空间"""

    @pytest.mark.parametrize('d', [0, 1, 3, 6])
    def test_homogeneity(self, d):
        basis = HomogeneousBasis(d)
        assert basis.size == d + 1
        pts = np.random.default_rng(d).uniform(-1, 1, size=(10, 2))
        assert np.allclose(basis.evaluate(2 * pts), 2 ** d * basis.evaluate(pts), rtol=1e-12)

    @pytest.mark.parametrize('k, dim', [(4, 6), (5, 12), (6, 20), (7, 30), (8, 42)])
    def test_dimension(self, k, dim):
        space = d_space(k)
        assert space.dim == dim == (k - 1) * (k - 2)
        if k <= 6:
            assert space.gram_rank(SKEWED) == dim

    def test_k_below_four(self):
        with pytest.raises(ValueError):
            d_space(3)

    def test_k4_members_are_radial(self):
        space = d_space(4)
        xi = np.random.default_rng(3).uniform(-0.5, 0.5, size=(6, 2))
        values = space.evaluate(xi)
        cross = xi[:, None, 0] * values[..., 1] - xi[:, None, 1] * values[..., 0]
        assert np.allclose(cross, 0.0)


class TestAnalyticFields:
    """解析场的精确 curl 运算"""

    def test_rotation_field(self):
        # u = (-y, x)
        field = PolynomialField([[0.0, -1.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]])
        pts = np.random.default_rng(4).uniform(size=(5, 2))
        assert np.allclose(field.evaluate(pts, 'curl'), 2.0)
        assert np.allclose(field.evaluate(pts, 'curl2'), 0.0)
        assert np.allclose(field.evaluate(pts, 'div'), 0.0)

    def test_stream_function_identities(self):
        # ψ = x²y³：u = (3x²y², -2xy³)，curl u = -Δψ = -(2y³ + 6x²y)
        psi = np.zeros((3, 4))
        psi[2, 3] = 1.0
        field = StreamFunctionField(psi)
        pts = np.random.default_rng(5).uniform(size=(6, 2))
        x, y = pts[:, 0], pts[:, 1]
        assert np.allclose(field.evaluate(pts)[:, 0], 3 * x ** 2 * y ** 2)
        assert np.allclose(field.evaluate(pts)[:, 1], -2 * x * y ** 3)
        assert np.allclose(field.evaluate(pts, 'div'), 0.0)
        assert np.allclose(field.evaluate(pts, 'curl'), -(2 * y ** 3 + 6 * x ** 2 * y))
        # curl³ u = Δ²ψ = 24 y
        assert np.allclose(field.evaluate(pts, 'curl3'), 24 * y)
        # curl⁴ u = curl(24 y) = (24, 0)
        assert np.allclose(field.evaluate(pts, 'curl4'), np.array([24.0, 0.0]))

    def test_manufactured_boundary_conditions(self):
        field = manufactured_solution()
        s = np.linspace(0, 1, 7)
        edges = [np.stack([s, 0 * s], 1), np.stack([s, 0 * s + 1], 1),
                 np.stack([0 * s, s], 1), np.stack([0 * s + 1, s], 1)]
        for pts in edges:
            assert np.allclose(field.evaluate(pts), 0.0, atol=1e-10)
            assert np.allclose(field.evaluate(pts, 'curl'), 0.0, atol=1e-10)

    def test_source_of_manufactured(self):
        field = manufactured_solution()
        f = field.source()
        pts = np.random.default_rng(6).uniform(size=(8, 2))
        expected = field.evaluate(pts, 'curl4') + field.evaluate(pts)
        assert np.allclose(f.evaluate(pts), expected, rtol=1e-10, atol=1e-8)

    def test_unknown_quantity(self):
        field = PolynomialField([[1.0]], [[0.0]])
        with pytest.raises(ValueError):
            field.evaluate(np.zeros((1, 2)), 'curl5')

    def test_callable_field_missing_quantity(self):
        field = CallableField(value=lambda p: p, curl=lambda p: np.zeros(len(p)))
        assert field.has('curl')
        assert not field.has('curl2')
        with pytest.raises(ValueError):
            field.evaluate(np.zeros((1, 2)), 'curl2')


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
