"""
H(curl²) 单元测试
"""

import pytest
import numpy as np

from src.element import (
    LagrangeElement,
    LocalElement,
    build_local,
    dof_functionals,
    eval_field,
    interpolate,
    lagrange_nodes,
)
from src.element.curl2_element import check_degree, local_counts
from src.exceptions import UnisolvenceError
from src.pipeline.experiment import ExperimentPipeline
from src.polyquad import PolynomialField, StreamFunctionField
from src.polyquad.quadrature import triangle_rule


REFERENCE = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


_random_triangle = ExperimentPipeline._random_triangle


def _random_poly_field(rng: np.random.Generator, degree: int) -> PolynomialField:
    cx = np.zeros((degree + 1, degree + 1))
    cy = np.zeros((degree + 1, degree + 1))
    for i in range(degree + 1):
        for j in range(degree + 1 - i):
            cx[i, j], cy[i, j] = rng.standard_normal(2)
    return PolynomialField(cx, cy)


class TestDofFunctionals:
    """自由度泛函的个数与顺序"""

    @pytest.mark.parametrize('k, counts', [(4, (9, 15, 6)), (5, (12, 18, 12))])
    def test_counts(self, k, counts):
        dofs = dof_functionals(REFERENCE, k)
        kinds = [d.kind for d in dofs]
        assert (kinds.count('curl_point'), kinds.count('edge_moment'), kinds.count('interior_moment')) == counts
        assert len(dofs) == (k + 1) * (k + 2) == local_counts(k)['total']
        assert [d.index for d in dofs] == list(range(len(dofs)))

    def test_vertex_points_first(self):
        dofs = dof_functionals(REFERENCE, 4)
        for i in range(3):
            assert dofs[i].owner == 'vertex'
            assert dofs[i].point == pytest.approx(tuple(REFERENCE[i]))

    def test_edge_points_lie_on_edges(self):
        dofs = dof_functionals(REFERENCE, 6)
        for d in dofs:
            if d.kind == 'curl_point' and d.owner == 'edge':
                a, b = REFERENCE[(d.edge + 1) % 3], REFERENCE[(d.edge + 2) % 3]
                p = np.asarray(d.point)
                assert abs((b - a)[0] * (p - a)[1] - (b - a)[1] * (p - a)[0]) < 1e-14

    def test_k_below_four(self):
        with pytest.raises(ValueError):
            check_degree(3)
        with pytest.raises(ValueError):
            dof_functionals(REFERENCE, 3)
        with pytest.raises(ValueError):
            build_local(REFERENCE, 3)


class TestUnisolvence:
    """Vandermonde 非奇异与对偶性"""

    @pytest.mark.parametrize('k', [4, 5, 6])
    def test_reference_triangle(self, k):
        element = build_local(REFERENCE, k)
        assert element.n_dofs == (k + 1) * (k + 2)
        assert np.isfinite(element.condition)
        assert element.condition <= 1e12

    @pytest.mark.parametrize('k', [4, 5])
    def test_duality(self, k):
        element = build_local(REFERENCE, k)
        gram = element.apply_functionals(element.shape)
        assert np.abs(gram - np.eye(element.n_dofs)).max() <= 1e-8

    @pytest.mark.parametrize('k', [4, 5])
    def test_random_triangles(self, k):
        rng = np.random.default_rng(k)
        for _ in range(20):
            element = build_local(_random_triangle(rng), k)
            assert element.condition <= 1e12

    def test_condition_limit_raises(self):
        with pytest.raises(UnisolvenceError) as info:
            LocalElement(REFERENCE, 4, triangle=7, condition_limit=1.0)
        assert info.value.triangle == 7
        assert info.value.condition > 1.0


class TestInterpolation:
    """插值与精确求值"""

    @pytest.mark.parametrize('k', [4, 5])
    def test_reproduces_polynomials(self, k):
        rng = np.random.default_rng(10 + k)
        vertices = _random_triangle(rng)
        element = build_local(vertices, k)
        field = _random_poly_field(rng, k)
        coeffs = interpolate(element, field)
        pts = rng.dirichlet(np.ones(3), size=15) @ vertices
        for quantity, tol in (('value', 1e-9), ('curl', 1e-9), ('curl2', 1e-7), ('div', 1e-7)):
            exact = field.evaluate(pts, quantity)
            approx = eval_field(element, coeffs, pts, quantity)
            assert np.abs(exact - approx).max() <= tol * max(np.abs(exact).max(), 1.0)

    def test_interpolation_is_idempotent(self):
        element = build_local(REFERENCE, 4)
        rng = np.random.default_rng(3)
        coeffs = rng.standard_normal(element.n_dofs)

        class Shape:
            def evaluate(self, points, quantity='value'):
                return element.eval_field(coeffs, points, quantity)

        assert np.allclose(element.interpolate(Shape()), coeffs, atol=1e-9)

    def test_rotation_and_constant(self):
        element = build_local(REFERENCE, 4)
        pts = np.random.default_rng(4).dirichlet(np.ones(3), size=6) @ REFERENCE
        rotation = PolynomialField([[0.0, -1.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]])
        coeffs = element.interpolate(rotation)
        assert np.allclose(element.eval_field(coeffs, pts, 'curl'), 2.0, atol=1e-10)
        assert np.allclose(element.eval_field(coeffs, pts, 'curl2'), 0.0, atol=1e-9)
        constant = PolynomialField([[1.5]], [[-0.5]])
        coeffs = element.interpolate(constant)
        assert np.allclose(element.eval_field(coeffs, pts, 'curl'), 0.0, atol=1e-10)
        assert np.allclose(element.eval_field(coeffs, pts, 'div'), 0.0, atol=1e-10)

    def test_high_order_curls(self):
        # ψ = x²y³：u ∈ P₄²，(∇×)³u = 24y，(∇×)⁴u = (24, 0)
        psi = np.zeros((3, 4))
        psi[2, 3] = 1.0
        field = StreamFunctionField(psi)
        vertices = np.array([[0.1, 0.2], [0.9, 0.3], [0.4, 1.0]])
        element = build_local(vertices, 4)
        coeffs = element.interpolate(field)
        pts = np.random.default_rng(5).dirichlet(np.ones(3), size=10) @ vertices
        assert np.allclose(element.eval_field(coeffs, pts, 'curl3'), 24 * pts[:, 1], rtol=1e-7, atol=1e-6)
        assert np.allclose(element.eval_field(coeffs, pts, 'curl4'), np.array([24.0, 0.0]), rtol=1e-7, atol=1e-6)

    def test_curl4_against_polynomial_oracle(self):
        # ψ = x²y²(1-x)(1-y)，u ∈ P₅²
        px = np.array([0.0, 0.0, 1.0, -1.0])
        psi = np.outer(px, px)
        field = StreamFunctionField(psi)
        element = build_local(REFERENCE, 5)
        coeffs = element.interpolate(field)
        pts = np.random.default_rng(6).dirichlet(np.ones(3), size=10) @ REFERENCE
        for quantity in ('curl3', 'curl4'):
            exact = field.evaluate(pts, quantity)
            approx = element.eval_field(coeffs, pts, quantity)
            assert np.abs(exact - approx).max() <= 1e-6 * max(np.abs(exact).max(), 1.0)

    def test_unknown_quantity(self):
        element = build_local(REFERENCE, 4)
        with pytest.raises(ValueError):
            element.eval_field(np.zeros(element.n_dofs), REFERENCE, 'laplacian')


class TestLocalMatrices:
    """局部矩阵与平移复用"""

    def test_mass_matches_quadrature(self):
        element = build_local(REFERENCE, 4)
        pts, w = triangle_rule(8).map_triangle(REFERENCE)
        shapes = element.shape(pts)
        mass = np.einsum('q,qic,qjc->ij', w, shapes, shapes)
        matrices = element.local_matrices()
        assert np.allclose(matrices['mass'], mass, rtol=1e-9, atol=1e-9 * np.abs(mass).max())
        for name in ('mass', 'curl2'):
            assert np.array_equal(matrices[name], matrices[name].T)
        assert np.all(np.linalg.eigvalsh(matrices['mass']) > 0)

    def test_curl2_gram_on_small_triangle(self):
        # 细网格尺度 (h = 1/16) 的单元
        vertices = np.array([[0.5, 0.25], [0.5625, 0.25], [0.5, 0.3125]])
        element = build_local(vertices, 4)
        curl2 = element.local_matrices()['curl2']
        assert np.array_equal(curl2, curl2.T)
        pts, w = triangle_rule(8).map_triangle(vertices)
        c2 = element.shape(pts, 'curl2')
        direct = np.einsum('q,qi,qj->ij', w, c2, c2)
        assert np.allclose(curl2, direct, atol=1e-10 * np.abs(direct).max())
        # 旋转场 (-y, x) 的二阶旋度为零
        rotation = element.interpolate(PolynomialField([[0.0, -1.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]))
        assert np.abs(curl2 @ rotation).max() <= 1e-8 * np.abs(curl2).max()

    def test_translated_element(self):
        vertices = np.array([[0.0, 0.0], [0.25, 0.0], [0.0, 0.25]])
        offset = np.array([0.5, 0.75])
        base = build_local(vertices, 4)
        matrices = base.local_matrices()
        moved = base.translated(vertices + offset, triangle=3)
        direct = build_local(vertices + offset, 4)
        pts = np.random.default_rng(7).dirichlet(np.ones(3), size=8) @ (vertices + offset)
        for quantity in ('value', 'curl', 'curl2'):
            assert np.allclose(moved.shape(pts, quantity), direct.shape(pts, quantity), rtol=1e-7, atol=1e-6)
        assert moved.triangle == 3
        assert moved.local_matrices() is matrices


class TestLagrange:
    """标量 P_k Lagrange 单元"""

    def test_nodal_basis(self):
        element = LagrangeElement(REFERENCE, 4)
        nodes = lagrange_nodes(REFERENCE, 4)
        assert len(nodes) == 15
        assert np.allclose(element.values(nodes), np.eye(15), atol=1e-10)

    def test_partition_of_unity(self):
        element = LagrangeElement(REFERENCE, 4)
        pts = np.random.default_rng(8).dirichlet(np.ones(3), size=6) @ REFERENCE
        assert np.allclose(element.values(pts).sum(axis=1), 1.0)
        assert np.allclose(element.gradients(pts).sum(axis=1), 0.0, atol=1e-9)

    def test_stiffness_kernel(self):
        stiffness = LagrangeElement(REFERENCE, 4).stiffness()
        assert np.allclose(stiffness @ np.ones(15), 0.0, atol=1e-9)
        assert np.allclose(stiffness, stiffness.T, atol=1e-10)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
