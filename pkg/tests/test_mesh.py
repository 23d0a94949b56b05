"""
网格模块测试
"""

import pytest
import numpy as np

from src.exceptions import ContractError, InvalidSubdivisionError
from src.mesh import (
    Mesh,
    make_domain,
    normalize_domain,
    patch,
    read_mesh,
    refine_bisect,
    refine_uniform,
    write_mesh,
)


def _vertex_at(mesh: Mesh, x: float, y: float) -> int:
    return int(np.argmin(np.hypot(mesh.points[:, 0] - x, mesh.points[:, 1] - y)))


class TestMakeDomain:
    """结构网格生成"""

    @pytest.mark.parametrize('domain, n, counts', [
        ('square', 1, (4, 5, 2)),
        ('square', 4, (25, 56, 32)),
        ('lshape', 2, (8, 13, 6)),
        ('square_hole', 4, (24, 48, 24)),
    ])
    def test_counts(self, domain, n, counts):
        mesh = make_domain(domain, n)
        assert (mesh.n_vertices, mesh.n_edges, mesh.n_triangles) == counts

    def test_euler_relation(self):
        assert make_domain('square', 8).euler_characteristic == 1
        assert make_domain('lshape', 8).euler_characteristic == 1
        hole = make_domain('square_hole', 8)
        assert hole.euler_characteristic == 0
        assert hole.n_holes == 1

    @pytest.mark.parametrize('domain, n', [('square_hole', 1), ('square_hole', 6), ('lshape', 3), ('square', 0)])
    def test_invalid_subdivision(self, domain, n):
        with pytest.raises(InvalidSubdivisionError):
            make_domain(domain, n)

    def test_unknown_domain(self):
        with pytest.raises(ValueError):
            make_domain('circle', 4)

    def test_aliases(self):
        assert normalize_domain('square-hole') == 'square_hole'
        assert normalize_domain('L-Shape') == 'lshape'

    @pytest.mark.parametrize('domain, n', [('square', 4), ('lshape', 4), ('square_hole', 8)])
    @pytest.mark.parametrize('diagonal', ['positive', 'negative', 'crossed'])
    def test_audit(self, domain, n, diagonal):
        report = make_domain(domain, n, diagonal).audit()
        assert all(report.values()), report

    def test_h_is_diagonal_length(self):
        mesh = make_domain('square', 4)
        assert mesh.h == pytest.approx(np.sqrt(2) / 4, rel=1e-14)

    def test_diagonal_slope(self):
        pos = make_domain('square', 1, 'positive')
        neg = make_domain('square', 1, 'negative')
        interior_pos = pos.edges[pos.interior_edges[0]]
        interior_neg = neg.edges[neg.interior_edges[0]]
        d_pos = pos.points[interior_pos[1]] - pos.points[interior_pos[0]]
        d_neg = neg.points[interior_neg[1]] - neg.points[interior_neg[0]]
        assert d_pos[0] * d_pos[1] > 0
        assert d_neg[0] * d_neg[1] < 0

    def test_crossed_pattern(self):
        mesh = make_domain('square', 4, 'crossed')
        assert (mesh.n_vertices, mesh.n_triangles) == (25 + 16, 64)
        assert mesh.h == pytest.approx(0.25, rel=1e-14)
        single = make_domain('square', 1, 'crossed')
        assert (single.n_vertices, single.n_edges, single.n_triangles) == (5, 8, 4)
        assert np.allclose(single.points[single.triangles[:, 0]], 0.5)
        # 90° 旋转 (x, y) → (1-y, x) 把顶点集映到自身
        hole = make_domain('square_hole', 4, 'crossed')
        rotated = np.column_stack([1.0 - hole.points[:, 1], hole.points[:, 0]])
        assert sorted(map(tuple, np.round(rotated, 12))) == sorted(map(tuple, np.round(hole.points, 12)))

    def test_unknown_pattern(self):
        with pytest.raises(ValueError):
            make_domain('square', 2, 'diamond')


class TestMeshTopology:
    """边定向、邻接与 patch"""

    @pytest.fixture
    def mesh(self):
        return make_domain('lshape', 4)

    def test_edge_geometry(self, mesh):
        assert np.all(mesh.edges[:, 0] < mesh.edges[:, 1])
        assert np.allclose(np.linalg.norm(mesh.tangents, axis=1), 1.0)
        assert np.allclose(np.sum(mesh.tangents * mesh.normals, axis=1), 0.0)
        d = mesh.points[mesh.edges[:, 1]] - mesh.points[mesh.edges[:, 0]]
        assert np.allclose(mesh.edge_lengths, np.linalg.norm(d, axis=1))

    def test_normal_points_into_t_minus(self, mesh):
        centroids = mesh.centroids
        for e in mesh.interior_edges:
            t_plus, t_minus = mesh.edge_tris[e]
            assert (centroids[t_minus] - centroids[t_plus]) @ mesh.normals[e] > 0

    def test_counterclockwise(self, mesh):
        assert np.all(mesh.areas > 0)
        assert mesh.areas.sum() == pytest.approx(0.75, rel=1e-12)

    def test_interior_edge_signs_opposite(self, mesh):
        for e in mesh.interior_edges:
            signs = []
            for t in mesh.edge_tris[e]:
                i = int(np.nonzero(mesh.tri_edges[t] == e)[0][0])
                signs.append(mesh.edge_signs[t, i])
            assert signs[0] * signs[1] == -1

    def test_entity_views(self, mesh):
        e = int(mesh.interior_edges[0])
        edge = mesh.edge(e)
        assert not edge.on_boundary
        assert edge.t_minus is not None
        assert edge.length == pytest.approx(float(mesh.edge_lengths[e]))
        boundary = mesh.edge(int(np.nonzero(mesh.boundary_edges)[0][0]))
        assert boundary.t_minus is None

        tri = mesh.triangle(0)
        assert len(tri.vertices) == 3 and len(tri.edges) == 3
        assert tri.diameter == pytest.approx(max(mesh.edge_lengths[list(tri.edges)]))

        corner = mesh.vertex(_vertex_at(mesh, 0.0, 0.0))
        assert corner.on_boundary
        with pytest.raises(ContractError):
            mesh.vertex(mesh.n_vertices)

    def test_patch_edges(self, mesh):
        interior = int(mesh.interior_edges[0])
        boundary = int(np.nonzero(mesh.boundary_edges)[0][0])
        assert len(patch(mesh, 'of_edge', interior)) == 2
        assert len(patch(mesh, 'of_edge', boundary)) == 1

    def test_patch_corner_vertex(self):
        pos = make_domain('square', 1, 'positive')
        assert len(pos.patch('of_vertex', _vertex_at(pos, 1.0, 0.0))) == 1
        assert len(pos.patch('of_vertex', _vertex_at(pos, 0.0, 0.0))) == 2
        neg = make_domain('square', 1, 'negative')
        assert len(neg.patch('of_vertex', _vertex_at(neg, 0.0, 0.0))) == 1

    def test_patch_symmetry(self, mesh):
        for t in range(mesh.n_triangles):
            for s in mesh.patch('of_triangle', t):
                assert t in mesh.patch('of_triangle', s)

    def test_patch_invalid(self, mesh):
        with pytest.raises(ContractError):
            mesh.patch('of_edge', -1)
        with pytest.raises(ContractError):
            mesh.patch('of_face', 0)

    def test_degenerate_triangle_rejected(self):
        points = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
        with pytest.raises(ContractError):
            Mesh(points, [[0, 1, 2]])

    def test_clockwise_input_fixed(self):
        points = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        mesh = Mesh(points, [[0, 2, 1]])
        assert mesh.areas[0] == pytest.approx(0.5)
        assert mesh.triangles[0, 0] == 0


class TestRefinement:
    """红加密与最新顶点二分"""

    def test_uniform_counts(self):
        mesh = make_domain('square', 1)
        fine = refine_uniform(mesh)
        assert fine.n_triangles == 8
        assert fine.euler_characteristic == 1
        assert fine.level == 1
        assert fine.h == pytest.approx(mesh.h / 2, rel=1e-15)

    def test_uniform_matches_structured_mesh(self):
        fine = refine_uniform(make_domain('square_hole', 4))
        direct = make_domain('square_hole', 8)
        assert (fine.n_vertices, fine.n_edges, fine.n_triangles) == (
            direct.n_vertices, direct.n_edges, direct.n_triangles)
        assert fine.areas.sum() == pytest.approx(direct.areas.sum(), rel=1e-12)
        assert all(fine.audit().values())

    def test_bisect_empty(self):
        mesh = make_domain('square', 2)
        assert refine_bisect(mesh, set()) is mesh

    def test_bisect_all(self):
        mesh = make_domain('square', 1)
        fine = refine_bisect(mesh, {0, 1})
        assert fine.n_triangles == 4
        assert all(fine.audit().values())

    def test_bisect_single_is_conforming(self):
        mesh = make_domain('lshape', 4)
        t = int(np.argmin(np.linalg.norm(mesh.centroids - 0.5, axis=1)))
        fine = refine_bisect(mesh, {t})
        assert fine.n_triangles > mesh.n_triangles
        assert all(fine.audit().values())
        assert fine.areas.sum() == pytest.approx(mesh.areas.sum(), rel=1e-12)
        # 被标记的三角形不再以原样出现
        original = set(map(tuple, np.sort(mesh.triangles, axis=1)))
        refined = set(map(tuple, np.sort(fine.triangles, axis=1)))
        assert tuple(np.sort(mesh.triangles[t])) in original - refined

    def test_bisect_repeated_stays_conforming(self):
        mesh = make_domain('lshape', 2)
        for _ in range(6):
            near = np.linalg.norm(mesh.centroids - 0.5, axis=1) < 0.3
            mesh = refine_bisect(mesh, set(np.nonzero(near)[0].tolist()))
            assert all(mesh.audit().values())
        assert mesh.areas.sum() == pytest.approx(0.75, rel=1e-12)

    def test_bisect_invalid_id(self):
        mesh = make_domain('square', 1)
        with pytest.raises(ContractError):
            refine_bisect(mesh, {5})


class TestMeshIO:
    """文本格式读写"""

    def test_write_then_read(self, tmp_path):
        mesh = make_domain('square_hole', 4)
        path = write_mesh(mesh, tmp_path / "hole.mesh")
        header = path.read_text().splitlines()[0]
        assert header == f"{mesh.n_vertices} {mesh.n_edges} {mesh.n_triangles}"
        loaded = read_mesh(path, domain='square_hole')
        assert np.array_equal(loaded.points, mesh.points)
        assert np.array_equal(loaded.edges, mesh.edges)
        assert np.array_equal(loaded.boundary_edges, mesh.boundary_edges)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_mesh(tmp_path / "absent.mesh")

    def test_inconsistent_boundary_flag(self, tmp_path):
        mesh = make_domain('square', 1)
        path = write_mesh(mesh, tmp_path / "square.mesh")
        lines = path.read_text().splitlines()
        row = 1 + mesh.n_vertices + int(mesh.interior_edges[0])
        a, b, _ = lines[row].split()
        lines[row] = f"{a} {b} 1"
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(ContractError):
            read_mesh(path)

    def test_truncated_file(self, tmp_path):
        path = tmp_path / "broken.mesh"
        path.write_text("4 5 2\n0.0 0.0 1\n")
        with pytest.raises(ContractError):
            read_mesh(path)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
