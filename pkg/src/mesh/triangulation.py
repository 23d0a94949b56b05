"""
三角网格模块
构造三个基准区域的结构三角剖分，并提供边定向、邻接、patch 与边界标记查询
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from src.exceptions import ContractError, InvalidSubdivisionError


logger = logging.getLogger(__name__)


# 区域边界多边形（每个区域由若干条闭合折线给出），用于边界审计
DOMAIN_BOUNDARIES: Dict[str, List[List[Tuple[float, float]]]] = {
    'square': [
        [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
    ],
    'lshape': [
        [(0.0, 0.0), (0.5, 0.0), (0.5, 0.5), (1.0, 0.5), (1.0, 1.0), (0.0, 1.0)],
    ],
    'square_hole': [
        [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
        [(0.25, 0.25), (0.75, 0.25), (0.75, 0.75), (0.25, 0.75)],
    ],
}

# 每个区域要求的 n 的整除因子
_SUBDIVISION_DIVISOR = {'square': 1, 'lshape': 2, 'square_hole': 4}
DIAGONAL_PATTERNS = ('positive', 'negative', 'crossed')

DOMAIN_ALIASES = {
    'square': 'square',
    'lshape': 'lshape',
    'l-shape': 'lshape',
    'square_hole': 'square_hole',
    'square-hole': 'square_hole',
}


def normalize_domain(domain: str) -> str:
    """把 CLI/配置中的区域名规范化"""
    key = str(domain).strip().lower()
    if key not in DOMAIN_ALIASES:
        raise ValueError(f"未知区域: {domain}（可选: square, lshape, square-hole）")
    return DOMAIN_ALIASES[key]


@dataclass(frozen=True)
class Vertex:
    id: int
    x: float
    y: float
    on_boundary: bool


@dataclass(frozen=True)
class Edge:
    id: int
    v0: int
    v1: int
    length: float
    tangent: Tuple[float, float]
    normal: Tuple[float, float]
    t_plus: int
    t_minus: Optional[int]
    on_boundary: bool


@dataclass(frozen=True)
class Triangle:
    id: int
    vertices: Tuple[int, int, int]
    edges: Tuple[int, int, int]
    edge_signs: Tuple[int, int, int]
    diameter: float
    area: float


class Mesh:
    """
    一致三角网格（构造后不可变）

    约定：
      - 局部边 i 与局部顶点 i 相对，局部方向为 vertices[(i+1)%3] -> vertices[(i+2)%3]
      - 全局边切向从较小顶点编号指向较大顶点编号，法向为切向逆时针旋转 90°
      - 内部边的 n_E 从 t_plus 指向 t_minus（t_minus 即跳跃定义中的 T1）
      - 局部顶点 0 是最新顶点，局部边 0 是二分加密边
    """

    def __init__(
        self,
        points: np.ndarray,
        triangles: np.ndarray,
        domain: str = 'custom',
        level: int = 0,
    ):
        points = np.ascontiguousarray(points, dtype=float)
        triangles = np.array(triangles, dtype=np.int64).reshape(-1, 3)
        if points.ndim != 2 or points.shape[1] != 2:
            raise ContractError("顶点数组形状必须为 (nv, 2)")
        if triangles.size and (triangles.min() < 0 or triangles.max() >= len(points)):
            raise ContractError("三角形引用了不存在的顶点")

        # 保证逆时针；交换顶点 1、2 不改变局部顶点 0（加密边不变）
        signed = self._signed_areas(points, triangles)
        if np.any(np.abs(signed) <= 1e-15):
            raise ContractError("存在退化三角形")
        flip = signed < 0
        triangles[flip] = triangles[flip][:, [0, 2, 1]]

        self.points = points
        self.triangles = triangles
        self.domain = domain
        self.level = level

        self._build_topology()
        self._build_geometry()
        self.points.setflags(write=False)
        self.triangles.setflags(write=False)

        logger.debug(
            f"网格已构建: domain={domain}, level={level}, "
            f"V={self.n_vertices}, E={self.n_edges}, T={self.n_triangles}"
        )

    @staticmethod
    def _signed_areas(points: np.ndarray, triangles: np.ndarray) -> np.ndarray:
        p0 = points[triangles[:, 0]]
        p1 = points[triangles[:, 1]]
        p2 = points[triangles[:, 2]]
        d1 = p1 - p0
        d2 = p2 - p0
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def _build_topology(self):
        tris = self.triangles
        nt = len(tris)
        # 局部边 i: (v[i+1], v[i+2])
        a = tris[:, [1, 2, 0]]
        b = tris[:, [2, 0, 1]]
        lo = np.minimum(a, b)
        hi = np.maximum(a, b)
        pairs = np.stack([lo.ravel(), hi.ravel()], axis=1)
        edges, inverse = np.unique(pairs, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)

        self.edges = edges
        self.tri_edges = inverse.reshape(nt, 3)
        self.edge_signs = np.where(a < b, 1, -1).astype(np.int64)

        counts = np.bincount(inverse, minlength=len(edges))
        if np.any(counts > 2):
            bad = np.nonzero(counts > 2)[0][:5]
            raise ContractError(f"网格非流形：边 {bad.tolist()} 被超过两个三角形共享")

        # 相邻三角形：对边顶点在有向边左侧者为 t_minus
        tri_of = np.repeat(np.arange(nt), 3)
        opposite = tris.ravel()
        p = self.points
        v0 = p[edges[inverse, 0]]
        v1 = p[edges[inverse, 1]]
        po = p[opposite]
        cross = (v1[:, 0] - v0[:, 0]) * (po[:, 1] - v0[:, 1]) - (v1[:, 1] - v0[:, 1]) * (po[:, 0] - v0[:, 0])
        left = cross > 0

        edge_tris = np.full((len(edges), 2), -1, dtype=np.int64)
        edge_tris[inverse[~left], 0] = tri_of[~left]
        edge_tris[inverse[left], 1] = tri_of[left]
        boundary = counts == 1
        only_minus = boundary & (edge_tris[:, 0] < 0)
        edge_tris[only_minus, 0] = edge_tris[only_minus, 1]
        edge_tris[boundary, 1] = -1
        interior_bad = (~boundary) & np.any(edge_tris < 0, axis=1)
        if np.any(interior_bad):
            raise ContractError("内部边两侧三角形定向不一致")

        self.edge_tris = edge_tris
        self.boundary_edges = boundary
        self.boundary_vertices = np.zeros(len(p), dtype=bool)
        self.boundary_vertices[edges[boundary].ravel()] = True

    def _build_geometry(self):
        p = self.points
        e = self.edges
        d = p[e[:, 1]] - p[e[:, 0]]
        lengths = np.hypot(d[:, 0], d[:, 1])
        self.edge_lengths = lengths
        self.tangents = d / lengths[:, None]
        self.normals = np.stack([-self.tangents[:, 1], self.tangents[:, 0]], axis=1)
        self.areas = self._signed_areas(p, self.triangles)
        self.diameters = lengths[self.tri_edges].max(axis=1)

    # ==================== 基本查询 ====================

    @property
    def n_vertices(self) -> int:
        return len(self.points)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def h(self) -> float:
        """网格尺寸 h = max h_T"""
        return float(self.diameters.max())

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_triangles

    @property
    def n_holes(self) -> int:
        """连通区域的孔数 = 1 - (V - E + T)"""
        return 1 - self.euler_characteristic

    @property
    def interior_edges(self) -> np.ndarray:
        return np.nonzero(~self.boundary_edges)[0]

    @property
    def centroids(self) -> np.ndarray:
        return self.points[self.triangles].mean(axis=1)

    def triangle_points(self, t: int) -> np.ndarray:
        """三角形 t 的顶点坐标 (3, 2)，逆时针"""
        return self.points[self.triangles[t]]

    def vertex(self, i: int) -> Vertex:
        self._check_id(i, self.n_vertices, 'vertex')
        x, y = self.points[i]
        return Vertex(int(i), float(x), float(y), bool(self.boundary_vertices[i]))

    def edge(self, i: int) -> Edge:
        self._check_id(i, self.n_edges, 'edge')
        t_plus, t_minus = self.edge_tris[i]
        return Edge(
            id=int(i),
            v0=int(self.edges[i, 0]),
            v1=int(self.edges[i, 1]),
            length=float(self.edge_lengths[i]),
            tangent=tuple(float(c) for c in self.tangents[i]),
            normal=tuple(float(c) for c in self.normals[i]),
            t_plus=int(t_plus),
            t_minus=None if t_minus < 0 else int(t_minus),
            on_boundary=bool(self.boundary_edges[i]),
        )

    def triangle(self, i: int) -> Triangle:
        self._check_id(i, self.n_triangles, 'triangle')
        return Triangle(
            id=int(i),
            vertices=tuple(int(v) for v in self.triangles[i]),
            edges=tuple(int(e) for e in self.tri_edges[i]),
            edge_signs=tuple(int(s) for s in self.edge_signs[i]),
            diameter=float(self.diameters[i]),
            area=float(self.areas[i]),
        )

    @staticmethod
    def _check_id(i, n: int, kind: str):
        if not (0 <= int(i) < n):
            raise ContractError(f"非法{kind}编号: {i}（共 {n} 个）")

    # ==================== patch ====================

    def patch(self, kind: str, id: int) -> Set[int]:
        """
        返回 patch 中的三角形编号集合

        Args:
            kind: of_triangle | of_edge | of_vertex
            id: 实体编号
        """
        if kind == 'of_triangle':
            self._check_id(id, self.n_triangles, 'triangle')
            result = {int(id)}
            for e in self.tri_edges[id]:
                result.update(int(t) for t in self.edge_tris[e] if t >= 0)
            return result
        if kind == 'of_edge':
            self._check_id(id, self.n_edges, 'edge')
            return {int(t) for t in self.edge_tris[id] if t >= 0}
        if kind == 'of_vertex':
            self._check_id(id, self.n_vertices, 'vertex')
            return {int(t) for t in np.nonzero(np.any(self.triangles == id, axis=1))[0]}
        raise ContractError(f"未知 patch 类型: {kind}")

    # ==================== 审计 ====================

    def audit(self) -> Dict[str, bool]:
        """一致性审计：边关联数、面积、Euler 关系、边界边位置"""
        counts = np.bincount(self.tri_edges.ravel(), minlength=self.n_edges)
        report = {
            'edge_incidence': bool(np.all((counts == 1) | (counts == 2))),
            'positive_area': bool(np.all(self.areas > 0)),
            'diameter_is_longest_edge': bool(
                np.allclose(self.diameters, self.edge_lengths[self.tri_edges].max(axis=1))
            ),
        }
        report['no_hanging_nodes'] = self._no_hanging_nodes()
        if self.domain in DOMAIN_BOUNDARIES:
            expected_chi = 1 - (len(DOMAIN_BOUNDARIES[self.domain]) - 1)
            report['euler'] = self.euler_characteristic == expected_chi
            mids = self.points[self.edges[self.boundary_edges]].mean(axis=1)
            dist = _distance_to_boundary(self.domain, mids)
            report['boundary_on_domain'] = bool(np.all(dist < 1e-12))
        return report

    def _no_hanging_nodes(self) -> bool:
        """检查是否有顶点落在某条边内部（悬挂点）"""
        p = self.points
        for e in np.nonzero(self.boundary_edges)[0]:
            a, b = p[self.edges[e]]
            d = b - a
            rel = p - a
            t = rel @ d / (d @ d)
            off = np.abs(rel[:, 0] * d[1] - rel[:, 1] * d[0]) / np.sqrt(d @ d)
            inside = (t > 1e-12) & (t < 1 - 1e-12) & (off < 1e-12)
            if np.any(inside):
                return False
        return True


def _distance_to_boundary(domain: str, points: np.ndarray) -> np.ndarray:
    """点到区域边界折线的距离"""
    best = np.full(len(points), np.inf)
    for loop in DOMAIN_BOUNDARIES[domain]:
        for i in range(len(loop)):
            a = np.asarray(loop[i])
            b = np.asarray(loop[(i + 1) % len(loop)])
            d = b - a
            t = np.clip((points - a) @ d / (d @ d), 0.0, 1.0)
            proj = a + t[:, None] * d
            best = np.minimum(best, np.linalg.norm(points - proj, axis=1))
    return best


def _cell_kept(domain: str, cx: float, cy: float) -> bool:
    if domain == 'square':
        return True
    if domain == 'lshape':
        return not (cx > 0.5 and cy < 0.5)
    if domain == 'square_hole':
        return not (0.25 < cx < 0.75 and 0.25 < cy < 0.75)
    raise ValueError(f"未知区域: {domain}")


def make_domain(domain: str, n: int, diagonal: str = 'positive') -> Mesh:
    """
    生成基准区域的结构三角网格

    Args:
        domain: square | lshape | square_hole
        n: 每单位长度的剖分数，h = 1/n
        diagonal: positive（对角线斜率 +1）、negative（斜率 -1）或 crossed（两条对角线，
            每个方格以中心点分成 4 个三角形，网格在 90° 旋转下不变）

    Returns:
        Mesh 对象
    """
    domain = normalize_domain(domain)
    n = int(n)
    divisor = _SUBDIVISION_DIVISOR[domain]
    if n < 1 or n % divisor != 0:
        raise InvalidSubdivisionError(
            f"区域 {domain} 需要 n ≥ 1 且能被 {divisor} 整除，收到 n={n}"
        )
    if diagonal not in DIAGONAL_PATTERNS:
        raise ValueError(f"未知对角线方向: {diagonal}（可选: {', '.join(DIAGONAL_PATTERNS)}）")

    def node(i, j):
        return j * (n + 1) + i

    def center(i, j):
        return (n + 1) ** 2 + j * n + i

    cells = [
        (i, j)
        for j in range(n)
        for i in range(n)
        if _cell_kept(domain, (i + 0.5) / n, (j + 0.5) / n)
    ]
    triangles = []
    for i, j in cells:
        p00, p10 = node(i, j), node(i + 1, j)
        p01, p11 = node(i, j + 1), node(i + 1, j + 1)
        # 局部顶点 0 取直角顶点，使斜边成为二分加密边
        if diagonal == 'positive':
            triangles.append((p10, p11, p00))
            triangles.append((p01, p00, p11))
        elif diagonal == 'negative':
            triangles.append((p00, p10, p01))
            triangles.append((p11, p01, p10))
        else:
            c = center(i, j)
            triangles.extend([(c, p00, p10), (c, p10, p11), (c, p11, p01), (c, p01, p00)])
    triangles = np.asarray(triangles, dtype=np.int64)

    grid = np.array([(i / n, j / n) for j in range(n + 1) for i in range(n + 1)]
                    + [((i + 0.5) / n, (j + 0.5) / n) for j in range(n) for i in range(n)])
    used = np.unique(triangles)
    renumber = np.full(len(grid), -1, dtype=np.int64)
    renumber[used] = np.arange(len(used))

    mesh = Mesh(grid[used], renumber[triangles], domain=domain, level=0)
    logger.info(
        f"结构网格生成: {domain}, n={n}, V={mesh.n_vertices}, "
        f"E={mesh.n_edges}, T={mesh.n_triangles}"
    )
    return mesh


def patch(mesh: Mesh, kind: str, id: int) -> Set[int]:
    """模块级 patch 查询，等价于 mesh.patch"""
    return mesh.patch(kind, id)
