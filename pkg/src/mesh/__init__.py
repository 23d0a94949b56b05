"""Mesh模块 - 结构三角网格、加密与文本格式"""

from .triangulation import Mesh, Vertex, Edge, Triangle, make_domain, normalize_domain, patch
from .refinement import refine_uniform, refine_bisect
from .io import read_mesh, write_mesh

__all__ = [
    'Mesh', 'Vertex', 'Edge', 'Triangle',
    'make_domain', 'normalize_domain', 'patch',
    'refine_uniform', 'refine_bisect',
    'read_mesh', 'write_mesh',
]
