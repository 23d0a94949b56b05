"""Spaces模块 - 全局编号、标量空间、稀疏组装与离散场"""

from .dofmap import DofMap, build_dofmap
from .scalar import ScalarSpace
from .assembly import (
    Assembler,
    AssembledSystem,
    ElementCache,
    assemble,
    assemble_load,
    export_coo,
    shape_key,
)
from .field import DiscreteField
from .norms import h_curl2_error, interpolation_error

__all__ = [
    'DofMap', 'build_dofmap', 'ScalarSpace',
    'Assembler', 'AssembledSystem', 'ElementCache',
    'assemble', 'assemble_load', 'export_coo', 'shape_key',
    'DiscreteField', 'h_curl2_error', 'interpolation_error',
]
