"""Discrete exterior calculus and Hodge decomposition for grid images."""

from .decompose import (
    DecomposedImage,
    DecompositionResult,
    decomposed_image,
    hodge_decompose,
    solve_potential_normal,
    solve_potential_tangential,
)
from .errors import (
    BuildError,
    DegreeError,
    HodgeDecError,
    InvalidGeometryError,
    InvalidInputError,
    ParameterError,
    SolverError,
)
from .fields import (
    CubeField,
    VertexField,
    channel_pair_fields,
    flow_field,
    gradient_field,
    patch_topology_field,
    to_cube_field,
    to_one_form,
)
from .grid import CellId, Cochain, GridComplex, build_grid
from .laplacian import (
    HarmonicBasis,
    LaplacianOperator,
    assemble,
    betti,
    harmonic_space,
    spectrum,
)
from .manifold import (
    SupportSet,
    VertexMask,
    build_support,
    default_threshold,
    restricted_derivative,
    restricted_star,
    segment,
)

__version__ = "0.1.0"

__all__ = [
    "BuildError",
    "CellId",
    "Cochain",
    "CubeField",
    "DecomposedImage",
    "DecompositionResult",
    "DegreeError",
    "GridComplex",
    "HarmonicBasis",
    "HodgeDecError",
    "InvalidGeometryError",
    "InvalidInputError",
    "LaplacianOperator",
    "ParameterError",
    "SolverError",
    "SupportSet",
    "VertexField",
    "VertexMask",
    "assemble",
    "betti",
    "build_grid",
    "build_support",
    "channel_pair_fields",
    "decomposed_image",
    "default_threshold",
    "flow_field",
    "gradient_field",
    "harmonic_space",
    "hodge_decompose",
    "patch_topology_field",
    "restricted_derivative",
    "restricted_star",
    "segment",
    "solve_potential_normal",
    "solve_potential_tangential",
    "spectrum",
    "to_cube_field",
    "to_one_form",
]
