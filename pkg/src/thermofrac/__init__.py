"""2D finite-element phase-field solver for thermo-mechanical brittle fracture."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    ConstraintError,
    MeshError,
    MeshParseError,
    SolveError,
    ThermofracError,
)
from .materials import (
    ElasticLaw,
    ElasticTensor,
    FractureLaw,
    Material,
    ThermalLaw,
    conductivity,
    degradation,
    elastic_strain,
    elastic_tensor,
    project,
    psi_plus,
    stress,
    stress_thermal,
    stress_total,
)
from .mesh import Mesh, boundary_nodes, generate_cruciform, generate_rect, load_gmsh, write_gmsh

__all__ = [name for name in dir() if not name.startswith("_")]
