"""Paths between commuting matrix tuples constrained by polynomial relations."""
from .errors import CommPathError
from .linalg import DEFAULT_TOL, ToleranceConfig
from .tuples import MatrixTuple, MultiPoly, MultiPolySystem, ZeroSet, metric, validate_zero_set
from .spectra import OPU, joint_diagonalize
from .clustering import cpa_hermitian, cpa_normal
from .paths import MatrixPath, concat
from .synthesis import connect, connect_cube, connect_disk, connect_nearly_algebraic, delta_budget
from .verify import certify_path, uniformity_sweep

__all__ = [
    "CommPathError",
    "DEFAULT_TOL",
    "ToleranceConfig",
    "MatrixTuple",
    "MultiPoly",
    "MultiPolySystem",
    "ZeroSet",
    "metric",
    "validate_zero_set",
    "OPU",
    "joint_diagonalize",
    "cpa_hermitian",
    "cpa_normal",
    "MatrixPath",
    "concat",
    "connect",
    "connect_cube",
    "connect_disk",
    "connect_nearly_algebraic",
    "delta_budget",
    "certify_path",
    "uniformity_sweep",
]
__version__ = "0.1.0"
