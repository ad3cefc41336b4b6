"""L-ball weighted-least-squares subdivision on triangulations."""

__version__ = "0.1.0"

from .errors import (ConfigError, FormatError, FrameError, MaskError, MeshError,  # noqa: E402
                     SingularSystemError, StencilError, WeightDomainError, WLSError)
from .mesh import (DataLevel, RefinementMap, Triangulation2, diameter,  # noqa: E402
                   lattice_patch, midpoint_refine, scattered_square_mesh, validate)
from .weights import CONSTANT, GAUSSIAN, HAT, WeightFunction, get_weight, tabulated  # noqa: E402
from .wls import (StencilBall, build_ball, compute_coefficients, compute_mu,  # noqa: E402
                  make_ball, refine_step, subdivide)
from .uniform_masks import Mask, UniformGrid, derive_mask, paper_mask  # noqa: E402
from .analysis import (check_reproduction, estimate_approximation_order,  # noqa: E402
                       noise_variance_trial, theta)
from .baselines import ScatteredData, mls1, mls1_eval, shepard, shepard_eval  # noqa: E402
from .geom3d import (LocalFrame, Triangulation3, local_frame, surface_refine_step,  # noqa: E402
                     surface_subdivide)

__all__ = [
    "ConfigError", "FormatError", "FrameError", "MaskError", "MeshError",
    "SingularSystemError", "StencilError", "WeightDomainError", "WLSError",
    "DataLevel", "RefinementMap", "Triangulation2", "diameter", "lattice_patch",
    "midpoint_refine", "scattered_square_mesh", "validate",
    "CONSTANT", "GAUSSIAN", "HAT", "WeightFunction", "get_weight", "tabulated",
    "StencilBall", "build_ball", "compute_coefficients", "compute_mu", "make_ball",
    "refine_step", "subdivide",
    "Mask", "UniformGrid", "derive_mask", "paper_mask",
    "check_reproduction", "estimate_approximation_order", "noise_variance_trial", "theta",
    "ScatteredData", "mls1", "mls1_eval", "shepard", "shepard_eval",
    "LocalFrame", "Triangulation3", "local_frame", "surface_refine_step", "surface_subdivide",
]
