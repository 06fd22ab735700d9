"""Contact and holomorphic angles of surfaces in the unit 5-sphere."""

from .ambient import hermitian_inner, project, reeb, sphere_point
from .calculus import ParamJet, ScalarJet2, jet, laplace_beltrami, surface_gradient
from .catalog import builtin, from_descriptor
from .identities import run_report
from .surface import adapted_frame, fundamental_data, gaussian_curvature, mean_curvature, point_sample
from .tori import circle_residual, family_branches, make_torus, minimality_residual, solve_minimal

__version__ = "0.1.0"
