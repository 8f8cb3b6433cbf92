"""Dominance certificates, cone invariance, and two-time-scale decoupling
for singularly perturbed systems."""

__version__ = "0.1.0"

from .linalg import Inertia, SymMatrix, inertia, nsd_margin, sym_eigvals
from .cone import ConeLocation, MatrixConeSpec, cone_locate, make_cone, quad_form
from .certify import (CertResult, MatrixPolytope, SPDominanceCertificate,
                      block_conditions, certify_polytope, certify_sp,
                      lmi_residual, search_certificate_2x2)
from .decouple import (ChangDecoupling, build_decoupling, epsilon_star,
                       full_system_matrix, reduced_model, solve_chang_lti)
from .expressions import diff_expr, evaluate, parse_expr, to_string
from .systems import (SPRING_INITIAL_CONDITIONS, SPRING_SLOPE_BOUNDS,
                      LinearSPSystem, NonlinearSPSystem, jacobians,
                      nonlinear_spring_certificate, nonlinear_spring_system,
                      reduced_manifold_slope, scalar_hull)
from .integrate import (Trajectory, VariationalTrajectory, detect_convergence,
                        find_equilibria, integrate, integrate_batch,
                        integrate_variational, write_trajectory_csv)
from .analyze import certificate_cone, monotone_probe

__all__ = [
    "Inertia", "SymMatrix", "inertia", "nsd_margin", "sym_eigvals",
    "ConeLocation", "MatrixConeSpec", "cone_locate", "make_cone", "quad_form",
    "CertResult", "MatrixPolytope", "SPDominanceCertificate",
    "block_conditions", "certify_polytope", "certify_sp", "lmi_residual",
    "search_certificate_2x2",
    "ChangDecoupling", "build_decoupling", "epsilon_star",
    "full_system_matrix", "reduced_model", "solve_chang_lti",
    "diff_expr", "evaluate", "parse_expr", "to_string",
    "SPRING_INITIAL_CONDITIONS", "SPRING_SLOPE_BOUNDS",
    "LinearSPSystem", "NonlinearSPSystem", "jacobians",
    "nonlinear_spring_certificate", "nonlinear_spring_system",
    "reduced_manifold_slope", "scalar_hull",
    "Trajectory", "VariationalTrajectory", "detect_convergence",
    "find_equilibria", "integrate", "integrate_batch",
    "integrate_variational", "write_trajectory_csv",
    "certificate_cone", "monotone_probe",
]
