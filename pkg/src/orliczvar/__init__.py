"""N-function calculus, Orlicz norms and a P1 energy minimizer for
-div(phi(|grad u|) grad u) = f(x, u) + h with zero Dirichlet data."""
from .config import ConfigError, RunConfig, load_config, parse_config, serialize_config
from .expr import ExpressionError, compile_expression
from .mesh import (BoundaryViolation, DiscreteField, InvalidDimensions, Mesh, MeshError, MeshMismatch,
                   gradient_norms, integrate_nodal, make_rect_mesh, read_field_csv, write_field_csv,
                   write_mesh_csv)
from .nfunction import (BUILTINS, BoundReport, BracketFailure, IndexOutOfRange, InvalidPhi, NFunction,
                        NFunctionError, NonMonotone, PhiSpec, QuadratureFailure, SobolevConjugate,
                        build_nfunction, builtin, complementary, from_expression, potential,
                        sobolev_conjugate, young_gap, zeta_bounds_check)
from .norms import (embedding_ratio, gradient_luxemburg_norm, holder_check, lebesgue_norm,
                    luxemburg_norm, modular, norm_modular_sandwich, poincare_ratio)
from .solver import (GrowthViolation, ProblemSpec, Reaction, SolveReport, SolverOptions,
                     coercivity_estimate, energy, growth_audit, minimize, power_critical,
                     weak_gradient)

__version__ = "0.1.0"
