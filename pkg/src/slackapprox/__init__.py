"""Inner and outer convex approximations of polytopes from approximate
cone factorizations of their slack matrices."""
from ._jit import NUMBA_ENABLED
from .approx import (BoundsReport, InnerBody, LiftDescription, OuterBody, PolarityReport,
                     QuadraticForm, bisect_scale, boundary_point, dikin_contains,
                     dikin_ellipsoid, inn_contains, inner_body, out_contains, outer_body,
                     quality_bounds, soc_lift, sonnevend_radius, support, verify_polarity)
from .cones import ScaledSocParams, in_oin, in_oout, in_scaled_soc, project_cone, xi
from .errors import (DegenerateSpectrumError, IndeterminateError, NumericalError,
                     SlackApproxError, SolverError, StructuralError, ValidationError)
from .factor import (ErrorReport, FactorPair, NMFOptions, factor_error, nmf, rank_one_factor,
                     verify_factorization)
from .model import (ConeSpec, Orthant, Polytope, SecondOrder, ValidationReport, polar,
                    validate_polytope)
from .nested import (ChainReport, NestedPair, ca_contains, cb_contains, containment_chain,
                     nested_quality_bounds)
from .slack import SlackMatrix, cor_instance, generalized_slack, slack_matrix
from .solver import ConicProblem, ConicSolution, SolverOptions, Status, mu, solve

__version__ = "0.1.0"
