"""Intrinsic rolling of reductive homogeneous spaces over their tangent spaces."""
from .constants import TOL, Tolerances
from .errors import (BadAlpha, BadBasePoint, ConfigError, HomrollError, NonFinite, NonSquare,
                     NotClosed, NotSkew, NotTangent, OddPanels, RelationViolated, SingularSplit,
                     StateInvariantViolated, TooFarFromGroup)
from .lie import AlgebraElement, MatrixLieGroup, Retraction, retract_to_group
from .matcore import integrate_fixed, mat_exp, polar_factor, quad_simpson, rk4_step
from .reductive import (CANONICAL_FIRST, CANONICAL_SECOND, AlphaKind, AlphaMap, Embedding,
                        ReductiveSpace, parallel_transport, project_h, project_m, validate_space)
from .rolling import (ControlCurve, RollingState, RollingTrajectory, closed_form_can1,
                      closed_form_can2, closed_form_trajectory, integrate_rolling,
                      lie_group_rolling, symmetric_pair_rolling, verify_no_slip,
                      verify_no_twist)
from .spaces import (StiefelAlphaSpace, make_group_as_reductive, make_o_n, make_so_n,
                     make_sphere, make_stiefel, make_symmetric_pair, stiefel_project_m,
                     stiefel_special_rolling, stiefel_tangent_lift)

__version__ = "0.1.0"
