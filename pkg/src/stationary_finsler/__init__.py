"""Numerical toolkit for stationary splitting Lorentz-Finsler spacetimes.

``L(tau, v) = -Lam tau^2 + 2 B(v) tau + F^2(v)`` on ``R x M``: forward-mode
jets, a metric zoo, fundamental tensors and index checks, Killing and
static-splitting checks, optical (Fermat) metrics, geodesics and causal
structure.
"""

from .ad import Jet2, Taylor2, fd_jet2, jet2
from .causality import (
    BallBoundary,
    BallKind,
    ChronoSet,
    DistanceGrid,
    TimeSign,
    ball_boundary,
    causality2_evidence,
    chronological_set,
    finsler_distance,
    punctured_mask,
)
from .config import build_metric, load_config, parse_config
from .errors import *  # noqa: F401,F403
from .fermat import (
    CausalClass,
    CausalKind,
    Orientation,
    OpticalMetricPair,
    classify_causal,
    fermat_hypotheses,
    legendre_hypotheses,
    legendre_invert,
    legendre_map,
    optical_metrics,
    reduced_lagrangian,
    static_lagrangians,
    verify_finsler,
)
from .geodesics import (
    GeodesicTrajectory,
    ShootingResult,
    conserved_quantities,
    fermat_geodesic_ivp,
    geodesic_bvp_shoot,
    lightlike_correspondence_check,
    spacetime_geodesic_ivp,
)
from .killing import (
    VectorField,
    complete_lift_apply,
    contraction_gap,
    isometry_flow_check,
    killing_residual,
    lie_derivative_components,
    static_conditions_check,
    time_translation,
)
from .lagrangian import (
    FiberLagrangian,
    ScalarField,
    SpacetimeLagrangian,
    fiber_jet,
    full_jet,
    make_stationary_splitting,
)
from .tensor import Signature, check_index1_region, fundamental_tensor, signature_of
from .types import (
    BasePoint,
    ConeKind,
    ConeSpec,
    SpacetimePoint,
    SpacetimeVector,
    SpaceVector,
    SymBilinear,
    in_cone,
)
from .zoo import ZOO, load_zoo, sample_pairs, zoo_names

__version__ = "0.1.0"
