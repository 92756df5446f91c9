"""Exact-arithmetic toolkit for correlated-equilibrium polytopes, extreme
Nash equilibria, and equilibrium improvement."""

from .congestion import (
    CongestionFn,
    build_binary_game,
    enumerate_binary_nash,
    finite_n_ce,
    limit_ce_lp,
    phi_curve,
    two_point_solve,
)
from .exchangeable import (
    UrnMixture,
    definetti_tv,
    enumerate_compositions,
    exchangeable_decompose,
    symmetric_ce_lp,
    symmetric_is_extreme,
    urn_dist,
)
from .games import (
    AnonymousForm,
    Game,
    JointDist,
    ProductDist,
    detect_symmetry,
    expected_utility,
    load_dist,
    load_game,
    profile_index,
    profile_unindex,
    save_dist,
    save_game,
    strategic_shift,
)
from .improve import (
    Objective,
    improving_direction,
    max_step,
    multi_improve_lp,
    optimize_objective,
    payoff_face_dimension,
    strategic_perturbation,
)
from .linalg import LpProblem, LpSolution, LpStatus, RationalMatrix, lp_solve, null_space, rank
from .nash import (
    RegularityReport,
    Support,
    fit_utilities,
    indifference_jacobian,
    is_quasi_strict,
    is_regular,
    polygon_check,
    support_of,
    two_mixer_regularity,
    two_player_support_solve,
    verify_nash,
)
from .packing import (
    CanonicalGame,
    CylinderPacking,
    canonical_game,
    certify_canonical,
    cylinder_pack,
    verify_packing,
)
from .polytope import (
    IncentiveMatrix,
    TangentSpace,
    dimension_report,
    incentive_matrix,
    is_ce,
    is_extreme,
    tangent_space,
    zero_marginal_space,
)
from .rational import Rat, rat, rat_str

__version__ = "0.1.0"
