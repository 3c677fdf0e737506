"""Equilateral quantum-tree scattering: forward synthesis of the Jost and
S-functions, and recovery of the tree shape from scattering data."""

from .polyalg import Poly, RatFunc, Rational, det_polymatrix, poly_gcd
from .tree_core import (
    Forest,
    RootedTree,
    canonical_code,
    delete_root,
    degree,
    enumerate_rooted_trees,
    path_tree,
    random_tree,
    snowflake,
)
from .characteristic import (
    JostData,
    SPoleError,
    jost_E,
    jost_data_from_fraction,
    jost_data_of_tree,
    phi_D_check,
    phi_N_check,
    psi_hat_of_tree,
    psi_of_tree,
    psi_tilde,
    s_function,
    shape_fraction,
)
from .reconstruct import (
    BranchExpansion,
    NotShapeFractionError,
    ReconstructionResult,
    branch_expansion_of,
    expand_branched_cf,
    invert,
    invert_by_enumeration,
    peel_root,
    solve_reciprocal_diophantine,
    to_rooted_tree,
)
from .scattering_numeric import (
    AsymmetricPotentialError,
    FundamentalPair,
    Potential,
    find_jost_zeros,
    integrate_sc,
    jost_E_with_potential,
    phi_D_with_potential,
    phi_N_with_potential,
    verify_asymptotics,
)
from .sfit import (
    FitFailedError,
    PeriodNotDetectedError,
    SSampleSet,
    estimate_edge_length,
    fit_shape_fraction,
    pipeline_invert,
    synthesize_samples,
)

__version__ = "0.1.0"
