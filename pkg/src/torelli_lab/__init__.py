"""Exact computations on cell complexes of a symplectic lattice, the Johnson
target ∧³H/H, rank and θ invariants, certified reductions and coinvariants."""

from .cells import (
    BMTorus,
    Cell,
    Chain,
    H1Model,
    bm_class,
    bm_sum_certificate,
    boundary,
    boundary_chain,
    canonical_key,
    compatible_with,
    compose_edges,
    h1_chain_value,
    h1_edge_class,
    three_cell_chain,
)
from .coinvariants import (
    MatrixAction,
    TransvectiveData,
    base_case_decomposition,
    coinvariants,
    cokernel_of_fixed_sum,
    fixed_space,
)
from .edge_reduction import (
    EdgeClass,
    a_space,
    a_space_restricted,
    edge_rank_reduce,
    edge_theta_reduce,
    replay_edge_certificate,
    verify_edge_certificate,
)
from .errors import (
    CertificateError,
    InvariantError,
    MeasureError,
    PreconditionError,
    ThresholdError,
    TorelliLabError,
)
from .exterior import (
    JohnsonTarget,
    RationalSubspace,
    WedgeSpace,
    inclusion_exclusion_dims,
    perp_family_cover,
    quotient_project,
    spanning_pairs,
    wedge_power_of_subspace,
)
from .invariants import (
    ClassFamily,
    enumerate_bounded_keys,
    orbit_key,
    rk_invariant,
    theta_invariant,
    verify_update_relations,
)
from .johnson import (
    BoundingPairDatum,
    decompose_into_fixed_family,
    fixed_space_of_transvection,
    johnson_of_bp,
    transvection_action,
)
from .lattice import (
    LatticeSubgroup,
    SymplecticLattice,
    extend_to_symplectic_subgroup,
    form_eval,
    genus,
    is_primitive,
    perp,
    project,
    symplectic_basis,
    transvect,
)
from .reduction import (
    BMChain,
    Thresholds,
    genus_increase_step,
    rank_reduce,
    replay_certificate,
    theta_reduce,
    verify_certificate,
)

__version__ = "0.1.0"
