"""Numerical laboratory for condensing zero-range processes on finite graphs.

The package builds the full chain from microscopic models to their limits:
exact stationary laws and occupation-measure rate functions, potential theory
(capacities, committors, trace chains), the accelerated metastable dynamics
and its limiting jump chain, face Dirichlet energies on the simplex, the
two-term expansion of the rate function across five time scales, and Monte
Carlo engines for both the particle system and the absorbed diffusion.
"""

__version__ = "0.1.0"

from .sitegraph import (
    SiteGraph,
    apply_generator,
    capacity,
    complete_graph,
    cycle_graph,
    dirichlet_form,
    face_projection,
    harmonic_extension,
    load_graph,
    save_graph,
    solve_dirichlet,
    symmetrize,
    trace_graph,
    two_site_graph,
)
from .chains import (
    RateResult,
    VariationalError,
    chain_capacity,
    chain_dirichlet_form,
    committor,
    expected_hitting_times,
    rate_reversible_chain,
    rate_variational_chain,
    resolvent_solve,
    stationary_distribution,
)
from .zrp import (
    ConfigSpace,
    SpaceTooLargeError,
    WellPartition,
    ZrpModel,
    balanced_config,
    compositions,
    condensed_config,
    default_well_radius,
    limiting_partition_function,
    load_model,
    occupancy_series,
    occupancy_weight,
    save_model,
    space_size,
    stickiness,
    wells,
)
from .rates import (
    beta_moment,
    chain_rate,
    limiting_chain,
    rate_reversible,
    rate_variational,
    vertex_measure_rate,
)
from .simplexfn import (
    FaceComponent,
    SimplexGrid,
    TestFunction,
    face_energy,
    face_energy_mc,
    face_integral,
    face_measure_rate,
    normalized,
    product_bump,
    scaled,
    simplex_grid,
)
from .metastability import (
    JumpRateEstimate,
    ResolventReport,
    capacity_1d_exact,
    hitting_time_capacity_identity,
    mean_jump_rates,
    m0star_diagnostic,
    partition_sum_two_sites,
    resolvent_check,
)
from .expansion import (
    ExpansionTarget,
    Extrapolation,
    GammaReport,
    RecoverySequence,
    bounded_lipschitz_distance,
    build_recovery,
    bump_recovery,
    default_targets,
    expansion_table,
    richardson,
    scale_factor,
    scale_targets,
    stationary_sequence,
    tilt_potential,
    tilted_recovery,
    wn_recovery,
)
from .simulate import (
    ScalingFit,
    Trajectory,
    condensation_time_scaling,
    d0_diagnostic,
    diffusion_drift,
    empirical_occupation,
    simulate_diffusion,
    simulate_zrp,
    trace_rate_tables,
    transition_time_scaling,
    well_hitting_times,
)
