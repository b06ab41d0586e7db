"""Robust invariant sets for polytopic uncertain linear systems under state feedback."""

__version__ = "0.1.0"

from invkit.exceptions import (  # noqa: E402
    EmptySetError,
    InvkitError,
    IterationCapExceeded,
    NumericalFailure,
    OriginExcluded,
    RowCapExceeded,
    ShapeMismatch,
    UnboundedError,
    VertexBudgetExceeded,
)
from invkit.geometry import (  # noqa: E402
    HPolytope,
    VPolytope,
    bounding_box,
    enumerate_vertices,
    is_empty,
    is_subset,
    linear_map,
    minkowski_sum,
    polygon_vertices,
    prune_hull,
    remove_redundant_halfspaces,
    same_set,
    solve_lp,
    spectral_norm,
    support_function,
    zeta,
)
from invkit.marpi import (  # noqa: E402
    BoundParams,
    MarpiResult,
    Termination,
    bound_N,
    brute_force_intersection,
    brute_force_sk,
    marpi_compute,
    pre_set,
)
from invkit.mrpi import (  # noqa: E402
    Existence,
    ExistenceReport,
    MrpiIterate,
    existence_check,
    initial_iterate,
    mrpi_hull_step,
    tail_bound,
)
from invkit.system import (  # noqa: E402
    ClosedLoopModel,
    OutputSpec,
    UncertainSystem,
    build_closed_loop,
    build_output_base,
    check_schur_stability,
    example_system,
    with_base_set,
)
from invkit.verify import (  # noqa: E402
    certify_invariance,
    find_escape,
    maximality_probe,
    sample_trajectories,
)
