"""Bound states of the nonlinear Dirac equation on noncompact metric graphs."""

from .graphs import (
    CompactCore,
    GraphError,
    GraphParseError,
    MetricGraph,
    compact_core,
    format_graph,
    line_graph,
    load_graph,
    parse_graph,
    star_graph,
)
from .mesh import Mesh, MeshError, build_mesh
from .functions import (
    GraphFunction,
    SpinorFunction,
    kirchhoff_flux_sum,
    kirchhoff_w_sum,
    norm,
    quadrature,
    signed_vertex_value,
    w_component_norm,
)
from .operators import (
    DiscreteDirac,
    DiscreteLaplacian,
    EigenDecomposition,
    EigensolverError,
    assemble_dirac,
    assemble_nls_laplacian,
    eigen_extremes,
    eigen_full,
    energy_norm,
    spectral_split,
)
from .nonlinearity import (
    GrowthBoundReport,
    HypothesisReport,
    NonlinearityModel,
    PowerLaw,
    check_growth_bound,
    check_hypotheses,
    eval_model,
)
from .solvers import (
    ContinuationError,
    ContinuationStep,
    MeshConfig,
    NldeProblem,
    NlsProblem,
    SolveReport,
    SolverError,
    action_j,
    action_phi,
    continuation_solve,
    decay_rate,
    default_nls_guess,
    lift_guess,
    nlde_defect_direct,
    nlde_residual,
    nls_residual,
    solve_nlde,
    solve_nls,
    transfer_graph_function,
    transfer_spinor,
)
from .limits import (
    ExperimentRow,
    ExperimentTable,
    LimitSchedule,
    ScheduleError,
    bounds_report,
    fit_decay,
    fit_rate,
    gn_ratio_max,
    make_schedule,
    run_limit_sweep,
    schedule_from_pairs,
)

__version__ = "0.1.0"
