"""Control-input selection and synchronization certificates for signed
Kuramoto oscillator networks."""

from .dynamics import (
    SimConfig,
    SimulationError,
    Trajectory,
    detect_frequency_sync,
    detect_phase_sync,
    discrete_sinz_energy,
    metzler_diagnostic,
    monitor_bounds,
    simulate,
    storage_function,
)
from .experiments import (
    ALGORITHMS,
    CSV_COLUMNS,
    ConfigError,
    SweepConfig,
    SweepRecord,
    emit_results,
    load_records,
    realization_seed,
    run_sweep,
    summarize,
    validate_records,
    wf_parameter,
)
from .feasibility import (
    FeasibilityReport,
    assumption_intervals,
    check_cycle_parity,
    check_feasibility,
    check_parity_general,
    cycle_audit,
    interval_clearance,
    lp_feasibility_oracle,
    sample_initial_phases,
)
from .graph import (
    GRAPH_KINDS,
    Edge,
    GraphError,
    SignedDigraph,
    build_graph,
    edges_into,
    generate_ensemble,
    incidence_bundle,
    load_graph,
    partition,
    save_graph,
)
from .selection import (
    QEstimate,
    QEstimatorConfig,
    SelectionResult,
    choose_alpha,
    optimality_bound,
    q_estimate,
    select_greedy_lambda,
    select_optimal,
    select_random,
    select_submodular,
)
from .spectral import (
    EPS_STRICT,
    Certificate,
    ReducedSystem,
    certify,
    dtw_norm,
    hetero_threshold,
    lambda_min,
    reduce_system,
    submatrix_R,
)

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "CSV_COLUMNS",
    "Certificate",
    "ConfigError",
    "EPS_STRICT",
    "Edge",
    "FeasibilityReport",
    "GRAPH_KINDS",
    "GraphError",
    "QEstimate",
    "QEstimatorConfig",
    "ReducedSystem",
    "SelectionResult",
    "SignedDigraph",
    "SimConfig",
    "SimulationError",
    "SweepConfig",
    "SweepRecord",
    "Trajectory",
    "assumption_intervals",
    "build_graph",
    "certify",
    "check_cycle_parity",
    "check_feasibility",
    "check_parity_general",
    "choose_alpha",
    "cycle_audit",
    "detect_frequency_sync",
    "detect_phase_sync",
    "discrete_sinz_energy",
    "dtw_norm",
    "edges_into",
    "emit_results",
    "generate_ensemble",
    "hetero_threshold",
    "incidence_bundle",
    "interval_clearance",
    "lambda_min",
    "load_graph",
    "load_records",
    "lp_feasibility_oracle",
    "metzler_diagnostic",
    "monitor_bounds",
    "optimality_bound",
    "partition",
    "q_estimate",
    "realization_seed",
    "reduce_system",
    "run_sweep",
    "sample_initial_phases",
    "save_graph",
    "select_greedy_lambda",
    "select_optimal",
    "select_random",
    "select_submodular",
    "simulate",
    "storage_function",
    "submatrix_R",
    "summarize",
    "validate_records",
    "wf_parameter",
]
