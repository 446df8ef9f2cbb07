"""shrinkcut: penalized QUBO construction, SDP-guided Max-Cut shrinking,
pluggable solving, and verified reconstruction with repair."""

from .instances import (
    MdkpInstance,
    MisInstance,
    ParseError,
    QapInstance,
    load_optima,
    parse_mdkp,
    parse_mis_edgelist,
    parse_qaplib,
    serialize_mdkp,
    serialize_mis_edgelist,
    serialize_qaplib,
)
from .qubo import (
    DEFAULT_MULTIPLIER,
    PenaltyPolicy,
    QuboModel,
    build_mdkp_qubo,
    build_mis_qubo,
    build_qap_qubo,
    coefficient_scale,
    decision_indices,
    evaluate_qubo,
    model_from_json,
    model_to_json,
    recommend_penalty,
    slack_bit_count,
)
from .maxcut import (
    MaxCutGraph,
    binary_to_spins,
    classify_edges,
    cut_value,
    graph_from_json,
    graph_to_json,
    graph_to_qubo,
    qubo_to_maxcut,
    spins_to_binary,
)
from .sdp import (
    CorrelationMatrix,
    EmbeddingVectors,
    default_rank,
    extract_correlations,
    sdp_objective,
    solve_maxcut_sdp,
)
from .spectral import Spectrum, laplacian, select_target_size, symmetric_eigenvalues
from .shrink import (
    MergeStep,
    ShrinkConfig,
    ShrinkResult,
    ShrinkStats,
    SuperNode,
    WorkingGraph,
    effective_correlation,
    local_correlation_update,
    merge_score,
    merge_steps_from_jsonl,
    merge_steps_to_jsonl,
    run_shrink,
    select_merge,
)
from .feasibility import (
    RepairReport,
    hungarian,
    is_feasible,
    make_penalty,
    mdkp_violations,
    mis_violations,
    pi_mdkp,
    pi_mis,
    pi_qap,
    qap_violations,
    repair,
    repair_mdkp,
    repair_mis,
    repair_qap,
    violations,
)
from .solvers import Solution, solve_exact, solve_qubo, solve_sa, solve_vqe_sim
from .reconstruct import LiftedSolution, decode_solution, lift_solution, replay
from .pipeline import (
    CSV_COLUMNS,
    KINDS,
    PHASES,
    STRATEGIES,
    PipelineConfig,
    PipelineError,
    Report,
    build_model,
    load_instance,
    local_search,
    objective_value,
    optimality_gap,
    report_to_json,
    rsq,
    run_bench,
    run_pipeline,
)

__version__ = "0.1.0"
