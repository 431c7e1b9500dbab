"""Average-cost Markov decision processes via occupation-measure linear programs.

Solvers for the unconstrained, budget-constrained, and lexicographic
long-run average cost problems on finite state spaces, with dual
certificates, optimality-equation residual checks, independent
brute-force oracles, trajectory simulation, and a CLI.
"""

from .acoe import (
    AcoeReport,
    GreedyPolicy,
    StateSlack,
    acoe_residuals,
    constrained_acoe_residuals,
    extract_greedy_policy,
)
from .constrained import (
    ConstrainedDual,
    ConstrainedSolution,
    LexSolution,
    build_constrained,
    lex_solve,
    solve_constrained,
)
from .documents import (
    acoe_csv,
    build_constrained_document,
    build_lex_document,
    build_unconstrained_document,
    gamma_from_document,
    pair_from_document,
    parse_document,
    to_json,
    verify_solution_document,
)
from .errors import (
    AcmdpError,
    DocumentError,
    EmptyAbsorbingSetError,
    EnumerationGuardError,
    InfeasibleStageError,
    InstanceParseError,
    InstanceSemanticError,
    InternalInconsistencyError,
    InvalidModelError,
    MultichainError,
    NonConvergenceError,
)
from .estimators import (
    AverageCostSolver,
    ConstrainedSolver,
    LexicographicSolver,
    ValueIterationSolver,
)
from .lp import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    LPSolution,
    StandardLP,
    Tolerances,
    enumerate_bfs_optimum,
    polish_dual,
    solve_simplex,
)
from .model import (
    FiniteMDP,
    QueueFamilySpec,
    ValidationReport,
    build_queue_truncation,
    from_entries,
    load_instance,
    require_valid,
    save_instance,
    validate,
)
from .occupation import (
    DualCertificate,
    OccupationMeasure,
    StationaryPair,
    UnconstrainedSolution,
    average_cost,
    balance_residual,
    build_primal,
    decompose,
    dual_feasibility_slacks,
    greedy_actions,
    invariance_residual,
    normalization_residual,
    pair_to_occupation,
    solve_unconstrained,
    state_marginal,
)
from .oracles import (
    BruteForceResult,
    ChainAnalysis,
    ConstrainedOracleResult,
    RviResult,
    analyze_policy_chain,
    brute_force_constrained_value,
    brute_force_minimum_value,
    policy_transition_matrix,
    relative_value_iteration,
)
from .simulation import SimResult, simulate

__version__ = "0.1.0"

__all__ = [
    "AcmdpError",
    "AcoeReport",
    "AverageCostSolver",
    "BruteForceResult",
    "ChainAnalysis",
    "ConstrainedDual",
    "ConstrainedOracleResult",
    "ConstrainedSolution",
    "ConstrainedSolver",
    "DocumentError",
    "DualCertificate",
    "EmptyAbsorbingSetError",
    "EnumerationGuardError",
    "FiniteMDP",
    "GreedyPolicy",
    "INFEASIBLE",
    "InfeasibleStageError",
    "InstanceParseError",
    "InstanceSemanticError",
    "InternalInconsistencyError",
    "InvalidModelError",
    "LPSolution",
    "LexSolution",
    "LexicographicSolver",
    "MultichainError",
    "NonConvergenceError",
    "OPTIMAL",
    "OccupationMeasure",
    "QueueFamilySpec",
    "RviResult",
    "SimResult",
    "StandardLP",
    "StateSlack",
    "StationaryPair",
    "Tolerances",
    "UNBOUNDED",
    "UnconstrainedSolution",
    "ValidationReport",
    "ValueIterationSolver",
    "acoe_csv",
    "acoe_residuals",
    "analyze_policy_chain",
    "average_cost",
    "balance_residual",
    "brute_force_constrained_value",
    "brute_force_minimum_value",
    "build_constrained",
    "build_constrained_document",
    "build_lex_document",
    "build_primal",
    "build_queue_truncation",
    "build_unconstrained_document",
    "constrained_acoe_residuals",
    "decompose",
    "dual_feasibility_slacks",
    "enumerate_bfs_optimum",
    "extract_greedy_policy",
    "from_entries",
    "gamma_from_document",
    "greedy_actions",
    "invariance_residual",
    "lex_solve",
    "load_instance",
    "normalization_residual",
    "pair_from_document",
    "pair_to_occupation",
    "parse_document",
    "polish_dual",
    "policy_transition_matrix",
    "relative_value_iteration",
    "require_valid",
    "save_instance",
    "simulate",
    "solve_constrained",
    "solve_simplex",
    "solve_unconstrained",
    "state_marginal",
    "to_json",
    "validate",
    "verify_solution_document",
]
