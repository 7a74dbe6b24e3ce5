"""Verifier-free candidate selection via pairwise judging and evolution.

A population of candidate solutions is compared pairwise by a judge model,
ranked with a Bradley-Terry fit, and evolved over several generations: the
top quarter is carried unchanged, the bottom quarter is dropped, and the
rest are rewritten against aggregated win/tie/loss feedback.  A denser
final comparison round picks the single answer.
"""

from .backends import (
    Backend,
    CompletionRequest,
    HttpBackend,
    SyntheticBackend,
    SyntheticWorldConfig,
    format_candidate,
    parse_theta,
)
from .baselines import (
    DiagnosticReport,
    LabeledPair,
    judge_diagnostic,
    load_pairs,
    majority_vote,
    parse_verdict_line,
    pointwise_score,
    pointwise_top1_expected_accuracy,
    self_refine,
)
from .btrank import (
    LEFT_WINS,
    RIGHT_WINS,
    TIE,
    ComparisonRecord,
    ScoreVector,
    bt_gradient,
    bt_objective,
    fit_bt,
    rank,
)
from .elo import (
    EloEstimate,
    ProblemOutcome,
    bootstrap_ci,
    estimate,
    load_outcomes,
    map_estimate,
    solve_probability,
)
from .errors import (
    BackendError,
    ConfigError,
    JudgeParseError,
    PairingError,
    ReplayError,
)
from .judging import (
    ComparisonTask,
    Judgment,
    canonicalize,
    degraded_tie,
    parse_judge_reply,
    render_comparison_prompt,
    rewrite_self_relative,
)
from .pairing import PairingPlan, sample_pairing
from .pipeline import (
    ReplayResult,
    RunConfig,
    RunTrace,
    compute_budget,
    derive_seed,
    replay,
    run_pipeline,
)
from .population import (
    Candidate,
    FeedbackStrategy,
    GenerationState,
    aggregate_feedback,
    assemble_next_generation,
    render_mutation_prompt,
    select_discards,
    select_elites,
)
from .prompts import PromptTemplates
from .scaling import (
    JudgmentMatrix,
    SimCell,
    generate_matrix,
    load_matrix,
    optimal_frontier,
    round_robin_schedule,
    save_matrix,
    simulate_cell,
    sweep_grid,
    write_grid_csv,
)

__version__ = "0.1.0"

__all__ = [
    "Backend",
    "BackendError",
    "Candidate",
    "ComparisonRecord",
    "ComparisonTask",
    "CompletionRequest",
    "ConfigError",
    "DiagnosticReport",
    "EloEstimate",
    "FeedbackStrategy",
    "GenerationState",
    "HttpBackend",
    "JudgeParseError",
    "Judgment",
    "JudgmentMatrix",
    "LEFT_WINS",
    "LabeledPair",
    "PairingError",
    "PairingPlan",
    "ProblemOutcome",
    "PromptTemplates",
    "RIGHT_WINS",
    "ReplayError",
    "ReplayResult",
    "RunConfig",
    "RunTrace",
    "ScoreVector",
    "SimCell",
    "SyntheticBackend",
    "SyntheticWorldConfig",
    "TIE",
    "aggregate_feedback",
    "assemble_next_generation",
    "bootstrap_ci",
    "bt_gradient",
    "bt_objective",
    "canonicalize",
    "compute_budget",
    "degraded_tie",
    "derive_seed",
    "estimate",
    "fit_bt",
    "format_candidate",
    "generate_matrix",
    "judge_diagnostic",
    "load_matrix",
    "load_outcomes",
    "load_pairs",
    "majority_vote",
    "map_estimate",
    "optimal_frontier",
    "parse_judge_reply",
    "parse_theta",
    "parse_verdict_line",
    "pointwise_score",
    "pointwise_top1_expected_accuracy",
    "rank",
    "render_comparison_prompt",
    "render_mutation_prompt",
    "replay",
    "rewrite_self_relative",
    "round_robin_schedule",
    "run_pipeline",
    "sample_pairing",
    "save_matrix",
    "select_discards",
    "select_elites",
    "self_refine",
    "simulate_cell",
    "solve_probability",
    "sweep_grid",
    "write_grid_csv",
]
