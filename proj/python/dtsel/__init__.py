"""Rank-based variable selection for doubly truncated linear regression."""

from ._dtsel import (
    AdaptiveWeights,
    Calibration,
    Dataset,
    DtselError,
    FitResult,
    LambdaGrid,
    MethodSummary,
    ProposedFit,
    SeEstimate,
    SelectionResult,
    StudySummary,
    TraceEntry,
    adaptive_weights,
    bic_multiplier,
    comparable_pairs,
    estimate_se,
    fit_adaptive_lasso,
    fit_proposed,
    fit_unpenalized,
    loss,
    naive_lad,
    read_csv,
    run_study,
    score,
    simulate_observed,
    solve_lad,
    weighted_loss,
    write_csv,
)

__all__ = [name for name in dir() if not name.startswith("_")]
